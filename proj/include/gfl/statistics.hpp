// Replication-level aggregation with Student-t confidence intervals.
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace gfl {

struct MseEstimate {
    std::string filter;
    double mean_sq_error = 0.0;
    double mse_ci = 0.0; // 95% half-width
    double bias = 0.0;
    double bias_ci = 0.0;
    std::size_t replications = 0;
    /// Per-replication time averages, kept for paired comparisons.
    std::vector<double> rep_mse;
    std::vector<double> rep_bias;

    double ci_half_width() const noexcept { return mse_ci; }
};

/// Two-sided 95% Student-t quantile with dof degrees of freedom.
double t_quantile_95(std::size_t dof);

struct MeanCi {
    double mean = 0.0;
    double half_width = 0.0;
};

/// Sample mean and 95% half-width t * sd / sqrt(n); needs n >= 2.
MeanCi mean_ci(std::span<const double> values);

MseEstimate aggregate(std::string filter, std::vector<double> rep_mse, std::vector<double> rep_bias);

/// Mean and CI of the paired differences a_i - b_i.
MeanCi paired_difference(const MseEstimate &a, const MseEstimate &b);

} // namespace gfl
