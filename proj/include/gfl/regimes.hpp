// Closed-form regime map over an (N, s_N) grid: labels, the batched lower
// bound, trivial and Riccati MSE predictions, and a recommended filter.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gfl/harness.hpp"

namespace gfl {

struct RegimeMapRow {
    std::int64_t N = 0;
    double s_N = 0.0;
    double s_ratio = 0.0; // s_N / sqrt(N)
    RegimeLabel regime;
    std::string recommended_filter;
    std::string note;
    std::size_t tau = 0;
    double lower_bound = 0.0;
    double trivial_mean_mse = 0.0;
    double trivial_obs_mse = 0.0;
    double kf_mse_pred = 0.0;
    double gf_mse_pred = 0.0;
};

/// Mapping used by the report: NegligibleSNR -> trivial_mean,
/// LargeSNR -> trivial_obs, Balanced -> gf, LowSNRWindow -> kf (unresolved).
std::string recommended_filter(Regime regime);

RegimeMapRow regime_row(std::int64_t N, double s_N, const NoiseModel &signal_noise,
                        const NoiseModel &obs_noise, RegimeThresholds thresholds = {});

/// Rows in N-major order; s_N = ratio * sqrt(N).
std::vector<RegimeMapRow> build_regime_map(const std::vector<std::int64_t> &N_list,
                                           const std::vector<double> &s_ratio_list,
                                           const NoiseModel &obs_noise, const NoiseModel &signal_noise,
                                           RegimeThresholds thresholds = {});

std::vector<std::int64_t> default_regime_N();
/// 10^-3 .. 10^2, 11 log-spaced points.
std::vector<double> default_regime_ratios();

} // namespace gfl
