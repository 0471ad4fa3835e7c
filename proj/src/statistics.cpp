#include "gfl/statistics.hpp"

#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace gfl {

double t_quantile_95(std::size_t dof) {
    if (dof == 0)
        throw std::invalid_argument("t_quantile_95: need at least one degree of freedom");
    const boost::math::students_t_distribution<double> t(static_cast<double>(dof));
    return boost::math::quantile(boost::math::complement(t, 0.025));
}

MeanCi mean_ci(std::span<const double> values) {
    if (values.size() < 2)
        throw std::invalid_argument("mean_ci: a confidence interval needs at least two replications");
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values)
        mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : values)
        ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    return {mean, t_quantile_95(values.size() - 1) * sd / std::sqrt(n)};
}

MseEstimate aggregate(std::string filter, std::vector<double> rep_mse, std::vector<double> rep_bias) {
    if (rep_mse.size() != rep_bias.size())
        throw std::invalid_argument("aggregate: mse and bias series differ in length");
    const auto m = mean_ci(rep_mse);
    const auto b = mean_ci(rep_bias);
    MseEstimate e;
    e.filter = std::move(filter);
    e.mean_sq_error = m.mean;
    e.mse_ci = m.half_width;
    e.bias = b.mean;
    e.bias_ci = b.half_width;
    e.replications = rep_mse.size();
    e.rep_mse = std::move(rep_mse);
    e.rep_bias = std::move(rep_bias);
    return e;
}

MeanCi paired_difference(const MseEstimate &a, const MseEstimate &b) {
    if (a.rep_mse.size() != b.rep_mse.size())
        throw std::invalid_argument("paired_difference: replication counts differ");
    std::vector<double> d(a.rep_mse.size());
    for (std::size_t i = 0; i < d.size(); ++i)
        d[i] = a.rep_mse[i] - b.rep_mse[i];
    return mean_ci(d);
}

} // namespace gfl
