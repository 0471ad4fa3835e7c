#include "gfl/regimes.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gfl/crlb.hpp"
#include "gfl/filters.hpp"

namespace gfl {

std::string recommended_filter(Regime regime) {
    switch (regime) {
    case Regime::NegligibleSNR:
        return "trivial_mean";
    case Regime::LargeSNR:
        return "trivial_obs";
    case Regime::Balanced:
        return "gf";
    case Regime::LowSNRWindow:
        return "kf";
    }
    return "kf";
}

RegimeMapRow regime_row(std::int64_t N, double s_N, const NoiseModel &signal_noise,
                        const NoiseModel &obs_noise, RegimeThresholds thresholds) {
    SystemParams params(N, s_N, signal_noise, obs_noise);
    RegimeMapRow row;
    row.N = N;
    row.s_N = s_N;
    row.s_ratio = s_N / std::sqrt(static_cast<double>(N));
    row.regime = classify_regime(params, thresholds);
    row.recommended_filter = recommended_filter(row.regime.label);
    if (row.regime.label == Regime::LowSNRWindow)
        row.note = "unresolved - KF default";
    row.tau = default_tau(params);
    row.lower_bound = barJ_stationary(batch_params(params, row.tau), params, 1.0, 0).lower_bound;
    row.trivial_mean_mse = stationary_var_x(params);
    row.trivial_obs_mse = s_N * s_N;
    row.kf_mse_pred = 1.0 / kalman_stationary_J(params);
    row.gf_mse_pred = 1.0 / goggin_stationary_J(params);
    return row;
}

std::vector<RegimeMapRow> build_regime_map(const std::vector<std::int64_t> &N_list,
                                           const std::vector<double> &s_ratio_list,
                                           const NoiseModel &obs_noise, const NoiseModel &signal_noise,
                                           RegimeThresholds thresholds) {
    if (N_list.empty() || s_ratio_list.empty())
        throw std::invalid_argument("build_regime_map: grids must be nonempty");
    std::vector<RegimeMapRow> rows;
    rows.reserve(N_list.size() * s_ratio_list.size());
    for (auto N : N_list)
        for (double r : s_ratio_list)
            rows.push_back(regime_row(N, r * std::sqrt(static_cast<double>(N)), signal_noise, obs_noise,
                                      thresholds));
    return rows;
}

std::vector<std::int64_t> default_regime_N() { return {1'000, 10'000, 100'000, 1'000'000}; }

std::vector<double> default_regime_ratios() {
    std::vector<double> r(11);
    for (int i = 0; i < 11; ++i)
        r[static_cast<std::size_t>(i)] = std::pow(10.0, -3.0 + 0.5 * i);
    return r;
}

} // namespace gfl
