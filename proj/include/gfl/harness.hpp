// Monte Carlo harness: stationary MSE and bias of each filter over
// independently seeded replications, regime labels, and rate fits across N.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <string_view>
#include <vector>

#include "gfl/filters.hpp"
#include "gfl/state_space.hpp"
#include "gfl/statistics.hpp"

namespace gfl {

/// 20 ceil(s_N sqrt(N)): a multiple of the gain time constant 1/K_inf.
std::size_t default_burn_in(const SystemParams &params);

struct ExperimentConfig {
    explicit ExperimentConfig(SystemParams p) : params(std::move(p)) {}

    SystemParams params;
    std::size_t horizon = 0;
    std::size_t burn_in = 0;
    std::size_t replications = 2;
    std::vector<FilterMode> filters;
    std::uint64_t seed = 0;
    std::optional<std::size_t> tau_override;
    GainMode gain_mode = GainMode::Recursive;
    /// 0 disables the particle-filter oracle.
    std::size_t oracle_particles = 0;
    double resample_threshold = 0.5;
    std::size_t threads = 1;

    /// Throws std::invalid_argument when burn_in >= horizon, replications < 2,
    /// or the filter list is empty.
    void validate() const;
    std::size_t tau() const;
};

/**
 * @brief One MseEstimate per configured filter, in config order, plus an
 * "oracle" entry last when oracle_particles > 0.
 *
 * Replication i simulates from x0 = 0 with seed replication_seed(seed, i);
 * every filter (and the oracle) sees the same trajectory, so per-replication
 * values can be paired. Results do not depend on the thread count.
 */
std::vector<MseEstimate> estimate_mse(const ExperimentConfig &config);

enum class Regime { NegligibleSNR, LargeSNR, Balanced, LowSNRWindow };
std::string_view regime_name(Regime regime);

struct RegimeThresholds {
    double cutoff = 10.0; // ">>" means ratio >= cutoff
};

struct RegimeLabel {
    Regime label = Regime::Balanced;
    double s_over_sqrtN = 0.0;
    double s_times_sqrtN = 0.0;
};

/// s/sqrt(N) >= cutoff: NegligibleSNR; s sqrt(N) <= 1/cutoff: LargeSNR;
/// otherwise LowSNRWindow when s <= 1, else Balanced. Both comparisons are
/// inclusive up to 1e-12 relative.
RegimeLabel classify_regime(const SystemParams &params, RegimeThresholds thresholds = {});

enum class SRule { SqrtN, NQuarter, Fixed };

struct SRuleSpec {
    SRule rule = SRule::SqrtN;
    double constant = 1.0; // Fixed only

    double s_for(std::int64_t N) const;
};

struct RateFitConfig {
    NoiseModel signal_noise = NoiseModel::gaussian();
    NoiseModel obs_noise = NoiseModel::logistic();
    FilterKind filter = FilterKind::GF;
    std::vector<std::int64_t> N_list;
    SRuleSpec s_rule;
    std::size_t replications = 2;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
    /// Horizon and burn-in as multiples of the filter's error time constant.
    double horizon_factor = 50.0;
    double burn_in_factor = 10.0;
};

struct RatePoint {
    std::int64_t N = 0;
    double s_N = 0.0;
    std::size_t tau = 0;
    std::size_t horizon = 0;
    std::size_t burn_in = 0;
    MseEstimate estimate;
    double lower_bound = 0.0; // 1/barJ_inf at tau = round(s_N)
    double gap = 0.0;         // mse - lower_bound
};

struct RateFit {
    double slope = 0.0;
    bool inconclusive = false; // every bias CI covers zero
    std::vector<RatePoint> points;
};

/// 1/(1 - gamma (1 - K_inf I)): e-folding time of the filter error.
double error_time_constant(const SystemParams &params, FilterKind filter);

/// Slope of log|bias| against log s_N.
RateFit rate_fit_bias(const RateFitConfig &config);
/// Slope of log|mse - 1/barJ_inf| against log s_N.
RateFit rate_fit_mse_gap(const RateFitConfig &config);

} // namespace gfl
