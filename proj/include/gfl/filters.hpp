// Filter bank for the scaled system: Kalman filter, the score-corrected
// (Goggin) filter and its centred variant, the two trivial filters and the
// naive batch-averaging filter.
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gfl/state_space.hpp"

namespace gfl {

enum class FilterKind { KF, GF, CenteredGF, TrivialMean, TrivialObs, NaiveBatch };

struct FilterMode {
    FilterKind kind = FilterKind::KF;
    std::size_t tau = 0; // NaiveBatch only

    static FilterMode naive_batch(std::size_t tau) { return {FilterKind::NaiveBatch, tau}; }
    bool operator==(const FilterMode &) const = default;
};

/// Config names: "kf", "gf", "cgf", "trivial_mean", "trivial_obs", "naive_batch".
std::string_view filter_name(FilterKind kind);
FilterKind parse_filter_kind(std::string_view name);

enum class GainMode { Recursive, Stationary };
std::string_view gain_mode_name(GainMode mode);
GainMode parse_gain_mode(std::string_view name);

/// Kalman uses R = s_N^2 and unit information; Goggin uses R = s_N^2 I(v).
enum class GainKind { Kalman, Goggin };

struct GainSchedule {
    GainKind kind = GainKind::Goggin;
    double Q = 0.0;
    double R = 0.0;
    double info = 1.0; // I(v) for Goggin, 1 for Kalman
    std::vector<double> P; // P_1..P_horizon
    std::vector<double> K; // K_t = P_t info / R
    double P_inf = 0.0;
    double K_inf = 0.0;
};

/// Positive root of J^2 - ((1-gamma^2) N + I/s^2) J - gamma^2 N I/s^2 = 0,
/// the stationary information of the gain recursion with observation info I.
double stationary_information(const SystemParams &params, double info);

/// P_t = R (gamma^2 P_{t-1} + Q) / (I^2 (gamma^2 P_{t-1} + Q) + R), t = 1..horizon.
GainSchedule gain_schedule(const SystemParams &params, std::size_t horizon, double P0,
                           GainKind kind = GainKind::Goggin);

struct FixedPointIteration {
    double P = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Iterates the gain recursion in extended precision until it stalls.
FixedPointIteration iterate_gain_fixed_point(const SystemParams &params, GainKind kind, double P0,
                                             std::size_t max_iterations = 200'000'000);

struct FilterState {
    double estimate = 0.0;
    std::size_t step = 0;
    FilterMode mode;
};

/// x_t = gamma x_{t-1} + K (y - gamma x_{t-1}).
FilterState kf_step(const FilterState &state, double y, double gamma, double K);
/// x_t = gamma x_{t-1} + K (s score(y/s) - I(v) gamma x_{t-1}).
FilterState gf_step(const FilterState &state, double y, const SystemParams &params, double K);
/// x_t = gamma x_{t-1} + K s score((y - gamma x_{t-1})/s).
FilterState centered_gf_step(const FilterState &state, double y, const SystemParams &params,
                             double K);

/// Batch k estimate is the mean of y over batch k; a short final batch
/// averages what it has.
std::vector<double> naive_batch_filter(std::span<const double> y, std::size_t tau);

struct TrivialEstimates {
    std::vector<double> mean_estimates; // E[X_t] = 0
    std::vector<double> obs_estimates;  // Y_t
};
TrivialEstimates trivial_filters(std::span<const double> y);

/// P0 defaults to stationary_var_x(params); the estimate starts at 0.
std::vector<double> run_filter(const SystemParams &params, const Trajectory &traj, FilterMode mode,
                               GainMode gain_mode = GainMode::Recursive,
                               std::optional<double> P0 = std::nullopt);

/// Same, with a precomputed schedule of the matching kind (horizon >= trajectory).
std::vector<double> run_filter(const SystemParams &params, const Trajectory &traj, FilterMode mode,
                               const GainSchedule &schedule, GainMode gain_mode);

} // namespace gfl
