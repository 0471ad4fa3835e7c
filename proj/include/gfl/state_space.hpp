// Scaled scalar linear system
//   X_{t+1} = (1 - 1/N) X_t + N^{-1/2} w_t,   Y_t = X_t + s_N v_t
// with unit-variance signal noise w and observation noise v.
#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "gfl/noise_models.hpp"

namespace gfl {

struct SystemParams {
    std::int64_t N = 2;
    double s_N = 1.0;
    NoiseModel signal_noise = NoiseModel::gaussian();
    NoiseModel obs_noise = NoiseModel::gaussian();

    SystemParams(std::int64_t n, double s, NoiseModel signal, NoiseModel obs);

    double gamma() const noexcept { return 1.0 - 1.0 / static_cast<double>(N); }
    double g() const noexcept;
    /// 1 - gamma^2 = (2N - 1)/N^2, without cancellation.
    double one_minus_gamma_sq() const noexcept;
};

struct Trajectory {
    std::vector<double> x;
    std::vector<double> y;
    std::uint64_t seed = 0;

    std::size_t size() const noexcept { return x.size(); }
};

/// Var(X) in stationarity: (1/N)/(1 - gamma^2) = 1/(2 - 1/N).
double stationary_var_x(const SystemParams &params);

/// x[0] is the state after the first transition from x0; y[t] observes x[t].
Trajectory simulate(const SystemParams &params, std::size_t horizon, double x0,
                    std::uint64_t rng_seed);

/// Same recursion with caller-supplied noise draws (test doubles).
Trajectory simulate_with(const SystemParams &params, std::size_t horizon, double x0,
                         const std::function<double()> &draw_w,
                         const std::function<double()> &draw_v);

/// CSV with header t,x,y; t starts at 1.
void write_trajectory_csv(std::ostream &os, const Trajectory &traj);

} // namespace gfl
