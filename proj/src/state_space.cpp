#include "gfl/state_space.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

namespace gfl {

SystemParams::SystemParams(std::int64_t n, double s, NoiseModel signal, NoiseModel obs)
    : N(n), s_N(s), signal_noise(std::move(signal)), obs_noise(std::move(obs)) {
    if (N < 2)
        throw std::invalid_argument("SystemParams: N must be >= 2 so that gamma lies in (0, 1)");
    if (!(s_N > 0.0) || !std::isfinite(s_N))
        throw std::invalid_argument("SystemParams: s_N must be positive and finite");
}

double SystemParams::g() const noexcept { return 1.0 / std::sqrt(static_cast<double>(N)); }

double SystemParams::one_minus_gamma_sq() const noexcept {
    const double n = static_cast<double>(N);
    return (2.0 * n - 1.0) / (n * n);
}

double stationary_var_x(const SystemParams &params) {
    return (1.0 / static_cast<double>(params.N)) / params.one_minus_gamma_sq();
}

Trajectory simulate_with(const SystemParams &params, std::size_t horizon, double x0,
                         const std::function<double()> &draw_w,
                         const std::function<double()> &draw_v) {
    if (horizon == 0)
        throw std::invalid_argument("simulate: horizon must be >= 1");
    const double gamma = params.gamma();
    const double g = params.g();
    Trajectory traj;
    traj.x.resize(horizon);
    traj.y.resize(horizon);
    double x = x0;
    for (std::size_t t = 0; t < horizon; ++t) {
        x = gamma * x + g * draw_w();
        traj.x[t] = x;
        traj.y[t] = x + params.s_N * draw_v();
    }
    return traj;
}

Trajectory simulate(const SystemParams &params, std::size_t horizon, double x0,
                    std::uint64_t rng_seed) {
    if (horizon == 0)
        throw std::invalid_argument("simulate: horizon must be >= 1");
    Rng rng(rng_seed);
    auto draw_w = params.signal_noise.sampler();
    auto draw_v = params.obs_noise.sampler();
    const double gamma = params.gamma();
    const double g = params.g();
    Trajectory traj;
    traj.seed = rng_seed;
    traj.x.resize(horizon);
    traj.y.resize(horizon);
    double x = x0;
    for (std::size_t t = 0; t < horizon; ++t) {
        x = gamma * x + g * draw_w(rng);
        traj.x[t] = x;
        traj.y[t] = x + params.s_N * draw_v(rng);
    }
    return traj;
}

void write_trajectory_csv(std::ostream &os, const Trajectory &traj) {
    os << "t,x,y\n";
    for (std::size_t t = 0; t < traj.size(); ++t)
        os << fmt::format("{},{:.17g},{:.17g}\n", t + 1, traj.x[t], traj.y[t]);
}

} // namespace gfl
