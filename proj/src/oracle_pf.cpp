#include "gfl/oracle_pf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include <fmt/format.h>

#include "gfl/parallel.hpp"

namespace gfl {

BootstrapFilter::BootstrapFilter(const SystemParams &params, std::size_t n_particles,
                                 double resample_threshold, std::uint64_t rng_seed, double x0)
    : params_(params), threshold_(resample_threshold), rng_(rng_seed),
      draw_w_(params.signal_noise.sampler()) {
    if (n_particles < kMinParticles)
        throw std::invalid_argument(fmt::format("particle filter needs at least {} particles", kMinParticles));
    if (!(resample_threshold > 0.0 && resample_threshold <= 1.0))
        throw std::invalid_argument("resample threshold must lie in (0, 1]");
    const double n = static_cast<double>(n_particles);
    cloud_.positions.assign(n_particles, x0);
    cloud_.weights.assign(n_particles, 1.0 / n);
    cloud_.ess = n;
    logw_.assign(n_particles, -std::log(n));
    scratch_.resize(n_particles);
}

double BootstrapFilter::step(double y) {
    const std::size_t n = cloud_.positions.size();
    const double gamma = params_.gamma();
    const double g = params_.g();
    const double s = params_.s_N;
    const double log_s = std::log(s);
    const auto &obs = params_.obs_noise;

    // logw_ carries the normalized log-weights between steps.
    double max_lw = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        double &p = cloud_.positions[i];
        p = gamma * p + g * draw_w_(rng_);
        logw_[i] += obs.log_density((y - p) / s) - log_s;
        max_lw = std::max(max_lw, logw_[i]);
    }
    if (!std::isfinite(max_lw))
        throw DegeneracyError(fmt::format("particle weights underflowed at step {}", t_), t_);

    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cloud_.weights[i] = std::exp(logw_[i] - max_lw);
        total += cloud_.weights[i];
    }
    const double log_total = std::log(total) + max_lw;
    double sumsq = 0.0, mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cloud_.weights[i] /= total;
        logw_[i] -= log_total;
        sumsq += cloud_.weights[i] * cloud_.weights[i];
        mean += cloud_.weights[i] * cloud_.positions[i];
    }
    cloud_.ess = 1.0 / sumsq;
    ++t_;
    if (cloud_.ess < threshold_ * static_cast<double>(n))
        resample();
    return mean;
}

void BootstrapFilter::resample() {
    const std::size_t n = cloud_.positions.size();
    const double step = 1.0 / static_cast<double>(n);
    double u = open_unit(rng_) * step;
    double cum = cloud_.weights[0];
    std::size_t j = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (u > cum && j + 1 < n)
            cum += cloud_.weights[++j];
        scratch_[i] = cloud_.positions[j];
        u += step;
    }
    cloud_.positions.swap(scratch_);
    std::fill(cloud_.weights.begin(), cloud_.weights.end(), step);
    std::fill(logw_.begin(), logw_.end(), -std::log(static_cast<double>(n)));
    cloud_.ess = static_cast<double>(n);
    ++resamples_;
}

std::vector<double> pf_run(const SystemParams &params, const Trajectory &traj,
                           std::size_t n_particles, double resample_threshold,
                           std::uint64_t rng_seed, double x0) {
    BootstrapFilter pf(params, n_particles, resample_threshold, rng_seed, x0);
    std::vector<double> out(traj.size());
    for (std::size_t t = 0; t < traj.size(); ++t)
        out[t] = pf.step(traj.y[t]);
    return out;
}

std::uint64_t oracle_seed(std::uint64_t traj_seed) { return splitmix64(traj_seed ^ 0x6f7261636c65ULL); }

MseEstimate mse_star_estimate(const SystemParams &params, const OracleOptions &opts) {
    if (opts.burn_in >= opts.horizon)
        throw std::invalid_argument("mse_star_estimate: burn_in must be smaller than horizon");
    if (opts.replications < 2)
        throw std::invalid_argument("mse_star_estimate: need at least two replications");

    struct Rep {
        std::optional<double> mse, bias;
    };
    std::vector<Rep> reps(opts.replications);
    parallel_for(opts.replications, opts.threads, [&](std::size_t i) {
        const auto seed = replication_seed(opts.seed, i);
        const auto traj = simulate(params, opts.horizon, 0.0, seed);
        try {
            const auto est = pf_run(params, traj, opts.n_particles, opts.resample_threshold, oracle_seed(seed));
            double se = 0.0, e = 0.0;
            for (std::size_t t = opts.burn_in; t < opts.horizon; ++t) {
                const double d = est[t] - traj.x[t];
                se += d * d;
                e += d;
            }
            const double m = static_cast<double>(opts.horizon - opts.burn_in);
            reps[i] = {se / m, e / m};
        } catch (const DegeneracyError &) {
            reps[i] = {};
        }
    });

    std::vector<double> mse, bias;
    for (const auto &r : reps)
        if (r.mse) {
            mse.push_back(*r.mse);
            bias.push_back(*r.bias);
        }
    const std::size_t failed = opts.replications - mse.size();
    if (static_cast<double>(failed) > 0.05 * static_cast<double>(opts.replications) || mse.size() < 2)
        throw UnreliableOracleError(fmt::format("particle filter degenerated in {} of {} replications",
                                                failed, opts.replications));
    return aggregate("oracle", std::move(mse), std::move(bias));
}

} // namespace gfl
