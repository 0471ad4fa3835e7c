// Bootstrap particle filter used as a numerical stand-in for the optimal
// (conditional-mean) filter.
#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "gfl/state_space.hpp"
#include "gfl/statistics.hpp"

namespace gfl {

/// All particle weights underflowed at `step` (0-based).
class DegeneracyError : public std::runtime_error {
  public:
    DegeneracyError(const std::string &what, std::size_t step)
        : std::runtime_error(what), step_(step) {}
    std::size_t step() const noexcept { return step_; }

  private:
    std::size_t step_;
};

/// Too many replications degenerated for the MSE estimate to be trusted.
class UnreliableOracleError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct ParticleCloud {
    std::vector<double> positions;
    std::vector<double> weights; // normalized
    double ess = 0.0;
};

class BootstrapFilter {
  public:
    BootstrapFilter(const SystemParams &params, std::size_t n_particles, double resample_threshold,
                    std::uint64_t rng_seed, double x0 = 0.0);

    /// Propagate, reweight by the observation density, resample if ESS is low.
    /// Returns the weighted posterior mean.
    double step(double y);

    const ParticleCloud &cloud() const noexcept { return cloud_; }
    std::size_t steps() const noexcept { return t_; }
    std::size_t resamples() const noexcept { return resamples_; }

  private:
    void resample();

    SystemParams params_;
    double threshold_;
    Rng rng_;
    NoiseSampler draw_w_;
    ParticleCloud cloud_;
    std::vector<double> logw_;
    std::vector<double> scratch_;
    std::size_t t_ = 0;
    std::size_t resamples_ = 0;
};

inline constexpr std::size_t kMinParticles = 100;

/// Posterior-mean estimates for every step of `traj`.
std::vector<double> pf_run(const SystemParams &params, const Trajectory &traj,
                           std::size_t n_particles, double resample_threshold,
                           std::uint64_t rng_seed, double x0 = 0.0);

struct OracleOptions {
    std::size_t horizon = 0;
    std::size_t burn_in = 0;
    std::size_t n_particles = 1000;
    std::size_t replications = 2;
    double resample_threshold = 0.5;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
};

/// Seed of the particle stream for a trajectory simulated with traj_seed.
std::uint64_t oracle_seed(std::uint64_t traj_seed);

/// Fresh trajectories with seeds replication_seed(seed, i); replications whose
/// filter degenerates are dropped, more than 5% dropped is an error.
MseEstimate mse_star_estimate(const SystemParams &params, const OracleOptions &opts);

} // namespace gfl
