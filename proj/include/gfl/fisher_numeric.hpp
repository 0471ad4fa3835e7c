// FFT-grid densities of weighted noise sums sum_i a_i w_i, their Fisher
// information, and the standardized-information decay delta(tau).
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gfl/noise_models.hpp"

namespace gfl {

/// The requested grid cannot hold the density to the required tail accuracy.
class ResolutionError : public std::runtime_error {
  public:
    ResolutionError(const std::string &what, double required_half_width)
        : std::runtime_error(what), required_(required_half_width) {}
    double required_half_width() const noexcept { return required_; }

  private:
    double required_;
};

inline constexpr std::size_t kMaxAutoPoints = std::size_t{1} << 24;

struct GridSpec {
    /// With half_width = 0 this is a minimum: it is doubled (up to
    /// kMaxAutoPoints) until dx <= 0.05 of the smallest weight.
    std::size_t n_points = std::size_t{1} << 14;
    /// 0 selects max(12 sd, point where every scaled component density < 1e-14).
    double half_width = 0.0;
};

/// Periodic grid x_j = -L + j dx, dx = 2L/n, j = 0..n-1.
struct DensityGrid {
    double half_width = 0.0;
    std::size_t n_points = 0;
    double dx = 0.0;
    std::vector<double> values;

    double x(std::size_t j) const { return -half_width + static_cast<double>(j) * dx; }
};

inline constexpr double kDensityFloor = 1e-300;
inline constexpr double kTailMassLimit = 1e-10;

/// Density of sum_i weights_i w_i, w_i iid from `model`, by sampling each
/// scaled density on the grid and multiplying spectra (FFTW).
DensityGrid density_of_weighted_sum(const NoiseModel &model, std::span<const double> weights,
                                    GridSpec spec = {});

double grid_mass(const DensityGrid &grid);
double grid_mean(const DensityGrid &grid);
double grid_variance(const DensityGrid &grid);

struct FisherReport {
    double fisher = 0.0;
    /// Same functional on the every-other-point grid (2 dx).
    double fisher_coarse = 0.0;
    /// Probability mass sitting in cells treated as zero.
    double floor_mass = 0.0;
    bool floor_warning = false; // floor_mass > 1%
};

/**
 * @brief Discrete Fisher functional sum (f')^2/f dx with fourth-order central
 * differences on the periodic grid.
 *
 * Cells below the FFT round-off level (1e-13 of the peak) or at the 1e-300
 * floor contribute zero; otherwise round-off in the far tails would dominate.
 */
FisherReport fisher_report(const DensityGrid &grid);
double fisher_of_grid(const DensityGrid &grid);

struct InfoReport {
    std::size_t tau = 0;
    double variance = 0.0;
    double fisher = 0.0;
    double product_minus_one = 0.0; // delta = I Var - 1
};

struct CltRateResult {
    std::vector<InfoReport> reports;
    /// Least-squares slope of log delta against log tau; NaN if any delta <= 0.
    double slope = 0.0;
};

/// Weights gamma^{s-1}/sqrt(N), s = 1..tau, gamma = 1 - 1/N.
std::vector<double> batch_weights(std::int64_t N, std::size_t tau);

CltRateResult clt_rate_experiment(const NoiseModel &model, std::int64_t N,
                                  std::span<const std::size_t> taus, GridSpec spec = {},
                                  std::size_t threads = 1);

/// Least-squares slope of log y against log x.
double loglog_slope(std::span<const double> x, std::span<const double> y);

} // namespace gfl
