// Unit-variance noise families: density, score, score derivatives, Fisher
// information, sampling, and numeric checks of the regularity conditions the
// score-corrected filters rely on.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/random/normal_distribution.hpp>

namespace gfl {

using Rng = std::mt19937_64;

/// Raised when a numerical routine cannot reach its requested accuracy.
class NumericError : public std::runtime_error {
  public:
    NumericError(const std::string &what, double achieved)
        : std::runtime_error(what), achieved_(achieved) {}
    double achieved() const noexcept { return achieved_; }

  private:
    double achieved_;
};

enum class NoiseFamily { Gaussian, Logistic, StudentT, GaussianMixture };

std::string_view family_name(NoiseFamily family);

struct MixtureComponents {
    std::vector<double> weights;
    std::vector<double> means;
    std::vector<double> sigmas;
};

class NoiseSampler;

/**
 * @brief Zero-mean, unit-variance noise law with analytic density and score.
 *
 * The score convention follows the filter literature: score(x) = -h'(x)/h(x),
 * so a standard Gaussian has score(x) = x. Instances are immutable and cheap
 * to copy; they are safe to share between threads.
 */
class NoiseModel {
  public:
    static NoiseModel gaussian();
    static NoiseModel logistic();
    /// Student-t with integer dof > 4, rescaled to unit variance.
    static NoiseModel student_t(int dof);
    /// Arbitrary Gaussian mixture; centred and rescaled to unit variance.
    static NoiseModel gaussian_mixture(std::vector<double> weights,
                                       std::vector<double> means,
                                       std::vector<double> sigmas);
    /// Equal-weight mixture of N(-m, sigma^2) and N(m, sigma^2), rescaled.
    static NoiseModel symmetric_mixture(double separation, double sigma);

    NoiseFamily family() const noexcept { return family_; }
    std::string name() const;
    int dof() const noexcept { return dof_; }
    /// Logistic s, Student-t sigma, 1 for Gaussian, rescale factor for mixtures.
    double scale() const noexcept { return scale_; }
    const MixtureComponents &mixture() const noexcept { return mix_; }
    bool symmetric() const noexcept { return symmetric_; }

    double fisher_info() const noexcept { return fisher_; }
    /// Bound on sup|score''|; analytic for Gaussian and logistic.
    double score_sup_norm_2nd() const noexcept { return phi2_sup_; }
    /// True when the bound above is a numeric sup over a finite grid.
    bool score_bound_is_numeric() const noexcept { return phi2_numeric_; }
    std::optional<double> dissipativity_zeta() const noexcept { return zeta_; }

    double density(double x) const;
    double log_density(double x) const;
    /// -h'(x)/h(x). Throws std::domain_error for non-finite x.
    double score(double x) const;
    /// order 1 or 2; throws std::invalid_argument otherwise.
    double score_deriv(double x, int order) const;

    /// P(|v| > half_width).
    double tail_mass(double half_width) const;
    /// Smallest L (to 1%) with tail_mass(L) < mass.
    double tail_quantile(double mass) const;
    /// E[v^4] in closed form; nullopt when the moment is infinite.
    std::optional<double> fourth_moment() const;

    NoiseSampler sampler() const;
    std::vector<double> sample(std::size_t count, std::uint64_t seed) const;

  private:
    NoiseModel() = default;
    void finalize();

    double score_raw(double x) const noexcept;

    NoiseFamily family_ = NoiseFamily::Gaussian;
    int dof_ = 0;
    double scale_ = 1.0;
    double t_log_norm_ = 0.0;
    MixtureComponents mix_;
    bool symmetric_ = true;
    double fisher_ = 1.0;
    double phi2_sup_ = 0.0;
    bool phi2_numeric_ = false;
    std::optional<double> zeta_;
};

/// Stateful draw functor; owns the distribution objects for one RNG stream.
class NoiseSampler {
  public:
    explicit NoiseSampler(const NoiseModel &model);
    double operator()(Rng &rng);

  private:
    NoiseModel model_;
    boost::random::normal_distribution<double> normal_{0.0, 1.0}; // ziggurat
    std::chi_squared_distribution<double> chi2_;
};

/// Uniform on the open interval (0, 1) from 53 random bits.
double open_unit(Rng &rng);

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
};

/// Integrates f(x) h(x) over the real line: Gauss-Kronrod on (-L, L) with
/// L = tail_quantile(1e-12), plus the two semi-infinite tails.
QuadratureResult integrate_against_density(const NoiseModel &model,
                                           const std::function<double(double)> &f,
                                           double tolerance = 1e-10);

/// I(v) from the stored closed form when one exists, quadrature otherwise.
double fisher_information(const NoiseModel &model);
/// Always by quadrature of score^2 * h.
QuadratureResult fisher_information_quadrature(const NoiseModel &model);
/// E[v^k] by quadrature.
double quadrature_moment(const NoiseModel &model, int k);

struct DissipativityReport {
    double zeta_hat = 0.0;
    double growth_A = 0.0;
    double growth_B = 0.0;
    /// Restoring force E[score(v + y)] sign(y) never decreases with |y|.
    bool monotone = false;
    bool pass = false;
    std::vector<double> grid;
    std::vector<double> h_hat;
};

/**
 * @brief Monte Carlo check of strong dissipativity and linear score growth.
 *
 * Evaluates h(y) = E[score(v + y)] on the symmetric grid
 * {+-L k / n : k = 1..n} with common random numbers (symmetrised draws for
 * symmetric laws). zeta_hat is the largest zeta with h(y) y >= zeta y^2 on the
 * grid; (A, B) is an envelope |score(y)| <= A + B|y| anchored at the grid
 * edge. The check passes when zeta_hat > 0, the envelope is finite, and the
 * restoring force is monotone in |y| (a redescending score fails).
 */
DissipativityReport check_dissipativity(const NoiseModel &model, double grid_half_width,
                                        std::size_t grid_points, std::size_t mc_samples,
                                        std::uint64_t rng_seed);

struct PoincareStatus {
    bool finite = false;
    std::optional<double> constant;
    std::string_view reason;
};

/// Static table for the restricted Poincare constant of the signal noise.
PoincareStatus signal_noise_poincare(const NoiseModel &model);

} // namespace gfl
