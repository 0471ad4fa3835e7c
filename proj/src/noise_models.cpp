#include "gfl/noise_models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace gfl {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;
constexpr double kLogSqrt2Pi = 0.9189385332046728;

double sech2_from_tanh(double t) { return 1.0 - t * t; }

struct MixtureTerms {
    double phi = 0.0;
    double dphi = 0.0;
    double d2phi = 0.0;
};

// Responsibility-weighted score terms for a Gaussian mixture. With
// a_i = (x - mu_i)/sigma_i^2 and b_i = 1/sigma_i^2:
//   phi   = sum r_i a_i
//   phi'  = sum r_i b_i - sum r_i a_i^2 + phi^2
//   phi'' = sum r_i b_i (phi - a_i) - sum r_i (phi - a_i) a_i^2
//           - 2 sum r_i a_i b_i + 2 phi phi'
MixtureTerms mixture_terms(const MixtureComponents &mix, double x, int order) {
    const std::size_t k = mix.weights.size();
    double lmax = -std::numeric_limits<double>::infinity();
    std::vector<double> logs(k);
    for (std::size_t i = 0; i < k; ++i) {
        const double z = (x - mix.means[i]) / mix.sigmas[i];
        logs[i] = std::log(mix.weights[i]) - std::log(mix.sigmas[i]) - 0.5 * z * z;
        lmax = std::max(lmax, logs[i]);
    }
    double total = 0.0;
    for (auto &l : logs) {
        l = std::exp(l - lmax);
        total += l;
    }
    MixtureTerms out;
    double rb = 0.0, ra2 = 0.0, rab = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double r = logs[i] / total;
        const double b = 1.0 / (mix.sigmas[i] * mix.sigmas[i]);
        const double a = (x - mix.means[i]) * b;
        out.phi += r * a;
        rb += r * b;
        ra2 += r * a * a;
        rab += r * a * b;
    }
    if (order == 0)
        return out;
    out.dphi = rb - ra2 + out.phi * out.phi;
    if (order == 1)
        return out;
    double t1 = 0.0, t2 = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double r = logs[i] / total;
        const double b = 1.0 / (mix.sigmas[i] * mix.sigmas[i]);
        const double a = (x - mix.means[i]) * b;
        t1 += r * b * (out.phi - a);
        t2 += r * (out.phi - a) * a * a;
    }
    out.d2phi = t1 - t2 - 2.0 * rab + 2.0 * out.phi * out.dphi;
    return out;
}

double normal_upper(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

} // namespace

std::string_view family_name(NoiseFamily family) {
    switch (family) {
    case NoiseFamily::Gaussian:
        return "gaussian";
    case NoiseFamily::Logistic:
        return "logistic";
    case NoiseFamily::StudentT:
        return "student_t";
    case NoiseFamily::GaussianMixture:
        return "gaussian_mixture";
    }
    return "unknown";
}

NoiseModel NoiseModel::gaussian() {
    NoiseModel m;
    m.family_ = NoiseFamily::Gaussian;
    m.finalize();
    return m;
}

NoiseModel NoiseModel::logistic() {
    NoiseModel m;
    m.family_ = NoiseFamily::Logistic;
    m.scale_ = std::numbers::sqrt3 / std::numbers::pi;
    m.finalize();
    return m;
}

NoiseModel NoiseModel::student_t(int dof) {
    if (dof <= 4)
        throw std::invalid_argument("student_t: dof must be an integer > 4 (finite fourth moment)");
    NoiseModel m;
    m.family_ = NoiseFamily::StudentT;
    m.dof_ = dof;
    const double nu = dof;
    m.scale_ = std::sqrt((nu - 2.0) / nu);
    m.t_log_norm_ = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                    0.5 * std::log(nu * std::numbers::pi) - std::log(m.scale_);
    m.finalize();
    return m;
}

NoiseModel NoiseModel::gaussian_mixture(std::vector<double> weights, std::vector<double> means,
                                        std::vector<double> sigmas) {
    if (weights.empty() || weights.size() != means.size() || weights.size() != sigmas.size())
        throw std::invalid_argument("gaussian_mixture: weights, means, sigmas must be non-empty and equal length");
    double wsum = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (!(weights[i] > 0.0) || !(sigmas[i] > 0.0) || !std::isfinite(means[i]))
            throw std::invalid_argument("gaussian_mixture: weights and sigmas must be positive, means finite");
        wsum += weights[i];
    }
    double mean = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        weights[i] /= wsum;
        mean += weights[i] * means[i];
    }
    double var = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i)
        var += weights[i] * (sigmas[i] * sigmas[i] + (means[i] - mean) * (means[i] - mean));
    const double sd = std::sqrt(var);
    for (std::size_t i = 0; i < weights.size(); ++i) {
        means[i] = (means[i] - mean) / sd;
        sigmas[i] /= sd;
    }

    NoiseModel m;
    m.family_ = NoiseFamily::GaussianMixture;
    m.scale_ = 1.0 / sd;
    m.mix_ = {std::move(weights), std::move(means), std::move(sigmas)};

    // Symmetric iff every component has a mirror partner.
    const auto &mx = m.mix_;
    m.symmetric_ = true;
    for (std::size_t i = 0; i < mx.weights.size() && m.symmetric_; ++i) {
        bool found = false;
        for (std::size_t j = 0; j < mx.weights.size() && !found; ++j)
            found = std::abs(mx.weights[i] - mx.weights[j]) < 1e-12 &&
                    std::abs(mx.means[i] + mx.means[j]) < 1e-12 &&
                    std::abs(mx.sigmas[i] - mx.sigmas[j]) < 1e-12;
        m.symmetric_ = found;
    }
    m.finalize();
    return m;
}

NoiseModel NoiseModel::symmetric_mixture(double separation, double sigma) {
    return gaussian_mixture({0.5, 0.5}, {-separation, separation}, {sigma, sigma});
}

void NoiseModel::finalize() {
    switch (family_) {
    case NoiseFamily::Gaussian:
        fisher_ = 1.0;
        phi2_sup_ = 0.0;
        zeta_ = 1.0;
        break;
    case NoiseFamily::Logistic:
        fisher_ = std::numbers::pi * std::numbers::pi / 9.0;
        // sup sech^2(u) tanh(u) = 2/(3 sqrt 3), so sup|phi''| = pi^3/27.
        phi2_sup_ = std::pow(std::numbers::pi, 3) / 27.0;
        break;
    case NoiseFamily::StudentT: {
        const double nu = dof_;
        fisher_ = (nu + 1.0) / (nu + 3.0) * nu / (nu - 2.0);
        break;
    }
    case NoiseFamily::GaussianMixture:
        fisher_ = fisher_information_quadrature(*this).value;
        break;
    }
    if (family_ == NoiseFamily::StudentT || family_ == NoiseFamily::GaussianMixture) {
        const double half = 40.0;
        const int n = 200001;
        double sup = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x = -half + 2.0 * half * i / (n - 1);
            sup = std::max(sup, std::abs(score_deriv(x, 2)));
        }
        phi2_sup_ = sup;
        phi2_numeric_ = true;
    }
}

std::string NoiseModel::name() const {
    std::ostringstream os;
    os << family_name(family_);
    if (family_ == NoiseFamily::StudentT)
        os << "(" << dof_ << ")";
    if (family_ == NoiseFamily::GaussianMixture)
        os << "(" << mix_.weights.size() << ")";
    return os.str();
}

double NoiseModel::log_density(double x) const {
    switch (family_) {
    case NoiseFamily::Gaussian:
        return -0.5 * x * x - kLogSqrt2Pi;
    case NoiseFamily::Logistic: {
        const double z = std::abs(x) / scale_;
        return -z - 2.0 * std::log1p(std::exp(-z)) - std::log(scale_);
    }
    case NoiseFamily::StudentT: {
        const double nu = dof_;
        const double a = nu - 2.0;
        return t_log_norm_ - 0.5 * (nu + 1.0) * std::log1p(x * x / a);
    }
    case NoiseFamily::GaussianMixture: {
        double lmax = -std::numeric_limits<double>::infinity();
        const std::size_t k = mix_.weights.size();
        std::vector<double> logs(k);
        for (std::size_t i = 0; i < k; ++i) {
            const double z = (x - mix_.means[i]) / mix_.sigmas[i];
            logs[i] = std::log(mix_.weights[i]) - std::log(mix_.sigmas[i]) - 0.5 * z * z;
            lmax = std::max(lmax, logs[i]);
        }
        double total = 0.0;
        for (double l : logs)
            total += std::exp(l - lmax);
        return lmax + std::log(total) - kLogSqrt2Pi;
    }
    }
    return 0.0;
}

double NoiseModel::density(double x) const {
    if (family_ == NoiseFamily::Gaussian)
        return kInvSqrt2Pi * std::exp(-0.5 * x * x);
    return std::exp(log_density(x));
}

double NoiseModel::score_raw(double x) const noexcept {
    switch (family_) {
    case NoiseFamily::Gaussian:
        return x;
    case NoiseFamily::Logistic:
        return std::tanh(0.5 * x / scale_) / scale_;
    case NoiseFamily::StudentT: {
        const double nu = dof_;
        return (nu + 1.0) * x / (nu - 2.0 + x * x);
    }
    case NoiseFamily::GaussianMixture:
        return mixture_terms(mix_, x, 0).phi;
    }
    return 0.0;
}

double NoiseModel::score(double x) const {
    if (!std::isfinite(x))
        throw std::domain_error("score: non-finite argument");
    return score_raw(x);
}

double NoiseModel::score_deriv(double x, int order) const {
    if (order != 1 && order != 2)
        throw std::invalid_argument("score_deriv: order must be 1 or 2");
    if (!std::isfinite(x))
        throw std::domain_error("score_deriv: non-finite argument");
    switch (family_) {
    case NoiseFamily::Gaussian:
        return order == 1 ? 1.0 : 0.0;
    case NoiseFamily::Logistic: {
        const double s = scale_;
        const double t = std::tanh(0.5 * x / s);
        const double sech2 = sech2_from_tanh(t);
        return order == 1 ? sech2 / (2.0 * s * s) : -sech2 * t / (2.0 * s * s * s);
    }
    case NoiseFamily::StudentT: {
        const double nu = dof_;
        const double a = nu - 2.0;
        const double d = a + x * x;
        if (order == 1)
            return (nu + 1.0) * (a - x * x) / (d * d);
        return 2.0 * (nu + 1.0) * x * (x * x - 3.0 * a) / (d * d * d);
    }
    case NoiseFamily::GaussianMixture: {
        const auto t = mixture_terms(mix_, x, order);
        return order == 1 ? t.dphi : t.d2phi;
    }
    }
    return 0.0;
}

double NoiseModel::tail_mass(double half_width) const {
    const double L = std::abs(half_width);
    switch (family_) {
    case NoiseFamily::Gaussian:
        return std::erfc(L / std::numbers::sqrt2);
    case NoiseFamily::Logistic:
        return 2.0 / (1.0 + std::exp(L / scale_));
    case NoiseFamily::StudentT: {
        const boost::math::students_t_distribution<double> t(dof_);
        return 2.0 * boost::math::cdf(boost::math::complement(t, L / scale_));
    }
    case NoiseFamily::GaussianMixture: {
        double m = 0.0;
        for (std::size_t i = 0; i < mix_.weights.size(); ++i)
            m += mix_.weights[i] * (normal_upper((L - mix_.means[i]) / mix_.sigmas[i]) +
                                    normal_upper((L + mix_.means[i]) / mix_.sigmas[i]));
        return m;
    }
    }
    return 0.0;
}

double NoiseModel::tail_quantile(double mass) const {
    double hi = 1.0;
    while (tail_mass(hi) >= mass)
        hi *= 2.0;
    double lo = hi / 2.0;
    while (hi - lo > 0.01 * lo) {
        const double mid = 0.5 * (lo + hi);
        (tail_mass(mid) < mass ? hi : lo) = mid;
    }
    return hi;
}

std::optional<double> NoiseModel::fourth_moment() const {
    switch (family_) {
    case NoiseFamily::Gaussian:
        return 3.0;
    case NoiseFamily::Logistic:
        return 4.2;
    case NoiseFamily::StudentT:
        return 3.0 + 6.0 / (dof_ - 4.0);
    case NoiseFamily::GaussianMixture: {
        double m4 = 0.0;
        for (std::size_t i = 0; i < mix_.weights.size(); ++i) {
            const double mu = mix_.means[i], sg = mix_.sigmas[i];
            m4 += mix_.weights[i] * (mu * mu * mu * mu + 6.0 * mu * mu * sg * sg + 3.0 * sg * sg * sg * sg);
        }
        return m4;
    }
    }
    return std::nullopt;
}

NoiseSampler NoiseModel::sampler() const { return NoiseSampler(*this); }

std::vector<double> NoiseModel::sample(std::size_t count, std::uint64_t seed) const {
    Rng rng(seed);
    NoiseSampler draw(*this);
    std::vector<double> out(count);
    for (auto &v : out)
        v = draw(rng);
    return out;
}

double open_unit(Rng &rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

NoiseSampler::NoiseSampler(const NoiseModel &model)
    : model_(model), chi2_(model.family() == NoiseFamily::StudentT ? model.dof() : 1) {}

double NoiseSampler::operator()(Rng &rng) {
    switch (model_.family()) {
    case NoiseFamily::Gaussian:
        return normal_(rng);
    case NoiseFamily::Logistic: {
        const double u = open_unit(rng);
        return model_.scale() * std::log(u / (1.0 - u));
    }
    case NoiseFamily::StudentT: {
        const double z = normal_(rng);
        const double c = chi2_(rng);
        return model_.scale() * z / std::sqrt(c / model_.dof());
    }
    case NoiseFamily::GaussianMixture: {
        const auto &mix = model_.mixture();
        double u = open_unit(rng);
        std::size_t i = 0;
        while (i + 1 < mix.weights.size() && u > mix.weights[i]) {
            u -= mix.weights[i];
            ++i;
        }
        return mix.means[i] + mix.sigmas[i] * normal_(rng);
    }
    }
    return 0.0;
}

QuadratureResult integrate_against_density(const NoiseModel &model,
                                           const std::function<double(double)> &f,
                                           double tolerance) {
    using boost::math::quadrature::gauss_kronrod;
    const double L = model.tail_quantile(1e-12);
    const double inner = std::min(L, 10.0);
    auto integrand = [&](double x) { return f(x) * model.density(x); };
    const double inf = std::numeric_limits<double>::infinity();

    std::vector<std::pair<double, double>> pieces;
    if (inner < L)
        pieces = {{-inf, -L}, {-L, -inner}, {-inner, inner}, {inner, L}, {L, inf}};
    else
        pieces = {{-inf, -L}, {-L, L}, {L, inf}};

    QuadratureResult out;
    double l1 = 0.0;
    for (const auto &[a, b] : pieces) {
        double err = 0.0, piece_l1 = 0.0;
        out.value += gauss_kronrod<double, 61>::integrate(integrand, a, b, 15, tolerance, &err, &piece_l1);
        out.error += err;
        l1 += piece_l1;
    }
    if (out.error > std::max(tolerance * l1, 1e-15)) {
        std::ostringstream os;
        os << "quadrature did not converge for " << model.name() << ": achieved " << out.error
           << " vs requested " << tolerance * l1;
        throw NumericError(os.str(), out.error);
    }
    return out;
}

QuadratureResult fisher_information_quadrature(const NoiseModel &model) {
    return integrate_against_density(model, [&](double x) {
        const double p = model.score(x);
        return p * p;
    });
}

double fisher_information(const NoiseModel &model) {
    // Mixture information is itself computed by quadrature at construction.
    return model.fisher_info();
}

double quadrature_moment(const NoiseModel &model, int k) {
    return integrate_against_density(model, [k](double x) { return std::pow(x, k); }).value;
}

DissipativityReport check_dissipativity(const NoiseModel &model, double grid_half_width,
                                        std::size_t grid_points, std::size_t mc_samples,
                                        std::uint64_t rng_seed) {
    if (grid_points == 0)
        throw std::invalid_argument("check_dissipativity: grid_points must be positive");
    if (!(grid_half_width > 0.0))
        throw std::invalid_argument("check_dissipativity: grid_half_width must be positive");
    if (mc_samples == 0)
        throw std::invalid_argument("check_dissipativity: mc_samples must be positive");

    auto draws = model.sample(mc_samples, rng_seed);
    if (model.symmetric()) {
        const std::size_t n = draws.size();
        draws.resize(2 * n);
        for (std::size_t i = 0; i < n; ++i)
            draws[n + i] = -draws[i];
    }

    const std::size_t n = grid_points;
    DissipativityReport rep;
    rep.grid.resize(2 * n);
    for (std::size_t k = 0; k < n; ++k) {
        const double y = grid_half_width * static_cast<double>(k + 1) / static_cast<double>(n);
        rep.grid[n - 1 - k] = -y;
        rep.grid[n + k] = y;
    }
    rep.h_hat.resize(rep.grid.size());
    for (std::size_t j = 0; j < rep.grid.size(); ++j) {
        double acc = 0.0;
        for (double v : draws)
            acc += model.score(v + rep.grid[j]);
        rep.h_hat[j] = acc / static_cast<double>(draws.size());
    }

    rep.zeta_hat = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < rep.grid.size(); ++j)
        rep.zeta_hat = std::min(rep.zeta_hat, rep.h_hat[j] / rep.grid[j]);

    constexpr double kMonotoneTol = 1e-12;
    rep.monotone = true;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        // positive side walks outward from index n; negative side from n-1.
        if (rep.h_hat[n + k + 1] < rep.h_hat[n + k] - kMonotoneTol)
            rep.monotone = false;
        if (-rep.h_hat[n - 2 - k] < -rep.h_hat[n - 1 - k] - kMonotoneTol)
            rep.monotone = false;
    }

    const double L = grid_half_width;
    rep.growth_B = std::max(std::abs(model.score(L)), std::abs(model.score(-L))) / L;
    rep.growth_A = std::abs(model.score(0.0));
    for (double y : rep.grid)
        rep.growth_A = std::max(rep.growth_A, std::abs(model.score(y)) - rep.growth_B * std::abs(y));

    const bool growth_ok = std::isfinite(rep.growth_A) && std::isfinite(rep.growth_B);
    rep.pass = rep.zeta_hat > 0.0 && rep.monotone && growth_ok;
    return rep;
}

PoincareStatus signal_noise_poincare(const NoiseModel &model) {
    switch (model.family()) {
    case NoiseFamily::Gaussian:
        return {true, 0.5, "Gaussian: restricted constant is exactly 1/2"};
    case NoiseFamily::Logistic:
        return {true, std::nullopt, "log-concave density"};
    case NoiseFamily::GaussianMixture:
        return {true, std::nullopt, "finite Gaussian mixture with bounded component spread"};
    case NoiseFamily::StudentT:
        return {false, std::nullopt, "finite constant requires all moments; Student-t has only dof-1"};
    }
    return {};
}

} // namespace gfl
