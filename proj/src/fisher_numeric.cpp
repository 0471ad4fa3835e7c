#include "gfl/fisher_numeric.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <mutex>
#include <numeric>

#include <fftw3.h>
#include <fmt/format.h>

#include "gfl/parallel.hpp"

namespace gfl {

namespace {

// FFTW planning is not thread-safe; execution on distinct plans is.
std::mutex &fftw_plan_mutex() {
    static std::mutex mu;
    return mu;
}

struct FftwBuffers {
    std::size_t n;
    double *real;
    fftw_complex *spec;
    fftw_plan forward;
    fftw_plan backward;

    explicit FftwBuffers(std::size_t n_points) : n(n_points) {
        real = fftw_alloc_real(n);
        spec = fftw_alloc_complex(n / 2 + 1);
        std::lock_guard lock(fftw_plan_mutex());
        const int ni = static_cast<int>(n);
        forward = fftw_plan_dft_r2c_1d(ni, real, spec, FFTW_ESTIMATE);
        backward = fftw_plan_dft_c2r_1d(ni, spec, real, FFTW_ESTIMATE);
    }
    ~FftwBuffers() {
        {
            std::lock_guard lock(fftw_plan_mutex());
            fftw_destroy_plan(forward);
            fftw_destroy_plan(backward);
        }
        fftw_free(real);
        fftw_free(spec);
    }
    FftwBuffers(const FftwBuffers &) = delete;
    FftwBuffers &operator=(const FftwBuffers &) = delete;
};

// Smallest u (to ~0.1%) with h(+-v) < level for all sampled v >= u.
double density_cutoff(const NoiseModel &model, double level) {
    auto above = [&](double u) {
        return model.density(u) >= level || model.density(-u) >= level;
    };
    double hi = 1.0;
    while (above(hi) || above(1.5 * hi) || above(2.0 * hi)) {
        hi *= 1.5;
        if (hi > 1e12)
            throw NumericError("density_cutoff: density does not decay", hi);
    }
    double lo = 0.0;
    while (hi - lo > 1e-3 * hi) {
        const double mid = 0.5 * (lo + hi);
        (above(mid) ? lo : hi) = mid;
    }
    return hi;
}

bool is_power_of_two(std::size_t n) { return n >= 4 && (n & (n - 1)) == 0; }

} // namespace

DensityGrid density_of_weighted_sum(const NoiseModel &model, std::span<const double> weights,
                                    GridSpec spec) {
    if (weights.empty())
        throw std::invalid_argument("density_of_weighted_sum: weights must be nonempty");
    for (double a : weights)
        if (!(a != 0.0) || !std::isfinite(a))
            throw std::invalid_argument("density_of_weighted_sum: weights must be finite and nonzero");
    if (!is_power_of_two(spec.n_points))
        throw std::invalid_argument("density_of_weighted_sum: n_points must be a power of two >= 4");

    std::vector<double> w(weights.begin(), weights.end());
    std::stable_sort(w.begin(), w.end(), [](double a, double b) { return std::abs(a) > std::abs(b); });
    double var_sum = 0.0;
    for (double a : w)
        var_sum += a * a;
    const double a_max = std::abs(w.front());
    const double a_min = std::abs(w.back());

    double L = spec.half_width;
    if (L == 0.0) {
        const double u14 = density_cutoff(model, 1e-14 * a_min);
        L = std::max(12.0 * std::sqrt(var_sum), a_max * u14);
    }
    if (!(L > 0.0))
        throw std::invalid_argument("density_of_weighted_sum: half_width must be positive");

    // Every component must fit on the grid on its own.
    const double per_component = model.tail_quantile(kTailMassLimit);
    if (model.tail_mass(L / a_max) >= kTailMassLimit)
        throw ResolutionError(fmt::format("grid half-width {:.6g} leaves tail mass >= {:g}; need L >= {:.6g}",
                                          L, kTailMassLimit, a_max * per_component),
                              a_max * per_component);

    // With an automatic half-width, heavy tails can make L wide enough that
    // the requested count is too coarse; double it until the spacing fits.
    std::size_t n = spec.n_points;
    if (spec.half_width == 0.0)
        while (2.0 * L / static_cast<double>(n) > 0.05 * a_min && n < kMaxAutoPoints)
            n *= 2;
    const double dx = 2.0 * L / static_cast<double>(n);
    if (dx > 0.05 * a_min)
        throw ResolutionError(fmt::format("grid spacing {:.6g} too coarse for weight {:.6g}; "
                                          "need n_points >= {}",
                                          dx, a_min, static_cast<std::size_t>(std::ceil(40.0 * L / a_min))),
                              L);

    FftwBuffers fft(n);
    const std::size_t nc = n / 2 + 1;
    std::vector<std::complex<double>> acc(nc, {1.0, 0.0});

    for (double a : w) {
        // Sample in wrapped order: index j holds x = j dx (j < n/2) or (j - n) dx.
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double xj = (j < n / 2 ? static_cast<double>(j) : static_cast<double>(j) - static_cast<double>(n)) * dx;
            const double v = model.density(xj / a) / std::abs(a);
            fft.real[j] = v;
            sum += v;
        }
        const double norm = 1.0 / (sum * dx);
        for (std::size_t j = 0; j < n; ++j)
            fft.real[j] *= norm;
        fftw_execute(fft.forward);
        for (std::size_t k = 0; k < nc; ++k)
            acc[k] *= std::complex<double>(fft.spec[k][0], fft.spec[k][1]) * dx;
    }
    for (std::size_t k = 0; k < nc; ++k) {
        fft.spec[k][0] = acc[k].real();
        fft.spec[k][1] = acc[k].imag();
    }
    fftw_execute(fft.backward);

    DensityGrid grid;
    grid.half_width = L;
    grid.n_points = n;
    grid.dx = dx;
    grid.values.resize(n);
    // Undo the wrap and the missing 1/n of the unnormalized inverse transform;
    // the extra factor 1/dx turns the discrete convolution back into a density.
    const double scale = 1.0 / (static_cast<double>(n) * dx);
    for (std::size_t j = 0; j < n; ++j)
        grid.values[j] = fft.real[(j + n / 2) % n] * scale;

    double mass = 0.0;
    for (double &v : grid.values) {
        v = std::max(v, 0.0);
        mass += v;
    }
    mass *= dx;
    for (double &v : grid.values)
        v /= mass;

    // Aliased overflow of the sum shows up as mass near the grid edge.
    double edge = 0.0;
    for (std::size_t j = 0; j < n; ++j)
        if (std::abs(grid.x(j)) > 0.9 * L)
            edge += grid.values[j] * dx;
    if (edge >= kTailMassLimit)
        throw ResolutionError(fmt::format("density of the sum reaches the grid edge (mass {:.3g} beyond "
                                          "0.9 L); need L >= {:.6g}",
                                          edge, 1.5 * L),
                              1.5 * L);
    return grid;
}

double grid_mass(const DensityGrid &grid) {
    return std::accumulate(grid.values.begin(), grid.values.end(), 0.0) * grid.dx;
}

double grid_mean(const DensityGrid &grid) {
    double m = 0.0;
    for (std::size_t j = 0; j < grid.n_points; ++j)
        m += grid.x(j) * grid.values[j];
    return m * grid.dx / grid_mass(grid);
}

double grid_variance(const DensityGrid &grid) {
    const double mu = grid_mean(grid);
    double v = 0.0;
    for (std::size_t j = 0; j < grid.n_points; ++j) {
        const double d = grid.x(j) - mu;
        v += d * d * grid.values[j];
    }
    return v * grid.dx / grid_mass(grid);
}

namespace {

struct FisherSum {
    double fisher;
    double floor_mass;
};

FisherSum fisher_sum(const std::vector<double> &f, double dx) {
    const std::size_t n = f.size();
    const double peak = *std::max_element(f.begin(), f.end());
    const double cut = std::max(1e-13 * peak, kDensityFloor);
    double total = 0.0, floor_mass = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (f[j] <= cut) {
            floor_mass += f[j] * dx;
            continue;
        }
        const double d = (f[(j + n - 2) % n] - 8.0 * f[(j + n - 1) % n] + 8.0 * f[(j + 1) % n] -
                          f[(j + 2) % n]) /
                         (12.0 * dx);
        total += d * d / f[j];
    }
    return {total * dx, floor_mass};
}

} // namespace

FisherReport fisher_report(const DensityGrid &grid) {
    if (grid.values.size() != grid.n_points || grid.n_points < 8)
        throw std::invalid_argument("fisher_of_grid: malformed grid");
    const double mass = grid_mass(grid);
    if (std::abs(mass - 1.0) > 1e-6)
        throw std::invalid_argument("fisher_of_grid: grid is not normalized");
    const auto fine = fisher_sum(grid.values, grid.dx);

    std::vector<double> coarse(grid.n_points / 2);
    for (std::size_t j = 0; j < coarse.size(); ++j)
        coarse[j] = grid.values[2 * j];
    const auto rough = fisher_sum(coarse, 2.0 * grid.dx);

    FisherReport r;
    r.fisher = fine.fisher;
    r.fisher_coarse = rough.fisher;
    r.floor_mass = fine.floor_mass;
    r.floor_warning = fine.floor_mass > 0.01;
    return r;
}

double fisher_of_grid(const DensityGrid &grid) { return fisher_report(grid).fisher; }

std::vector<double> batch_weights(std::int64_t N, std::size_t tau) {
    if (N < 2)
        throw std::invalid_argument("batch_weights: N must be >= 2");
    const double gamma = 1.0 - 1.0 / static_cast<double>(N);
    const double g = 1.0 / std::sqrt(static_cast<double>(N));
    std::vector<double> w(tau);
    double p = 1.0;
    for (std::size_t s = 0; s < tau; ++s) {
        w[s] = p * g;
        p *= gamma;
    }
    return w;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("loglog_slope: need at least two paired points");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0))
            return std::numeric_limits<double>::quiet_NaN();
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

CltRateResult clt_rate_experiment(const NoiseModel &model, std::int64_t N,
                                  std::span<const std::size_t> taus, GridSpec spec,
                                  std::size_t threads) {
    if (taus.empty())
        throw std::invalid_argument("clt_rate_experiment: tau list is empty");
    for (std::size_t i = 0; i < taus.size(); ++i) {
        if (taus[i] == 0 || static_cast<std::int64_t>(taus[i]) > N)
            throw std::invalid_argument("clt_rate_experiment: each tau must lie in [1, N]");
        if (i > 0 && taus[i] <= taus[i - 1])
            throw std::invalid_argument("clt_rate_experiment: taus must be strictly increasing");
    }
    CltRateResult out;
    out.reports.resize(taus.size());
    parallel_for(taus.size(), threads, [&](std::size_t i) {
        const auto w = batch_weights(N, taus[i]);
        const auto grid = density_of_weighted_sum(model, w, spec);
        InfoReport r;
        r.tau = taus[i];
        r.variance = grid_variance(grid);
        r.fisher = fisher_of_grid(grid);
        r.product_minus_one = r.fisher * r.variance - 1.0;
        out.reports[i] = r;
    });
    if (taus.size() >= 2) {
        std::vector<double> tx, dy;
        for (const auto &r : out.reports) {
            tx.push_back(static_cast<double>(r.tau));
            dy.push_back(r.product_minus_one);
        }
        out.slope = loglog_slope(tx, dy);
    } else {
        out.slope = std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

} // namespace gfl
