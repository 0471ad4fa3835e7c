#include "gfl/crlb.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gfl/filters.hpp"

namespace gfl {

namespace {

// 1 - gamma^{2 tau} via expm1 to keep precision when tau/N is small.
double one_minus_gamma_pow(const SystemParams &params, std::size_t tau) {
    const double log_gamma = std::log1p(-1.0 / static_cast<double>(params.N));
    return -std::expm1(2.0 * static_cast<double>(tau) * log_gamma);
}

} // namespace

BatchParams batch_params(const SystemParams &params, std::size_t tau, double regime_c) {
    if (tau == 0)
        throw std::invalid_argument("batch_params: tau must be >= 1");
    const double n = static_cast<double>(params.N);
    const double gamma = params.gamma();
    const double omg = one_minus_gamma_pow(params, tau);
    const double geo = omg / params.one_minus_gamma_sq(); // sum_{s<tau} gamma^{2s}

    BatchParams b;
    b.tau = tau;
    b.gamma_2tau = 1.0 - omg;
    b.sigma_W = geo / n;
    b.eIVe = gamma * gamma / (params.s_N * params.s_N * b.gamma_2tau) * params.obs_noise.fisher_info() * geo;
    b.out_of_regime = static_cast<double>(tau) > regime_c * n;
    return b;
}

// gamma in long double: the double-rounded gamma raised to the power 2 tau
// drifts by ~tau * 1e-16 relative, which is visible at tau = 1e6.
static long double gamma_ld(const SystemParams &params) { return 1.0L - 1.0L / static_cast<long double>(params.N); }

double sigma_W_direct(const SystemParams &params, std::size_t tau) {
    const long double g2 = gamma_ld(params) * gamma_ld(params);
    long double sum = 0.0L, term = 1.0L;
    for (std::size_t s = 0; s < tau; ++s) {
        sum += term;
        term *= g2;
    }
    return static_cast<double>(sum / static_cast<long double>(params.N));
}

double eIVe_direct(const SystemParams &params, std::size_t tau) {
    const long double inv_g2 = 1.0L / (gamma_ld(params) * gamma_ld(params));
    long double sum = 0.0L, term = 1.0L;
    for (std::size_t s = 0; s < tau; ++s) {
        sum += term;
        term *= inv_g2;
    }
    return static_cast<double>(sum * params.obs_noise.fisher_info() / (params.s_N * params.s_N));
}

double barJ_step(const BatchParams &batch, double barJ) {
    const double S = 1.0 / batch.sigma_W;
    return batch.eIVe + barJ * S / (barJ + batch.gamma_2tau * S);
}

double barJ_closed_form(const BatchParams &batch) {
    const double S = 1.0 / batch.sigma_W;
    // (1 - gamma^{2 tau}) S = N (1 - gamma^2); computed from the batch terms as written.
    const double a = batch.eIVe + (1.0 - batch.gamma_2tau) * S;
    const double b = batch.eIVe * batch.gamma_2tau * S;
    return 0.5 * (a + std::sqrt(a * a + 4.0 * b));
}

CrlbResult barJ_stationary(const BatchParams &batch, const SystemParams &params, double barJ0,
                           std::size_t max_iterations) {
    if (!(barJ0 > 0.0))
        throw std::invalid_argument("barJ_stationary: starting information must be positive");
    CrlbResult r;
    r.tau = batch.tau;
    r.barJ_inf = barJ_closed_form(batch);
    r.lower_bound = 1.0 / r.barJ_inf;
    r.slack_order = 1.0 / (static_cast<double>(batch.tau) * r.barJ_inf);
    r.unbatched_J = unbatched_information(params);
    r.out_of_regime = batch.out_of_regime;
    r.low_snr = params.s_N < 1.0;

    // Iterate in extended precision until the monotone sequence stalls.
    const long double S = 1.0L / batch.sigma_W;
    const long double e = batch.eIVe;
    const long double a = batch.gamma_2tau;
    long double J = barJ0;
    long double last = 0.0L;
    r.barJ_trace.push_back(barJ0);
    for (std::size_t k = 0; k < max_iterations; ++k) {
        const long double next = e + J * S / (J + a * S);
        const long double step = next - J;
        J = next;
        r.iterations = k + 1;
        if (r.barJ_trace.size() < CrlbResult::kMaxTrace)
            r.barJ_trace.push_back(static_cast<double>(J));
        if (step == 0.0L || (k > 0 && (step > 0) != (last > 0)))
            break;
        last = step;
    }
    r.barJ_iterated = static_cast<double>(J);
    return r;
}

double unbatched_information(const SystemParams &params) {
    const double n = static_cast<double>(params.N);
    const double gamma = params.gamma();
    const double Qc = n * params.signal_noise.fisher_info();
    const double Rc = params.obs_noise.fisher_info() / (params.s_N * params.s_N);
    const double a = Rc + params.one_minus_gamma_sq() * Qc;
    return 0.5 * (a + std::sqrt(a * a + 4.0 * gamma * gamma * Qc * Rc));
}

double unbatched_crlb(const SystemParams &params) { return 1.0 / unbatched_information(params); }

double goggin_stationary_J(const SystemParams &params) {
    return stationary_information(params, params.obs_noise.fisher_info());
}

double kalman_stationary_J(const SystemParams &params) { return stationary_information(params, 1.0); }

SuboptimalityGap kf_suboptimality_gap(const SystemParams &params) {
    const double jgf = goggin_stationary_J(params);
    const double jkf = kalman_stationary_J(params);
    SuboptimalityGap g;
    g.abs_gap = 1.0 / jkf - 1.0 / jgf;
    g.rel_gap = g.abs_gap * jgf;
    return g;
}

std::size_t default_tau(const SystemParams &params) {
    const double t = std::round(params.s_N);
    return static_cast<std::size_t>(std::clamp(t, 1.0, static_cast<double>(params.N)));
}

} // namespace gfl
