// Posterior Cramer-Rao machinery for the scaled system: the unbatched
// information recursion, the batched recursion with its Gaussian surrogate for
// the aggregated signal noise, and the Kalman/score-filter information roots.
#pragma once

#include <cstddef>
#include <vector>

#include "gfl/state_space.hpp"

namespace gfl {

/// Batching constants for a batch of length tau.
struct BatchParams {
    std::size_t tau = 1;
    /// Var(W) = (1/N)(1 - gamma^{2 tau})/(1 - gamma^2).
    double sigma_W = 0.0;
    /// e' I(V) e = gamma^2/(s^2 gamma^{2 tau}) I(v) (1 - gamma^{2 tau})/(1 - gamma^2).
    double eIVe = 0.0;
    /// gamma^{2 tau}.
    double gamma_2tau = 0.0;
    /// tau > c N: the batched bound is outside the regime it was derived for.
    bool out_of_regime = false;
};

/// c is the regime multiplier in tau <= c N.
BatchParams batch_params(const SystemParams &params, std::size_t tau, double regime_c = 1.0);

/// Direct sums backing the closed forms (reference path).
double sigma_W_direct(const SystemParams &params, std::size_t tau);
double eIVe_direct(const SystemParams &params, std::size_t tau);

struct CrlbResult {
    std::size_t tau = 1;
    double barJ_inf = 0.0;      // closed-form positive root
    double barJ_iterated = 0.0; // fixed-point iteration from barJ_0
    std::size_t iterations = 0;
    std::vector<double> barJ_trace; // iterates, capped at kMaxTrace entries
    double lower_bound = 0.0;       // 1/barJ_inf
    double slack_order = 0.0;       // 1/(tau barJ_inf), order indicator only
    double unbatched_J = 0.0;
    bool out_of_regime = false;
    bool low_snr = false; // s_N < 1: the batched bound is not covered by theory

    static constexpr std::size_t kMaxTrace = 100'000;
};

/// One step of barJ -> eIVe + barJ S / (barJ + gamma^{2 tau} S), S = 1/sigma_W.
double barJ_step(const BatchParams &batch, double barJ);

/// Positive root of barJ^2 - (eIVe + (1-gamma^{2tau}) S) barJ - eIVe gamma^{2tau} S = 0.
double barJ_closed_form(const BatchParams &batch);

CrlbResult barJ_stationary(const BatchParams &batch, const SystemParams &params,
                           double barJ0 = 1.0, std::size_t max_iterations = 50'000'000);

/// Stationary information J of the unbatched posterior recursion with
/// Q = N I(w), R = I(v)/s^2.
double unbatched_information(const SystemParams &params);
/// 1/J: the classical posterior CRLB on the stationary MSE.
double unbatched_crlb(const SystemParams &params);

/// Stationary information of the score-corrected filter's gain recursion.
double goggin_stationary_J(const SystemParams &params);
/// Same with unit observation information (Kalman filter).
double kalman_stationary_J(const SystemParams &params);

struct SuboptimalityGap {
    double abs_gap = 0.0; // 1/J_kf - 1/J_gf
    double rel_gap = 0.0; // abs_gap * J_gf
};
SuboptimalityGap kf_suboptimality_gap(const SystemParams &params);

/// Default batch length: round(s_N), clamped to [1, N].
std::size_t default_tau(const SystemParams &params);

} // namespace gfl
