#include "gfl/harness.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "gfl/crlb.hpp"
#include "gfl/fisher_numeric.hpp"
#include "gfl/oracle_pf.hpp"
#include "gfl/parallel.hpp"

namespace gfl {

std::size_t default_burn_in(const SystemParams &params) {
    return 20 * static_cast<std::size_t>(std::ceil(params.s_N * std::sqrt(static_cast<double>(params.N))));
}

void ExperimentConfig::validate() const {
    if (horizon == 0)
        throw std::invalid_argument("horizon must be >= 1");
    if (burn_in >= horizon)
        throw std::invalid_argument(fmt::format("burn_in ({}) must be smaller than horizon ({})", burn_in, horizon));
    if (replications < 2)
        throw std::invalid_argument("replications must be >= 2 for a confidence interval");
    if (filters.empty())
        throw std::invalid_argument("at least one filter is required");
    for (const auto &f : filters)
        if (f.kind == FilterKind::NaiveBatch && (f.tau == 0 || f.tau > horizon))
            throw std::invalid_argument("naive_batch tau must lie in [1, horizon]");
    if (oracle_particles != 0 && oracle_particles < kMinParticles)
        throw std::invalid_argument(fmt::format("oracle_particles must be 0 or >= {}", kMinParticles));
    if (!(resample_threshold > 0.0 && resample_threshold <= 1.0))
        throw std::invalid_argument("resample_threshold must lie in (0, 1]");
}

std::size_t ExperimentConfig::tau() const { return tau_override.value_or(default_tau(params)); }

namespace {

struct SqErr {
    double mse;
    double bias;
};

SqErr time_average(const std::vector<double> &est, const std::vector<double> &x, std::size_t burn_in) {
    double se = 0.0, e = 0.0;
    for (std::size_t t = burn_in; t < x.size(); ++t) {
        const double d = est[t] - x[t];
        se += d * d;
        e += d;
    }
    const double m = static_cast<double>(x.size() - burn_in);
    return {se / m, e / m};
}

bool uses_gain(FilterKind k) {
    return k == FilterKind::KF || k == FilterKind::GF || k == FilterKind::CenteredGF;
}

} // namespace

std::vector<MseEstimate> estimate_mse(const ExperimentConfig &config) {
    config.validate();
    const auto &params = config.params;
    const std::size_t nf = config.filters.size();
    const bool with_oracle = config.oracle_particles > 0;
    const std::size_t cols = nf + (with_oracle ? 1 : 0);

    // Gain schedules are deterministic; compute once per kind.
    const double P0 = stationary_var_x(params);
    const std::size_t sched_len = config.gain_mode == GainMode::Recursive ? config.horizon : 0;
    const auto kalman = gain_schedule(params, sched_len, P0, GainKind::Kalman);
    const auto goggin = gain_schedule(params, sched_len, P0, GainKind::Goggin);

    std::vector<SqErr> cells(config.replications * cols);
    parallel_for(config.replications, config.threads, [&](std::size_t i) {
        const auto seed = replication_seed(config.seed, i);
        const auto traj = simulate(params, config.horizon, 0.0, seed);
        for (std::size_t f = 0; f < nf; ++f) {
            const auto mode = config.filters[f];
            try {
                std::vector<double> est;
                if (uses_gain(mode.kind))
                    est = run_filter(params, traj, mode, mode.kind == FilterKind::KF ? kalman : goggin,
                                     config.gain_mode);
                else
                    est = run_filter(params, traj, mode, GainSchedule{}, config.gain_mode);
                cells[i * cols + f] = time_average(est, traj.x, config.burn_in);
            } catch (const std::exception &e) {
                throw std::runtime_error(fmt::format("filter '{}' failed in replication {} (seed {}): {}",
                                                     filter_name(mode.kind), i, seed, e.what()));
            }
        }
        if (with_oracle) {
            try {
                const auto est = pf_run(params, traj, config.oracle_particles, config.resample_threshold,
                                        oracle_seed(seed));
                cells[i * cols + nf] = time_average(est, traj.x, config.burn_in);
            } catch (const DegeneracyError &e) {
                throw std::runtime_error(fmt::format("oracle failed in replication {} (seed {}): {}", i,
                                                     seed, e.what()));
            }
        }
    });

    std::vector<MseEstimate> out;
    for (std::size_t f = 0; f < cols; ++f) {
        std::vector<double> m(config.replications), b(config.replications);
        for (std::size_t i = 0; i < config.replications; ++i) {
            m[i] = cells[i * cols + f].mse;
            b[i] = cells[i * cols + f].bias;
        }
        const std::string name = f < nf ? std::string(filter_name(config.filters[f].kind)) : "oracle";
        out.push_back(aggregate(name, std::move(m), std::move(b)));
    }
    return out;
}

std::string_view regime_name(Regime regime) {
    switch (regime) {
    case Regime::NegligibleSNR:
        return "negligible_snr";
    case Regime::LargeSNR:
        return "large_snr";
    case Regime::Balanced:
        return "balanced";
    case Regime::LowSNRWindow:
        return "low_snr_window";
    }
    return "unknown";
}

RegimeLabel classify_regime(const SystemParams &params, RegimeThresholds thresholds) {
    if (!(thresholds.cutoff > 1.0))
        throw std::invalid_argument("classify_regime: cutoff must exceed 1");
    const double root = std::sqrt(static_cast<double>(params.N));
    RegimeLabel r;
    r.s_over_sqrtN = params.s_N / root;
    r.s_times_sqrtN = params.s_N * root;
    constexpr double slack = 1.0 + 1e-12;
    if (r.s_over_sqrtN * slack >= thresholds.cutoff)
        r.label = Regime::NegligibleSNR;
    else if (r.s_times_sqrtN <= slack / thresholds.cutoff)
        r.label = Regime::LargeSNR;
    else if (params.s_N <= 1.0)
        r.label = Regime::LowSNRWindow;
    else
        r.label = Regime::Balanced;
    return r;
}

double SRuleSpec::s_for(std::int64_t N) const {
    const double n = static_cast<double>(N);
    switch (rule) {
    case SRule::SqrtN:
        return std::sqrt(n);
    case SRule::NQuarter:
        return std::pow(n, 0.25);
    case SRule::Fixed:
        return constant;
    }
    return constant;
}

double error_time_constant(const SystemParams &params, FilterKind filter) {
    const double gamma = params.gamma();
    double contraction = gamma;
    if (uses_gain(filter)) {
        const GainKind kind = filter == FilterKind::KF ? GainKind::Kalman : GainKind::Goggin;
        const auto gs = gain_schedule(params, 0, stationary_var_x(params), kind);
        // The score filter's effective innovation weight is K I(v) in both variants.
        const double weight = filter == FilterKind::KF ? gs.K_inf : gs.K_inf * params.obs_noise.fisher_info();
        contraction = gamma * (1.0 - weight);
    }
    return 1.0 / (1.0 - contraction);
}

namespace {

RateFit run_rate_points(const RateFitConfig &config) {
    if (config.N_list.size() < 3)
        throw std::invalid_argument("rate fit needs at least three N values");
    for (std::size_t i = 1; i < config.N_list.size(); ++i)
        if (config.N_list[i] <= config.N_list[i - 1])
            throw std::invalid_argument("rate fit N values must be strictly increasing");

    RateFit fit;
    for (std::size_t k = 0; k < config.N_list.size(); ++k) {
        const auto N = config.N_list[k];
        SystemParams params(N, config.s_rule.s_for(N), config.signal_noise, config.obs_noise);
        const double tc = error_time_constant(params, config.filter);
        // The state itself mixes on a time scale of N/2.
        const double mix = std::max(tc, 0.5 * static_cast<double>(N));
        RatePoint p;
        p.N = N;
        p.s_N = params.s_N;
        p.tau = default_tau(params);
        p.burn_in = static_cast<std::size_t>(std::ceil(config.burn_in_factor * mix));
        p.horizon = p.burn_in + static_cast<std::size_t>(std::ceil(config.horizon_factor * tc));

        ExperimentConfig ec{params};
        ec.horizon = p.horizon;
        ec.burn_in = p.burn_in;
        ec.replications = config.replications;
        ec.filters = {FilterMode{config.filter, 0}};
        ec.seed = replication_seed(config.seed, 0x72617465ULL + k);
        ec.threads = config.threads;
        p.estimate = estimate_mse(ec).front();
        p.lower_bound = barJ_stationary(batch_params(params, p.tau), params).lower_bound;
        p.gap = p.estimate.mean_sq_error - p.lower_bound;
        fit.points.push_back(std::move(p));
    }
    return fit;
}

} // namespace

RateFit rate_fit_bias(const RateFitConfig &config) {
    auto fit = run_rate_points(config);
    std::vector<double> s, b;
    bool all_cover_zero = true;
    for (const auto &p : fit.points) {
        s.push_back(p.s_N);
        b.push_back(std::abs(p.estimate.bias));
        if (std::abs(p.estimate.bias) > p.estimate.bias_ci)
            all_cover_zero = false;
    }
    fit.slope = loglog_slope(s, b);
    fit.inconclusive = all_cover_zero;
    return fit;
}

RateFit rate_fit_mse_gap(const RateFitConfig &config) {
    auto fit = run_rate_points(config);
    std::vector<double> s, g;
    for (const auto &p : fit.points) {
        s.push_back(p.s_N);
        g.push_back(std::abs(p.gap));
    }
    fit.slope = loglog_slope(s, g);
    return fit;
}

} // namespace gfl
