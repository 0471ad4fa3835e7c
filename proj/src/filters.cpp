#include "gfl/filters.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace gfl {

std::string_view filter_name(FilterKind kind) {
    switch (kind) {
    case FilterKind::KF:
        return "kf";
    case FilterKind::GF:
        return "gf";
    case FilterKind::CenteredGF:
        return "cgf";
    case FilterKind::TrivialMean:
        return "trivial_mean";
    case FilterKind::TrivialObs:
        return "trivial_obs";
    case FilterKind::NaiveBatch:
        return "naive_batch";
    }
    return "unknown";
}

FilterKind parse_filter_kind(std::string_view name) {
    for (auto k : {FilterKind::KF, FilterKind::GF, FilterKind::CenteredGF, FilterKind::TrivialMean,
                   FilterKind::TrivialObs, FilterKind::NaiveBatch})
        if (filter_name(k) == name)
            return k;
    throw std::invalid_argument("unknown filter mode '" + std::string(name) + "'");
}

std::string_view gain_mode_name(GainMode mode) {
    return mode == GainMode::Recursive ? "recursive" : "stationary";
}

GainMode parse_gain_mode(std::string_view name) {
    if (name == "recursive")
        return GainMode::Recursive;
    if (name == "stationary")
        return GainMode::Stationary;
    throw std::invalid_argument("unknown gain mode '" + std::string(name) + "'");
}

double stationary_information(const SystemParams &params, double info) {
    const double n = static_cast<double>(params.N);
    const double gamma = params.gamma();
    const double obs = info / (params.s_N * params.s_N);
    const double a = params.one_minus_gamma_sq() * n + obs;
    const double b = gamma * gamma * n * obs;
    return 0.5 * (a + std::sqrt(a * a + 4.0 * b));
}

namespace {

struct GainConstants {
    double Q, R, info, gamma2;
};

GainConstants gain_constants(const SystemParams &params, GainKind kind) {
    const double info = kind == GainKind::Goggin ? params.obs_noise.fisher_info() : 1.0;
    const double s2 = params.s_N * params.s_N;
    const double gamma = params.gamma();
    return {1.0 / static_cast<double>(params.N), s2 * info, info, gamma * gamma};
}

} // namespace

GainSchedule gain_schedule(const SystemParams &params, std::size_t horizon, double P0,
                           GainKind kind) {
    if (!(P0 >= 0.0))
        throw std::invalid_argument("gain_schedule: P0 must be >= 0");
    const auto c = gain_constants(params, kind);
    GainSchedule gs;
    gs.kind = kind;
    gs.Q = c.Q;
    gs.R = c.R;
    gs.info = c.info;
    gs.P.resize(horizon);
    gs.K.resize(horizon);
    double P = P0;
    for (std::size_t t = 0; t < horizon; ++t) {
        const double prior = c.gamma2 * P + c.Q;
        P = c.R * prior / (c.info * c.info * prior + c.R);
        gs.P[t] = P;
        gs.K[t] = P * c.info / c.R;
    }
    gs.P_inf = 1.0 / stationary_information(params, c.info);
    gs.K_inf = gs.P_inf * c.info / c.R;
    return gs;
}

FixedPointIteration iterate_gain_fixed_point(const SystemParams &params, GainKind kind, double P0,
                                             std::size_t max_iterations) {
    const auto c = gain_constants(params, kind);
    const long double Q = c.Q, R = c.R, I = c.info, g2 = c.gamma2;
    long double P = P0;
    FixedPointIteration out;
    // The map is monotone, so iterates approach the fixed point from one side;
    // stop once a step fails to move further in that direction.
    long double last_step = 0.0L;
    for (std::size_t i = 0; i < max_iterations; ++i) {
        const long double prior = g2 * P + Q;
        const long double next = R * prior / (I * I * prior + R);
        const long double step = next - P;
        out.iterations = i + 1;
        if (step == 0.0L || (i > 0 && (step > 0) != (last_step > 0))) {
            P = next;
            out.converged = true;
            break;
        }
        last_step = step;
        P = next;
    }
    out.P = static_cast<double>(P);
    return out;
}

namespace {

void require_mode(const FilterState &state, FilterKind kind, const char *fn) {
    if (state.mode.kind != kind)
        throw std::invalid_argument(std::string(fn) + ": state mode is '" +
                                    std::string(filter_name(state.mode.kind)) + "'");
}

} // namespace

FilterState kf_step(const FilterState &state, double y, double gamma, double K) {
    require_mode(state, FilterKind::KF, "kf_step");
    const double pred = gamma * state.estimate;
    return {pred + K * (y - pred), state.step + 1, state.mode};
}

FilterState gf_step(const FilterState &state, double y, const SystemParams &params, double K) {
    require_mode(state, FilterKind::GF, "gf_step");
    const double s = params.s_N;
    const double pred = params.gamma() * state.estimate;
    const double z = s * params.obs_noise.score(y / s);
    return {pred + K * (z - params.obs_noise.fisher_info() * pred), state.step + 1, state.mode};
}

FilterState centered_gf_step(const FilterState &state, double y, const SystemParams &params,
                             double K) {
    require_mode(state, FilterKind::CenteredGF, "centered_gf_step");
    const double s = params.s_N;
    const double pred = params.gamma() * state.estimate;
    return {pred + K * s * params.obs_noise.score((y - pred) / s), state.step + 1, state.mode};
}

std::vector<double> naive_batch_filter(std::span<const double> y, std::size_t tau) {
    if (tau == 0)
        throw std::invalid_argument("naive_batch_filter: tau must be >= 1");
    if (tau > y.size())
        throw std::invalid_argument("naive_batch_filter: tau exceeds the series length");
    std::vector<double> out(y.size());
    for (std::size_t start = 0; start < y.size(); start += tau) {
        const std::size_t end = std::min(start + tau, y.size());
        double sum = 0.0;
        for (std::size_t t = start; t < end; ++t)
            sum += y[t];
        const double mean = sum / static_cast<double>(end - start);
        for (std::size_t t = start; t < end; ++t)
            out[t] = mean;
    }
    return out;
}

TrivialEstimates trivial_filters(std::span<const double> y) {
    return {std::vector<double>(y.size(), 0.0), std::vector<double>(y.begin(), y.end())};
}

std::vector<double> run_filter(const SystemParams &params, const Trajectory &traj, FilterMode mode,
                               GainMode gain_mode, std::optional<double> P0) {
    if (traj.x.size() != traj.y.size())
        throw std::invalid_argument("run_filter: trajectory x and y lengths differ");
    const bool needs_gain = mode.kind == FilterKind::KF || mode.kind == FilterKind::GF ||
                            mode.kind == FilterKind::CenteredGF;
    if (!needs_gain || traj.size() == 0)
        return run_filter(params, traj, mode, GainSchedule{}, gain_mode);
    const GainKind kind = mode.kind == FilterKind::KF ? GainKind::Kalman : GainKind::Goggin;
    const std::size_t horizon = gain_mode == GainMode::Recursive ? traj.size() : 0;
    const auto schedule = gain_schedule(params, horizon, P0.value_or(stationary_var_x(params)), kind);
    return run_filter(params, traj, mode, schedule, gain_mode);
}

std::vector<double> run_filter(const SystemParams &params, const Trajectory &traj, FilterMode mode,
                               const GainSchedule &schedule, GainMode gain_mode) {
    if (traj.x.size() != traj.y.size())
        throw std::invalid_argument("run_filter: trajectory x and y lengths differ");
    const std::size_t T = traj.size();
    if (T == 0)
        return {};

    switch (mode.kind) {
    case FilterKind::TrivialMean:
        return trivial_filters(traj.y).mean_estimates;
    case FilterKind::TrivialObs:
        return trivial_filters(traj.y).obs_estimates;
    case FilterKind::NaiveBatch:
        return naive_batch_filter(traj.y, mode.tau);
    default:
        break;
    }

    const GainKind expected = mode.kind == FilterKind::KF ? GainKind::Kalman : GainKind::Goggin;
    if (schedule.kind != expected)
        throw std::invalid_argument("run_filter: gain schedule kind does not match the filter mode");
    if (gain_mode == GainMode::Recursive && schedule.K.size() < T)
        throw std::invalid_argument("run_filter: gain schedule shorter than the trajectory");

    std::vector<double> out(T);
    FilterState state{0.0, 0, mode};
    const double gamma = params.gamma();
    for (std::size_t t = 0; t < T; ++t) {
        const double K = gain_mode == GainMode::Recursive ? schedule.K[t] : schedule.K_inf;
        switch (mode.kind) {
        case FilterKind::KF:
            state = kf_step(state, traj.y[t], gamma, K);
            break;
        case FilterKind::GF:
            state = gf_step(state, traj.y[t], params, K);
            break;
        case FilterKind::CenteredGF:
            state = centered_gf_step(state, traj.y[t], params, K);
            break;
        default:
            break;
        }
        out[t] = state.estimate;
    }
    return out;
}

} // namespace gfl
