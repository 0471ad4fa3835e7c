#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/chrono.h>
#include <fmt/format.h>
#include <openssl/evp.h>

#include "gfl/config.hpp"
#include "gfl/crlb.hpp"
#include "gfl/fisher_numeric.hpp"
#include "gfl/harness.hpp"
#include "gfl/oracle_pf.hpp"
#include "gfl/parallel.hpp"
#include "gfl/regimes.hpp"

namespace gfl::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string sha256_hex(const std::string &bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 digest failed");
    std::string hex;
    for (unsigned int i = 0; i < len; ++i)
        hex += fmt::format("{:02x}", md[i]);
    return hex;
}

namespace {

class InvariantViolation : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct Globals {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::size_t threads = 0;
    std::string out = ".";
};

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(now)));
}

std::string num(double v) { return fmt::format("{:.10g}", v); }

template <class T>
std::vector<T> parse_list(const std::string &text, const char *what) {
    std::vector<T> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty())
            continue;
        try {
            std::size_t used = 0;
            if constexpr (std::is_floating_point_v<T>)
                out.push_back(static_cast<T>(std::stod(item, &used)));
            else
                out.push_back(static_cast<T>(std::stoll(item, &used)));
            if (used != item.size())
                throw std::invalid_argument(item);
        } catch (const std::exception &) {
            throw ConfigError(fmt::format("cannot parse '{}' in {} list", item, what));
        }
    }
    if (out.empty())
        throw ConfigError(fmt::format("{} list is empty", what));
    return out;
}

NoiseModel parse_model(const std::string &text) {
    if (!text.empty() && text.front() == '{') {
        json j;
        try {
            j = json::parse(text);
        } catch (const json::exception &e) {
            throw ConfigError(std::string("noise model JSON: ") + e.what());
        }
        return noise_model_from_json(j);
    }
    return noise_model_from_json(json(text));
}

json read_config_json(const std::string &path) {
    if (path.empty())
        return json::object();
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    try {
        json j;
        in >> j;
        if (!j.is_object())
            throw ConfigError("config file must hold a JSON object");
        return j;
    } catch (const json::exception &e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
}

/// Collects output files and writes the run manifest last.
class RunOutputs {
  public:
    RunOutputs(const Globals &g, std::string command)
        : dir_(g.out), command_(std::move(command)), started_(utc_now()) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec)
            throw ConfigError("cannot create output directory '" + dir_.string() + "': " + ec.message());
    }

    void write(const std::string &name, const std::string &content) {
        const auto path = dir_ / name;
        std::ofstream os(path, std::ios::binary | std::ios::trunc);
        if (!os)
            throw ConfigError("cannot write '" + path.string() + "'");
        os << content;
        files_.push_back({{"path", name}, {"sha256", sha256_hex(content)}});
    }

    void finish(const json &resolved, std::uint64_t seed) {
        json m;
        m["command"] = command_;
        m["config"] = resolved;
        m["config_digest"] = sha256_hex(resolved.dump());
        m["master_seed"] = seed;
        m["tool_version"] = kToolVersion;
        m["started"] = started_;
        m["finished"] = utc_now();
        m["outputs"] = files_;
        std::ofstream os(dir_ / "manifest.json", std::ios::binary | std::ios::trunc);
        os << m.dump(2) << '\n';
    }

  private:
    fs::path dir_;
    std::string command_;
    std::string started_;
    json files_ = json::array();
};

// ---------------------------------------------------------------- simulate

struct SimulateOpts {
    std::optional<std::int64_t> n;
    std::optional<double> s;
    std::optional<std::size_t> horizon;
    std::string signal, obs;
    double x0 = 0.0;
};

int cmd_simulate(const Globals &g, const SimulateOpts &o) {
    auto j = read_config_json(g.config);
    if (o.n)
        j["N"] = *o.n;
    if (o.s)
        j["s_N"] = *o.s;
    if (o.horizon)
        j["horizon"] = *o.horizon;
    if (!o.signal.empty())
        j["signal_noise"] = noise_model_to_json(parse_model(o.signal));
    if (!o.obs.empty())
        j["obs_noise"] = noise_model_to_json(parse_model(o.obs));
    for (const char *req : {"N", "s_N", "horizon"})
        if (!j.contains(req))
            throw ConfigError(fmt::format("simulate: '{}' is required (--n, --s, --horizon or --config)", req));
    const std::uint64_t seed = g.seed.value_or(j.value("seed", std::uint64_t{0}));

    const auto signal = j.contains("signal_noise") ? noise_model_from_json(j["signal_noise"]) : NoiseModel::gaussian();
    const auto obs = j.contains("obs_noise") ? noise_model_from_json(j["obs_noise"]) : NoiseModel::gaussian();
    SystemParams params(j["N"].get<std::int64_t>(), j["s_N"].get<double>(), signal, obs);
    const auto horizon = j["horizon"].get<std::size_t>();
    if (horizon == 0)
        throw ConfigError("simulate: horizon must be >= 1");

    RunOutputs out(g, "simulate");
    const auto traj = simulate(params, horizon, o.x0, seed);
    std::ostringstream csv;
    write_trajectory_csv(csv, traj);
    out.write("trajectory.csv", csv.str());

    json resolved = {{"N", params.N},
                     {"s_N", params.s_N},
                     {"horizon", horizon},
                     {"x0", o.x0},
                     {"seed", seed},
                     {"signal_noise", noise_model_to_json(signal)},
                     {"obs_noise", noise_model_to_json(obs)}};
    out.finish(resolved, seed);
    return kExitOk;
}

// ----------------------------------------------------------------- compare

struct CompareOpts {
    std::optional<std::int64_t> n;
    std::optional<double> s;
    std::optional<std::size_t> horizon, burn_in, replications, oracle_particles;
    std::string filters, signal, obs, tau;
};

const MseEstimate *find_estimate(const std::vector<MseEstimate> &v, std::string_view name) {
    for (const auto &e : v)
        if (e.filter == name)
            return &e;
    return nullptr;
}

int cmd_compare(const Globals &g, const CompareOpts &o) {
    auto j = read_config_json(g.config);
    if (o.n)
        j["N"] = *o.n;
    if (o.s)
        j["s_N"] = *o.s;
    if (o.horizon)
        j["horizon"] = *o.horizon;
    if (o.burn_in)
        j["burn_in"] = *o.burn_in;
    if (o.replications)
        j["replications"] = *o.replications;
    if (o.oracle_particles)
        j["oracle_particles"] = *o.oracle_particles;
    if (!o.filters.empty()) {
        json list = json::array();
        std::stringstream ss(o.filters);
        std::string item;
        while (std::getline(ss, item, ','))
            list.push_back(item);
        j["filters"] = list;
    }
    if (!o.signal.empty())
        j["signal_noise"] = noise_model_to_json(parse_model(o.signal));
    if (!o.obs.empty())
        j["obs_noise"] = noise_model_to_json(parse_model(o.obs));
    if (!o.tau.empty())
        j["tau"] = o.tau == "auto" ? json("auto") : json(parse_list<std::size_t>(o.tau, "tau").front());
    if (g.seed)
        j["seed"] = *g.seed;

    auto cfg = experiment_config_from_json(j);
    cfg.threads = g.threads;
    const auto &params = cfg.params;
    const auto regime = classify_regime(params);
    if (regime.label == Regime::LowSNRWindow)
        std::cerr << fmt::format("warning: s_N = {} is in the low-SNR window; the score-filter guarantees "
                                 "require s_N >> 1\n",
                                 num(params.s_N));
    const auto tau = cfg.tau();
    const auto batch = batch_params(params, tau);
    if (batch.out_of_regime)
        std::cerr << fmt::format("warning: tau = {} exceeds N = {}; the batched bound is out of regime\n", tau,
                                 params.N);
    const double lb = barJ_stationary(batch, params).lower_bound;

    RunOutputs out(g, "compare");
    const auto est = estimate_mse(cfg);
    const auto *oracle = find_estimate(est, "oracle");

    std::string csv = "filter,N,s_N,regime,mse,mse_ci,bias,bias_ci,crlb_lb,replications,seed,mse_oracle\n";
    for (const auto &e : est)
        csv += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", e.filter, params.N, num(params.s_N),
                           regime_name(regime.label), num(e.mean_sq_error), num(e.mse_ci), num(e.bias),
                           num(e.bias_ci), num(lb), e.replications, cfg.seed,
                           oracle ? num(oracle->mean_sq_error) : std::string());
    out.write("compare.csv", csv);

    json verdict;
    verdict["manifest"] = "manifest.json";
    verdict["regime"] = regime_name(regime.label);
    verdict["crlb_lb"] = lb;
    const auto *kf = find_estimate(est, "kf");
    const auto *gf = find_estimate(est, "gf");
    if (kf && gf) {
        const auto d = paired_difference(*kf, *gf);
        verdict["kf_minus_gf"] = {{"mean", d.mean}, {"ci", d.half_width}};
        verdict["gf_beats_kf"] = d.mean - d.half_width > 0.0;
        verdict["gf_beats_kf_separate_ci"] =
            kf->mean_sq_error - kf->mse_ci > gf->mean_sq_error + gf->mse_ci;
        bool equal = true;
        for (std::size_t i = 0; i < kf->rep_mse.size(); ++i)
            if (std::abs(kf->rep_mse[i] - gf->rep_mse[i]) > 1e-9 * kf->rep_mse[i])
                equal = false;
        verdict["gf_equals_kf"] = equal;
    }

    // a <= b up to the paired 95% CI.
    json checks = json::array();
    std::vector<std::string> violations;
    auto order = [&](const char *lhs, const char *rhs) {
        const auto *a = find_estimate(est, lhs);
        const auto *b = find_estimate(est, rhs);
        if (!a || !b)
            return;
        const auto d = paired_difference(*a, *b);
        const bool holds = d.mean - d.half_width <= 0.0;
        const auto label = fmt::format("{} <= {}", lhs, rhs);
        checks.push_back({{"check", label}, {"mean_diff", d.mean}, {"ci", d.half_width}, {"holds", holds}});
        if (!holds)
            violations.push_back(label);
    };
    order("oracle", "gf");
    if (regime.label == Regime::Balanced)
        order("gf", "kf");
    order("kf", "trivial_mean");
    order("kf", "trivial_obs");
    verdict["ordering"] = checks;
    verdict["violations"] = violations;
    out.write("verdict.json", verdict.dump(2) + "\n");

    out.finish(experiment_config_to_json(cfg), cfg.seed);
    if (!violations.empty()) {
        std::cerr << "ordering violated beyond CI: " << fmt::format("{}", fmt::join(violations, "; ")) << '\n';
        return kExitInvariant;
    }
    return kExitOk;
}

// -------------------------------------------------------------------- crlb

struct CrlbOpts {
    std::string n, s;
    std::string tau = "auto";
    std::string signal = "gaussian", obs = "logistic";
    double regime_c = 1.0;
};

int cmd_crlb(const Globals &g, const CrlbOpts &o) {
    if (o.n.empty() || o.s.empty())
        throw ConfigError("crlb: --n and --s are required");
    const auto Ns = parse_list<std::int64_t>(o.n, "--n");
    const auto Ss = parse_list<double>(o.s, "--s");
    const auto signal = parse_model(o.signal);
    const auto obs = parse_model(o.obs);
    std::optional<std::size_t> tau_fixed;
    if (o.tau != "auto") {
        tau_fixed = parse_list<std::size_t>(o.tau, "--tau").front();
        if (*tau_fixed == 0)
            throw ConfigError("crlb: --tau must be >= 1 or auto");
    }

    RunOutputs out(g, "crlb");
    std::string csv = "N,s_N,tau,barJ_inf,lower_bound,unbatched_bound,J_gf,J_kf,rel_gap\n";
    for (auto N : Ns)
        for (double s : Ss) {
            SystemParams params(N, s, signal, obs);
            const auto tau = tau_fixed.value_or(default_tau(params));
            const auto batch = batch_params(params, tau, o.regime_c);
            if (batch.out_of_regime)
                std::cerr << fmt::format("warning: tau = {} exceeds {} N at N = {}\n", tau, o.regime_c, N);
            if (s < 1.0)
                std::cerr << fmt::format("warning: s_N = {} < 1, outside the bound's stated regime\n", s);
            const auto r = barJ_stationary(batch, params);
            const auto gap = kf_suboptimality_gap(params);
            csv += fmt::format("{},{},{},{},{},{},{},{},{}\n", N, num(s), tau, num(r.barJ_inf),
                               num(r.lower_bound), num(unbatched_crlb(params)),
                               num(goggin_stationary_J(params)), num(kalman_stationary_J(params)),
                               num(gap.rel_gap));
        }
    out.write("crlb.csv", csv);
    json resolved = {{"N", Ns},
                     {"s_N", Ss},
                     {"tau", o.tau},
                     {"regime_c", o.regime_c},
                     {"signal_noise", noise_model_to_json(signal)},
                     {"obs_noise", noise_model_to_json(obs)}};
    out.finish(resolved, g.seed.value_or(0));
    return kExitOk;
}

// -------------------------------------------------------------- fisher-clt

struct FisherOpts {
    std::string model = "logistic";
    std::int64_t n = 1'000'000;
    std::string taus = "4,8,16,32,64";
    std::size_t points = std::size_t{1} << 14;
};

int cmd_fisher_clt(const Globals &g, const FisherOpts &o) {
    const auto model = parse_model(o.model);
    const auto taus = parse_list<std::size_t>(o.taus, "--taus");
    if (o.n < 2)
        throw ConfigError("fisher-clt: --n must be >= 2");
    RunOutputs out(g, "fisher-clt");
    GridSpec spec;
    spec.n_points = o.points;
    const auto res = clt_rate_experiment(model, o.n, taus, spec, g.threads);
    std::string csv = "tau,variance,fisher,delta,slope_fit\n";
    for (const auto &r : res.reports)
        csv += fmt::format("{},{},{},{},{}\n", r.tau, num(r.variance), num(r.fisher), num(r.product_minus_one),
                           num(res.slope));
    out.write("fisher_clt.csv", csv);
    json resolved = {{"model", noise_model_to_json(model)}, {"N", o.n}, {"taus", taus}, {"n_points", o.points}};
    out.finish(resolved, g.seed.value_or(0));
    return kExitOk;
}

// ----------------------------------------------------------------- regimes

struct RegimesOpts {
    std::string n, ratios;
    std::string signal = "gaussian", obs = "logistic";
    double cutoff = 10.0;
};

int cmd_regimes(const Globals &g, const RegimesOpts &o) {
    const auto Ns = o.n.empty() ? default_regime_N() : parse_list<std::int64_t>(o.n, "--n");
    const auto ratios = o.ratios.empty() ? default_regime_ratios() : parse_list<double>(o.ratios, "--ratios");
    const auto signal = parse_model(o.signal);
    const auto obs = parse_model(o.obs);
    RunOutputs out(g, "regimes");
    const auto rows = build_regime_map(Ns, ratios, obs, signal, {o.cutoff});

    std::string csv = "N,s_N,s_over_sqrtN,regime,recommended_filter,note,tau,lower_bound,trivial_mean_mse,"
                      "trivial_obs_mse,kf_mse_pred,gf_mse_pred\n";
    std::map<std::string, int> counts;
    bool monotone = true, gf_le_kf = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto &r = rows[i];
        csv += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", r.N, num(r.s_N), num(r.s_ratio),
                           regime_name(r.regime.label), r.recommended_filter, r.note, r.tau, num(r.lower_bound),
                           num(r.trivial_mean_mse), num(r.trivial_obs_mse), num(r.kf_mse_pred),
                           num(r.gf_mse_pred));
        ++counts[std::string(regime_name(r.regime.label))];
        if (r.regime.label == Regime::Balanced && r.gf_mse_pred > r.kf_mse_pred * (1.0 + 1e-12))
            gf_le_kf = false;
    }
    // Labels along s_N (sorted) for each N must never return to an earlier one.
    for (auto N : Ns) {
        std::vector<const RegimeMapRow *> line;
        for (const auto &r : rows)
            if (r.N == N)
                line.push_back(&r);
        std::sort(line.begin(), line.end(), [](auto *a, auto *b) { return a->s_N < b->s_N; });
        std::vector<Regime> seen;
        for (const auto *r : line) {
            if (!seen.empty() && seen.back() == r->regime.label)
                continue;
            if (std::find(seen.begin(), seen.end(), r->regime.label) != seen.end())
                monotone = false;
            seen.push_back(r->regime.label);
        }
    }
    out.write("regimes.csv", csv);
    json summary;
    summary["manifest"] = "manifest.json";
    summary["rows"] = rows.size();
    summary["counts"] = counts;
    summary["labels_monotone_in_s"] = monotone;
    summary["gf_le_kf_in_balanced"] = gf_le_kf;
    summary["cutoff"] = o.cutoff;
    out.write("regimes.json", summary.dump(2) + "\n");
    json resolved = {{"N", Ns},
                     {"ratios", ratios},
                     {"cutoff", o.cutoff},
                     {"signal_noise", noise_model_to_json(signal)},
                     {"obs_noise", noise_model_to_json(obs)}};
    out.finish(resolved, g.seed.value_or(0));
    if (!monotone || !gf_le_kf)
        throw InvariantViolation("regime map invariants violated");
    return kExitOk;
}

// ------------------------------------------------------------------- rates

struct RatesOpts {
    std::string signal = "gaussian", obs = "logistic";
    std::string filter = "gf";
    std::string n = "1000,10000,100000";
    std::string s_rule = "sqrtN";
    std::string kind = "bias";
    std::size_t replications = 20;
    double horizon_factor = 50.0;
    double burn_in_factor = 10.0;
};

SRuleSpec parse_s_rule(const std::string &text) {
    if (text == "sqrtN")
        return {SRule::SqrtN, 1.0};
    if (text == "nquarter")
        return {SRule::NQuarter, 1.0};
    if (text.rfind("fixed:", 0) == 0)
        return {SRule::Fixed, parse_list<double>(text.substr(6), "fixed s_N").front()};
    throw ConfigError("--s-rule must be sqrtN, nquarter or fixed:<value>");
}

int cmd_rates(const Globals &g, const RatesOpts &o) {
    RateFitConfig rc;
    rc.signal_noise = parse_model(o.signal);
    rc.obs_noise = parse_model(o.obs);
    try {
        rc.filter = parse_filter_kind(o.filter);
    } catch (const std::invalid_argument &e) {
        throw ConfigError(e.what());
    }
    if (rc.filter != FilterKind::KF && rc.filter != FilterKind::GF && rc.filter != FilterKind::CenteredGF)
        throw ConfigError("rates: --filter must be kf, gf or cgf");
    rc.N_list = parse_list<std::int64_t>(o.n, "--n");
    rc.s_rule = parse_s_rule(o.s_rule);
    rc.replications = o.replications;
    if (rc.replications < 2)
        throw ConfigError("rates: --replications must be >= 2");
    rc.seed = g.seed.value_or(0);
    rc.threads = g.threads;
    rc.horizon_factor = o.horizon_factor;
    rc.burn_in_factor = o.burn_in_factor;
    if (o.kind != "bias" && o.kind != "mse_gap")
        throw ConfigError("rates: --kind must be bias or mse_gap");

    RunOutputs out(g, "rates");
    const auto fit = o.kind == "bias" ? rate_fit_bias(rc) : rate_fit_mse_gap(rc);
    std::string csv = "kind,filter,N,s_N,tau,horizon,burn_in,mse,mse_ci,bias,bias_ci,lower_bound,gap,slope,"
                      "inconclusive\n";
    for (const auto &p : fit.points)
        csv += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", o.kind, o.filter, p.N, num(p.s_N),
                           p.tau, p.horizon, p.burn_in, num(p.estimate.mean_sq_error), num(p.estimate.mse_ci),
                           num(p.estimate.bias), num(p.estimate.bias_ci), num(p.lower_bound), num(p.gap),
                           num(fit.slope), fit.inconclusive ? "true" : "false");
    out.write("rates.csv", csv);
    json resolved = {{"kind", o.kind},
                     {"filter", o.filter},
                     {"N", rc.N_list},
                     {"s_rule", o.s_rule},
                     {"replications", o.replications},
                     {"horizon_factor", o.horizon_factor},
                     {"burn_in_factor", o.burn_in_factor},
                     {"seed", rc.seed},
                     {"signal_noise", noise_model_to_json(rc.signal_noise)},
                     {"obs_noise", noise_model_to_json(rc.obs_noise)}};
    out.finish(resolved, rc.seed);
    return kExitOk;
}

} // namespace

int run(int argc, const char *const *argv) {
    CLI::App app{"Score-corrected Kalman filter lab"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config, "JSON experiment config");
    app.add_option("--seed", g.seed, "Master seed (u64)");
    app.add_option("--threads", g.threads, "Worker threads (0 = machine parallelism)");
    app.add_option("--out", g.out, "Output directory");
    app.fallthrough();

    SimulateOpts sim;
    auto *c_sim = app.add_subcommand("simulate", "Simulate one trajectory");
    c_sim->add_option("--n", sim.n, "N");
    c_sim->add_option("--s", sim.s, "s_N");
    c_sim->add_option("--horizon", sim.horizon, "Number of steps");
    c_sim->add_option("--signal", sim.signal, "Signal noise model");
    c_sim->add_option("--obs", sim.obs, "Observation noise model");
    c_sim->add_option("--x0", sim.x0, "Initial state");

    CompareOpts cmp;
    auto *c_cmp = app.add_subcommand("compare", "Monte Carlo comparison of filters");
    c_cmp->add_option("--n", cmp.n, "N");
    c_cmp->add_option("--s", cmp.s, "s_N");
    c_cmp->add_option("--horizon", cmp.horizon, "Steps per replication");
    c_cmp->add_option("--burn-in", cmp.burn_in, "Discarded steps per replication");
    c_cmp->add_option("--replications", cmp.replications, "Replications (>= 2)");
    c_cmp->add_option("--filters", cmp.filters, "Comma-separated filter list");
    c_cmp->add_option("--oracle-particles", cmp.oracle_particles, "Particle-filter oracle size (0 = off)");
    c_cmp->add_option("--signal", cmp.signal, "Signal noise model");
    c_cmp->add_option("--obs", cmp.obs, "Observation noise model");
    c_cmp->add_option("--tau", cmp.tau, "Batch length for the bound, or auto");

    CrlbOpts crl;
    auto *c_crl = app.add_subcommand("crlb", "Closed-form bounds and Riccati predictions");
    c_crl->add_option("--n", crl.n, "N (comma list)");
    c_crl->add_option("--s", crl.s, "s_N (comma list)");
    c_crl->add_option("--tau", crl.tau, "Batch length or auto (= round(s_N))");
    c_crl->add_option("--signal", crl.signal, "Signal noise model");
    c_crl->add_option("--obs", crl.obs, "Observation noise model");
    c_crl->add_option("--regime-c", crl.regime_c, "Warn when tau > c N");

    FisherOpts fo;
    auto *c_fi = app.add_subcommand("fisher-clt", "Standardized Fisher information of batched noise sums");
    c_fi->add_option("--model", fo.model, "Signal noise model");
    c_fi->add_option("--n", fo.n, "N");
    c_fi->add_option("--taus", fo.taus, "Comma-separated batch lengths");
    c_fi->add_option("--points", fo.points, "Grid points (power of two)");

    RegimesOpts ro;
    auto *c_re = app.add_subcommand("regimes", "Closed-form regime map");
    c_re->add_option("--n", ro.n, "N values (comma list)");
    c_re->add_option("--ratios", ro.ratios, "s_N/sqrt(N) values (comma list)");
    c_re->add_option("--signal", ro.signal, "Signal noise model");
    c_re->add_option("--obs", ro.obs, "Observation noise model");
    c_re->add_option("--cutoff", ro.cutoff, "Regime cutoff for >> and <<");

    RatesOpts ra;
    auto *c_ra = app.add_subcommand("rates", "Bias / MSE-gap rate fits across N");
    c_ra->add_option("--signal", ra.signal, "Signal noise model");
    c_ra->add_option("--obs", ra.obs, "Observation noise model");
    c_ra->add_option("--filter", ra.filter, "kf, gf or cgf");
    c_ra->add_option("--n", ra.n, "N values (comma list)");
    c_ra->add_option("--s-rule", ra.s_rule, "sqrtN, nquarter or fixed:<value>");
    c_ra->add_option("--kind", ra.kind, "bias or mse_gap");
    c_ra->add_option("--replications", ra.replications, "Replications per point");
    c_ra->add_option("--horizon-factor", ra.horizon_factor, "Horizon in error time constants");
    c_ra->add_option("--burn-in-factor", ra.burn_in_factor, "Burn-in in mixing times");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*c_sim)
            return cmd_simulate(g, sim);
        if (*c_cmp)
            return cmd_compare(g, cmp);
        if (*c_crl)
            return cmd_crlb(g, crl);
        if (*c_fi)
            return cmd_fisher_clt(g, fo);
        if (*c_re)
            return cmd_regimes(g, ro);
        if (*c_ra)
            return cmd_rates(g, ra);
    } catch (const InvariantViolation &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvariant;
    } catch (const NumericError &e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const ResolutionError &e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const UnreliableOracleError &e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const std::invalid_argument &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const json::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumeric;
    }
    return kExitUsage;
}

int run(const std::vector<std::string> &args) {
    std::vector<const char *> argv{"gfl-cli"};
    for (const auto &a : args)
        argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data());
}

} // namespace gfl::cli
