#include "gfl/config.hpp"

#include <fstream>
#include <set>

#include <fmt/format.h>

namespace gfl {

using nlohmann::json;

namespace {

template <class T>
T get_as(const json &j, const char *key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception &e) {
        throw ConfigError(fmt::format("config key '{}': {}", key, e.what()));
    }
}

std::size_t get_count(const json &j, const char *key) {
    const auto &v = j.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0)
        throw ConfigError(fmt::format("config key '{}' must be a nonnegative integer", key));
    return v.get<std::size_t>();
}

} // namespace

NoiseModel noise_model_from_json(const json &j) {
    try {
        if (j.is_string()) {
            const auto name = j.get<std::string>();
            if (name == "gaussian")
                return NoiseModel::gaussian();
            if (name == "logistic")
                return NoiseModel::logistic();
            if (name.rfind("student_t", 0) == 0 && name.size() > 9)
                return NoiseModel::student_t(std::stoi(name.substr(9)));
            throw ConfigError("unknown noise model '" + name + "'");
        }
        if (!j.is_object())
            throw ConfigError("noise model must be a string or an object");
        const auto family = get_as<std::string>(j, "family");
        if (family == "gaussian")
            return NoiseModel::gaussian();
        if (family == "logistic")
            return NoiseModel::logistic();
        if (family == "student_t")
            return NoiseModel::student_t(get_as<int>(j, "dof"));
        if (family == "gaussian_mixture")
            return NoiseModel::gaussian_mixture(get_as<std::vector<double>>(j, "weights"),
                                                get_as<std::vector<double>>(j, "means"),
                                                get_as<std::vector<double>>(j, "sigmas"));
        throw ConfigError("unknown noise family '" + family + "'");
    } catch (const ConfigError &) {
        throw;
    } catch (const std::exception &e) {
        throw ConfigError(std::string("invalid noise model: ") + e.what());
    }
}

json noise_model_to_json(const NoiseModel &model) {
    json j;
    j["family"] = std::string(family_name(model.family()));
    if (model.family() == NoiseFamily::StudentT)
        j["dof"] = model.dof();
    if (model.family() == NoiseFamily::GaussianMixture) {
        j["weights"] = model.mixture().weights;
        j["means"] = model.mixture().means;
        j["sigmas"] = model.mixture().sigmas;
    }
    return j;
}

FilterMode filter_mode_from_string(const std::string &text) {
    const auto colon = text.find(':');
    const std::string head = text.substr(0, colon);
    FilterKind kind;
    try {
        kind = parse_filter_kind(head);
    } catch (const std::invalid_argument &e) {
        throw ConfigError(e.what());
    }
    if (kind == FilterKind::NaiveBatch) {
        if (colon == std::string::npos)
            throw ConfigError("naive_batch needs a batch length, e.g. naive_batch:100");
        std::size_t tau = 0;
        try {
            tau = std::stoul(text.substr(colon + 1));
        } catch (const std::exception &) {
            throw ConfigError("naive_batch length must be a positive integer");
        }
        return FilterMode::naive_batch(tau);
    }
    if (colon != std::string::npos)
        throw ConfigError("only naive_batch takes a parameter: '" + text + "'");
    return {kind, 0};
}

std::string filter_mode_to_string(const FilterMode &mode) {
    if (mode.kind == FilterKind::NaiveBatch)
        return fmt::format("naive_batch:{}", mode.tau);
    return std::string(filter_name(mode.kind));
}

ExperimentConfig experiment_config_from_json(const json &j) {
    if (!j.is_object())
        throw ConfigError("config must be a JSON object");
    static const std::set<std::string> known = {
        "N",    "s_N",       "signal_noise",     "obs_noise",         "horizon", "burn_in",
        "replications", "filters", "seed", "tau", "gain_mode", "oracle_particles", "resample_threshold"};
    for (const auto &[key, _] : j.items())
        if (!known.count(key))
            throw ConfigError("unknown config key '" + key + "'");
    for (const char *req : {"N", "s_N", "horizon", "replications"})
        if (!j.contains(req))
            throw ConfigError(fmt::format("config key '{}' is required", req));

    const auto N = get_as<std::int64_t>(j, "N");
    const auto s = get_as<double>(j, "s_N");
    const auto signal = j.contains("signal_noise") ? noise_model_from_json(j["signal_noise"]) : NoiseModel::gaussian();
    const auto obs = j.contains("obs_noise") ? noise_model_from_json(j["obs_noise"]) : NoiseModel::gaussian();
    std::optional<SystemParams> params;
    try {
        params.emplace(N, s, signal, obs);
    } catch (const std::invalid_argument &e) {
        throw ConfigError(e.what());
    }

    ExperimentConfig c{*params};
    c.horizon = get_count(j, "horizon");
    c.burn_in = j.contains("burn_in") ? get_count(j, "burn_in") : default_burn_in(*params);
    c.replications = get_count(j, "replications");
    if (j.contains("filters")) {
        for (const auto &f : j["filters"]) {
            if (!f.is_string())
                throw ConfigError("filters must be strings");
            c.filters.push_back(filter_mode_from_string(f.get<std::string>()));
        }
    } else {
        c.filters = {{FilterKind::KF, 0}, {FilterKind::GF, 0}};
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<long long>() >= 0))
            throw ConfigError("config key 'seed' must be a nonnegative integer");
        c.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("tau") && !(j["tau"].is_string() && j["tau"].get<std::string>() == "auto")) {
        const auto tau = get_count(j, "tau");
        if (tau == 0)
            throw ConfigError("tau must be >= 1 or \"auto\"");
        c.tau_override = tau;
    }
    if (j.contains("gain_mode")) {
        try {
            c.gain_mode = parse_gain_mode(get_as<std::string>(j, "gain_mode"));
        } catch (const std::invalid_argument &e) {
            throw ConfigError(e.what());
        }
    }
    if (j.contains("oracle_particles"))
        c.oracle_particles = get_count(j, "oracle_particles");
    if (j.contains("resample_threshold"))
        c.resample_threshold = get_as<double>(j, "resample_threshold");
    try {
        c.validate();
    } catch (const std::invalid_argument &e) {
        throw ConfigError(e.what());
    }
    return c;
}

json experiment_config_to_json(const ExperimentConfig &c) {
    json j;
    j["N"] = c.params.N;
    j["s_N"] = c.params.s_N;
    j["signal_noise"] = noise_model_to_json(c.params.signal_noise);
    j["obs_noise"] = noise_model_to_json(c.params.obs_noise);
    j["horizon"] = c.horizon;
    j["burn_in"] = c.burn_in;
    j["replications"] = c.replications;
    json filters = json::array();
    for (const auto &f : c.filters)
        filters.push_back(filter_mode_to_string(f));
    j["filters"] = filters;
    j["seed"] = c.seed;
    if (c.tau_override)
        j["tau"] = *c.tau_override;
    else
        j["tau"] = "auto";
    j["gain_mode"] = std::string(gain_mode_name(c.gain_mode));
    j["oracle_particles"] = c.oracle_particles;
    j["resample_threshold"] = c.resample_threshold;
    return j;
}

ExperimentConfig load_experiment_config(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception &e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    return experiment_config_from_json(j);
}

} // namespace gfl
