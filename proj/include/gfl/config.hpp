// JSON experiment configuration: parsing, validation and the canonical form
// used for run digests.
//
// {
//   "N": 10000, "s_N": 100,
//   "signal_noise": "gaussian",
//   "obs_noise": {"family": "student_t", "dof": 5},
//   "horizon": 100000, "burn_in": 30000, "replications": 200,
//   "filters": ["kf", "gf", "cgf", "trivial_mean", "trivial_obs", "naive_batch:100"],
//   "seed": 1, "tau": "auto", "gain_mode": "recursive",
//   "oracle_particles": 0, "resample_threshold": 0.5
// }
#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "gfl/harness.hpp"

namespace gfl {

class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// "gaussian", "logistic", "student_t5", or an object with key "family" and,
/// per family, "dof" or "weights"/"means"/"sigmas".
NoiseModel noise_model_from_json(const nlohmann::json &j);
nlohmann::json noise_model_to_json(const NoiseModel &model);

/// "kf", "gf", "cgf", "trivial_mean", "trivial_obs", "naive_batch:<tau>".
FilterMode filter_mode_from_string(const std::string &text);
std::string filter_mode_to_string(const FilterMode &mode);

/// Unknown keys are rejected. burn_in defaults to default_burn_in(params).
ExperimentConfig experiment_config_from_json(const nlohmann::json &j);
/// Fully resolved config with every key present; object keys sort, so the
/// dump is canonical.
nlohmann::json experiment_config_to_json(const ExperimentConfig &config);

ExperimentConfig load_experiment_config(const std::string &path);

} // namespace gfl
