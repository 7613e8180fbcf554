#pragma once

#include "tween/manifold/trainer.hpp"
#include "tween/sampler/trainer.hpp"

#include <filesystem>
#include <string>

namespace tween::cli {

/// Everything a training or evaluation run needs. Unspecified fields keep the
/// library defaults, which follow the paper's hyperparameters.
struct RunConfig {
  std::filesystem::path corpus;  // manifest; relative paths resolve against the config file
  std::string style = "lafan";   // "lafan" (30 Hz, 22 joints) or "h36m" (25 Hz, 21 joints)
  std::string test_subject;      // held out of training; empty trains on everything
  std::filesystem::path out = "run";
  std::uint64_t seed = 1;
  long checkpoint_every = 1000;

  manifold::ManifoldConfig manifold;
  manifold::ManifoldTrainConfig manifold_training;
  sampler::SamplerConfig sampler;
  sampler::SamplerTrainConfig sampler_training;

  /// Propagates `seed` into both training configurations.
  void set_seed(std::uint64_t s);
  void validate() const;
};

/// Parses a JSON config. Unknown keys are errors. Throws std::runtime_error
/// with the offending key in the message.
RunConfig parse_run_config(const std::string& json_text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);
/// JSON rendering of every field (the documented schema with values).
std::string run_config_json(const RunConfig& c);

}  // namespace tween::cli
