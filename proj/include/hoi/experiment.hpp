#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "hoi/embodiment.hpp"
#include "hoi/env.hpp"
#include "hoi/physics2d.hpp"
#include "hoi/ppo.hpp"
#include "hoi/reward.hpp"

namespace hoi {

// Everything a training run depends on. JSON layout:
//   {"sim": {<SimConfig keys>, "embodiment": {...}},
//    "reward": {"mode": ..., "lambda": {...}},
//    "ppo": {...}, "termination": {"object": .., "body": ..},
//    "sequence": "path.json", "seed": 0, "output_dir": "runs/x"}
// Every block is optional and falls back to defaults; unknown keys are
// rejected.
struct ExperimentConfig {
  Embodiment embodiment = Embodiment::toy_arm();
  physics::SimConfig sim;
  RewardConfig reward;
  PpoConfig ppo;
  TerminationThresholds termination;
  std::string sequence_path;
  std::uint64_t seed = 0;
  std::string output_dir;

  void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& cfg);
ExperimentConfig experiment_from_json(const nlohmann::json& j);

// Relative sequence paths are resolved against the config file's directory.
ExperimentConfig load_experiment(const std::string& path);

// FNV-1a over the canonical JSON, ignoring the output directory.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace hoi
