#include "hoi/experiment.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "hoi/error.hpp"

namespace hoi {

void ExperimentConfig::validate() const {
  embodiment.validate();
  sim.validate();
  ppo.validate();
  termination.validate();
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  nlohmann::json sim = physics::to_json(cfg.sim);
  sim["embodiment"] = to_json(cfg.embodiment);
  return {{"sim", sim},
          {"reward", to_json(cfg.reward)},
          {"ppo", to_json(cfg.ppo)},
          {"termination", to_json(cfg.termination)},
          {"sequence", cfg.sequence_path},
          {"seed", cfg.seed},
          {"output_dir", cfg.output_dir}};
}

ExperimentConfig experiment_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::kSchema, "experiment config must be an object");
  for (const auto& [key, _] : j.items()) {
    if (key != "sim" && key != "reward" && key != "ppo" && key != "termination" &&
        key != "sequence" && key != "seed" && key != "output_dir") {
      throw Error(ErrorKind::kSchema, "unknown key '" + key + "' in experiment config");
    }
  }
  ExperimentConfig cfg;
  try {
    if (j.contains("sim")) {
      nlohmann::json sim = j.at("sim");
      if (sim.contains("embodiment")) {
        cfg.embodiment = embodiment_from_json(sim.at("embodiment"));
        sim.erase("embodiment");
      }
      cfg.sim = physics::sim_config_from_json(sim);
    }
    if (j.contains("reward")) cfg.reward = reward_config_from_json(j.at("reward"));
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("ppo")) cfg.ppo = ppo_config_from_json(j.at("ppo"));
    if (j.contains("termination")) {
      cfg.termination = thresholds_from_json(j.at("termination"));
    }
    cfg.sequence_path = j.value("sequence", cfg.sequence_path);
    cfg.output_dir = j.value("output_dir", cfg.output_dir);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kSchema, std::string("experiment config: ") + e.what());
  }
  cfg.reward.weights.validate(
      static_cast<int>(cfg.embodiment.aggregation().node_names.size() *
                       (cfg.embodiment.aggregation().node_names.size() - 1) / 2));
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open config " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kSchema, path + ": " + e.what());
  }
  ExperimentConfig cfg = experiment_from_json(j);
  if (!cfg.sequence_path.empty()) {
    std::filesystem::path seq(cfg.sequence_path);
    if (seq.is_relative()) {
      cfg.sequence_path =
          (std::filesystem::path(path).parent_path() / seq).lexically_normal().string();
    }
  }
  return cfg;
}

std::string config_hash(const ExperimentConfig& cfg) {
  nlohmann::json j = to_json(cfg);
  j.erase("output_dir");
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace hoi
