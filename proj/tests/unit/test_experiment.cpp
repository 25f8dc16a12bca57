#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "hoi/error.hpp"
#include "hoi/experiment.hpp"

using namespace hoi;

TEST(Experiment, JsonRoundTrip) {
  ExperimentConfig c;
  c.seed = 9;
  c.reward.mode = RewardMode::kDeepMimicAdditive;
  c.ppo.iterations = 12;
  c.sim.solver_iterations = 20;
  c.termination.object = 0.4;
  c.sequence_path = "seq.json";
  const auto back = experiment_from_json(to_json(c));
  EXPECT_EQ(back.seed, 9u);
  EXPECT_EQ(back.reward.mode, RewardMode::kDeepMimicAdditive);
  EXPECT_EQ(back.ppo.iterations, 12);
  EXPECT_EQ(back.sim.solver_iterations, 20);
  EXPECT_EQ(back.termination.object, 0.4);
  EXPECT_EQ(to_json(back), to_json(c));
}

TEST(Experiment, UnknownKeysRejected) {
  EXPECT_THROW(experiment_from_json({{"sed", 1}}), Error);
  EXPECT_THROW(experiment_from_json({{"sim", {{"sim_hertz", 60}}}}), Error);
  EXPECT_THROW(experiment_from_json({{"ppo", {{"horizon", 0}}}}), Error);
  EXPECT_THROW(experiment_from_json({{"termination", {{"object", -1}}}}), Error);
}

TEST(Experiment, HashIgnoresOutputDir) {
  ExperimentConfig a, b;
  b.output_dir = "elsewhere";
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.seed = 1;
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
}

TEST(Experiment, RelativeSequenceResolvedAgainstConfig) {
  const auto dir = std::filesystem::temp_directory_path() / "hoi_exp_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "cfg.json";
  std::ofstream(path) << R"({"sequence": "data/hold.json", "seed": 4})";
  const auto c = load_experiment(path.string());
  std::filesystem::remove_all(dir);
  EXPECT_EQ(std::filesystem::path(c.sequence_path), dir / "data/hold.json");
  EXPECT_EQ(c.seed, 4u);
  EXPECT_THROW(load_experiment((dir / "missing.json").string()), Error);
}
