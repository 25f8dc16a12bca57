#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "hoi/env.hpp"
#include "hoi/experiment.hpp"
#include "hoi/policy.hpp"
#include "hoi/ppo.hpp"

namespace hoi {

struct IterationLog {
  int iteration = 0;
  int env_steps = 0;
  int episodes = 0;  // episodes that ended during the iteration
  double mean_episode_length = 0.0;
  int max_episode_length = 0;
  RewardBreakdown mean_reward;  // channel means over non-diverged steps
  std::array<int, kTerminationReasonCount> terminations{};
  int diverged_envs = 0;
  LossStats loss;
  double mean_std = 0.0;
};

std::string training_log_header();
std::string to_csv_row(const IterationLog& log);

struct TrainOptions {
  // When non-empty: training_log.csv, config.json and checkpoints go here.
  std::string output_dir;
  // Rollout threads; 0 reads HOI_NUM_WORKERS, falling back to the core count.
  int workers = 0;
  std::function<void(const IterationLog&)> on_iteration;
};

struct TrainResult {
  ActorCritic policy;
  std::vector<IterationLog> log;
  std::string config_hash;
};

// Worker count from HOI_NUM_WORKERS or the hardware, at least 1.
int default_worker_count();

TrainResult train(const RefHoiSequence& seq, const ExperimentConfig& cfg,
                  const TrainOptions& options = {});

}  // namespace hoi
