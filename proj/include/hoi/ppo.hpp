#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "hoi/mlp.hpp"
#include "hoi/policy.hpp"

namespace hoi {

struct PpoConfig {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip = 0.2;
  double learning_rate = 3e-4;
  int epochs = 4;
  int minibatch = 64;
  int env_count = 16;
  int horizon = 10;
  int iterations = 3000;
  bool normalize_advantages = true;
  double value_coef = 0.5;
  double entropy_coef = 0.0;
  std::vector<int> hidden{256, 128};
  double init_log_std = -2.995732273553991;  // log(0.05)
  bool learn_log_std = false;
  double max_grad_norm = 1.0;  // <= 0 disables clipping
  bool normalize_observations = true;
  int checkpoint_every = 500;  // iterations; 0 keeps only the final one

  void validate() const;
  bool operator==(const PpoConfig&) const = default;
};

nlohmann::json to_json(const PpoConfig& cfg);
PpoConfig ppo_config_from_json(const nlohmann::json& j);

struct GaeResult {
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;
};

// One trajectory segment. `next_values[t]` is the value used to bootstrap
// step t (zero for an absorbing terminal); `dones[t]` cuts the advantage
// recursion after step t. The recursion also stops at the segment end.
GaeResult compute_gae(std::span<const double> rewards,
                      std::span<const double> values,
                      std::span<const double> next_values,
                      std::span<const std::uint8_t> dones, double gamma,
                      double lambda);

// Samples are columns.
struct PpoBatch {
  Eigen::MatrixXd states;
  Eigen::MatrixXd actions;
  Eigen::VectorXd old_log_probs;
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;

  int size() const { return static_cast<int>(states.cols()); }
};

struct PpoGradient {
  Eigen::VectorXd actor;
  Eigen::VectorXd critic;
  Eigen::VectorXd log_std;

  double norm() const;
  void scale(double s);
};

struct LossStats {
  double total = 0.0;
  double policy = 0.0;
  double value = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
  double grad_norm = 0.0;
};

// Clipped surrogate + value loss - entropy bonus on a batch, with the exact
// gradient when `grad` is given. Advantages are used as stored.
LossStats ppo_loss(const ActorCritic& policy, const PpoBatch& batch,
                   const PpoConfig& cfg, PpoGradient* grad = nullptr);

class PpoOptimizer {
 public:
  PpoOptimizer(const ActorCritic& policy, const PpoConfig& cfg);
  void step(ActorCritic& policy, const PpoGradient& grad);

 private:
  Adam actor_, critic_, log_std_;
  bool learn_log_std_;
};

// Epochs of shuffled minibatch steps; returns loss statistics averaged
// over every minibatch.
LossStats ppo_update(ActorCritic& policy, PpoOptimizer& optimizer,
                     PpoBatch batch, const PpoConfig& cfg,
                     std::mt19937_64& rng);

}  // namespace hoi
