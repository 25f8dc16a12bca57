#pragma once

#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "hoi/mlp.hpp"

namespace hoi {

// Running mean and variance of policy inputs (parallel Welford merge).
// Normalised inputs are clipped to +-clip.
struct ObsNormalizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd var;
  double count = 0.0;
  double clip = 5.0;
  bool enabled = true;

  static ObsNormalizer identity(int dim, bool enabled = true);
  void update(const Eigen::MatrixXd& states);  // one state per column
  Eigen::MatrixXd apply(const Eigen::MatrixXd& states) const;
};

nlohmann::json to_json(const ObsNormalizer& n);
ObsNormalizer normalizer_from_json(const nlohmann::json& j);

// Diagonal Gaussian log density.
double gaussian_log_prob(const Eigen::VectorXd& mean,
                         const Eigen::VectorXd& log_std,
                         const Eigen::VectorXd& x);

struct ActionSample {
  Eigen::VectorXd action;
  Eigen::VectorXd mean;
  double log_prob = 0.0;
};

// Gaussian policy with a state-independent log-std and a separate value
// network of the same hidden shape.
struct ActorCritic {
  Mlp actor;
  Mlp critic;
  Eigen::VectorXd log_std;
  ObsNormalizer normalizer;

  static ActorCritic create(int state_dim, int action_dim,
                            const std::vector<int>& hidden, double init_log_std,
                            bool normalize_observations, std::mt19937_64& rng);

  int state_dim() const { return actor.input_dim(); }
  int action_dim() const { return actor.output_dim(); }

  Eigen::VectorXd mean(const Eigen::VectorXd& state) const;
  double value(const Eigen::VectorXd& state) const;
  // mean + sigma * eps with eps drawn from `rng`.
  ActionSample sample_action(const Eigen::VectorXd& state,
                             std::mt19937_64& rng) const;
  ActionSample deterministic_action(const Eigen::VectorXd& state) const;
};

nlohmann::json to_json(const ActorCritic& p);
ActorCritic actor_critic_from_json(const nlohmann::json& j);

struct Checkpoint {
  ActorCritic policy;
  int iteration = 0;
  std::string config_hash;
  nlohmann::json experiment;  // the experiment config that produced it
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace hoi
