#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hoi/model.hpp"

namespace hoi {

// Sensitivities of the exponential reward channels. `cg` holds one weight
// per contact-graph edge in edge_index order.
struct RewardWeights {
  double p = 50.0;
  double r = 20.0;
  double pv = 0.01;
  double rv = 0.01;
  double op = 1.0;
  double or_ = 0.0;
  double opv = 0.01;
  double orv = 0.0;
  double ig = 20.0;
  std::vector<double> cg{5.0, 5.0, 5.0};

  // Ball-play and grasp presets; ball play is the default.
  static RewardWeights ball_play();
  static RewardWeights grab();

  void validate(int edge_count) const;
  bool operator==(const RewardWeights&) const = default;
};

enum class RewardMode {
  kMultiplicative,    // r_b * r_o * r_ig * r_cg
  kKinematicOnly,     // r_b * r_o * r_ig
  kKinematicNoIg,     // r_b * r_o
  kDeepMimicAdditive  // uniform mean of the eight body/object channels
};

std::string to_string(RewardMode mode);
RewardMode reward_mode_from_string(const std::string& name);

struct RewardBreakdown {
  double r_p = 1, r_r = 1, r_pv = 1, r_rv = 1, r_b = 1;
  double r_op = 1, r_or = 1, r_opv = 1, r_orv = 1, r_o = 1;
  double r_ig = 1, r_cg = 1;
  double r_total = 1;
};

struct ChannelRewards {
  double pos = 1, rot = 1, pos_vel = 1, rot_vel = 1;
  double product = 1;
};

double exp_reward(double error, double lambda);

ChannelRewards body_reward(const BodyMotion& sim, const BodyMotion& ref,
                           const RewardWeights& w);
ChannelRewards object_reward(const ObjectMotion& sim, const ObjectMotion& ref,
                             const RewardWeights& w);
double ig_reward(const InteractionGraphState& sim,
                 const InteractionGraphState& ref, double lambda_ig);
double cg_reward(std::span<const std::uint8_t> e_cg,
                 std::span<const double> lambda_cg);

// Every channel is evaluated regardless of mode; the mode only decides how
// r_total is composed.
RewardBreakdown total_reward(const HoiState& sim, const RefHoiState& ref,
                             const RewardWeights& w, RewardMode mode);

// {"mode": "...", "lambda": {"p": .., ..., "cg": [..]}}
struct RewardConfig {
  RewardMode mode = RewardMode::kMultiplicative;
  RewardWeights weights;
};
RewardConfig reward_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RewardConfig& cfg);

}  // namespace hoi
