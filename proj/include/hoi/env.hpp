#pragma once

#include <memory>
#include <string>

#include <Eigen/Dense>
#include <json.hpp>

#include "hoi/embodiment.hpp"
#include "hoi/model.hpp"
#include "hoi/physics2d.hpp"
#include "hoi/reward.hpp"
#include "hoi/root_frame.hpp"

namespace hoi {

enum class TerminationReason {
  kNone,
  kMaxTime,
  kObjectDeviation,
  kBodyDeviation,
  kDiverged
};
inline constexpr int kTerminationReasonCount = 5;

std::string to_string(TerminationReason reason);

struct TerminationThresholds {
  double object = 0.5;  // metres
  double body = 0.5;    // metres, mean over bodies

  void validate() const;
  bool operator==(const TerminationThresholds&) const = default;
};

nlohmann::json to_json(const TerminationThresholds& t);
TerminationThresholds thresholds_from_json(const nlohmann::json& j);

struct TerminationCheck {
  bool done = false;
  TerminationReason reason = TerminationReason::kNone;
};

// `t` is the env clock after the step; checks max time, then object error,
// then mean body error.
TerminationCheck check_termination(int t, int frame_count, double object_error,
                                   double body_error,
                                   const TerminationThresholds& thresholds);

// Largest object position error and mean body position error.
double object_position_error(const HoiState& sim, const HoiState& ref);
double body_position_error(const HoiState& sim, const HoiState& ref);

// [sim observation | ref body | ref object | ref IG | ref CG], reference
// quantities mapped into the simulated root frame.
Eigen::VectorXd build_state(const SimHoiState& sim, const RefHoiState& ref_next,
                            const RootPose& root);

int state_dimension(const BodyLayout& layout, int object_count, int edge_count);

struct EnvStep {
  Eigen::VectorXd state;  // observation after the step
  RewardBreakdown reward;
  HoiState sim;           // world-frame HOI state after the step
  double object_error = 0.0;
  double body_error = 0.0;
  bool done = false;
  TerminationReason reason = TerminationReason::kNone;
  int frame = 0;  // reference frame the step was scored against
};

// One imitation episode over a reference sequence. The clock starts at
// frame 0; each step advances the simulator to frame t+1 and scores it
// against reference frame t+1.
class HoiEnv {
 public:
  HoiEnv(std::shared_ptr<const RefHoiSequence> seq, Embodiment body,
         physics::SimConfig sim_config, RewardConfig reward,
         TerminationThresholds thresholds, bool early_termination = true);

  Eigen::VectorXd reset();
  EnvStep step(const Eigen::VectorXd& action);

  int t() const { return t_; }
  bool done() const { return done_; }
  int state_dim() const { return state_dim_; }
  int action_dim() const { return sim_.model().dof(); }
  int frame_count() const { return seq_->frame_count(); }
  const physics::WorldState& world() const { return world_; }
  const physics::Simulator& simulator() const { return sim_; }
  const Embodiment& embodiment() const { return body_; }
  const RefHoiSequence& sequence() const { return *seq_; }
  // World-frame HOI state of the current simulator state.
  HoiState observe() const;

 private:
  Eigen::VectorXd state() const;

  std::shared_ptr<const RefHoiSequence> seq_;
  Embodiment body_;
  physics::Simulator sim_;
  RewardConfig reward_;
  TerminationThresholds thresholds_;
  bool early_termination_;
  physics::WorldState initial_;
  physics::WorldState world_;
  physics::WorldState previous_;
  int t_ = 0;
  bool done_ = true;
  int state_dim_ = 0;
};

}  // namespace hoi
