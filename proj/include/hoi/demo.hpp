#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "hoi/embodiment.hpp"
#include "hoi/model.hpp"

namespace hoi::demo {

enum class TaskKind { kHold, kCarry, kTossCatch, kBiasedHold };

std::string to_string(TaskKind kind);
TaskKind task_from_string(const std::string& name);

// Hand pose target: centre of the hand link and its world angle, with the
// velocity the hand should have when passing through it.
struct HandKeyframe {
  double time = 0.0;
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  double angle = 0.0;
  Eigen::Vector2d velocity = Eigen::Vector2d::Zero();
};

struct DemoScript {
  TaskKind kind = TaskKind::kHold;
  double duration = 2.0;  // seconds
  int fps = 30;
  double release_time = 0.5;
  double catch_time = 1.0;
  Eigen::Vector2d toss_velocity{0.1, 2.45};
  double bias = 0.03;  // ball lift off the hand for biased_hold, metres
  // Explicit hand keyframes; when empty the task's default path is used.
  std::vector<HandKeyframe> keyframes;

  static DemoScript defaults(TaskKind kind);
  void validate() const;
};

nlohmann::json to_json(const DemoScript& script);
DemoScript script_from_json(const nlohmann::json& j);

// Damped least-squares IK of the hand pose with the root held fixed.
struct IkResult {
  std::vector<double> q;
  double position_error = 0.0;
  double angle_error = 0.0;
  bool converged = false;
};
IkResult solve_hand_ik(const Embodiment& body, const Eigen::Vector2d& root_pos,
                       double root_angle, const Eigen::Vector2d& hand_pos,
                       double hand_angle, std::vector<double> initial_q);

// Offset from the hand centre to the resting ball centre, in the hand frame.
// The ball sits towards the fingertips, clear of the forearm.
Eigen::Vector2d ball_offset(const Embodiment& body, double bias = 0.0);

RefHoiSequence generate(const DemoScript& script, const Embodiment& body);

struct LabelFlip {
  int frame = 0;
  int edge = 0;
  std::uint8_t before = 0;
  std::uint8_t after = 0;
};

struct CalibrationResult {
  RefHoiSequence sequence;
  std::vector<LabelFlip> flips;
  double max_penetration = 0.0;  // after settling, metres
};

// Loads every frame into the simulator, settles it and re-reads poses and
// contact labels.
CalibrationResult calibrate(const RefHoiSequence& seq, const Embodiment& body,
                            const physics::SimConfig& config);

}  // namespace hoi::demo
