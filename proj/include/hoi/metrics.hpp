#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "hoi/env.hpp"
#include "hoi/experiment.hpp"
#include "hoi/model.hpp"
#include "hoi/policy.hpp"

namespace hoi {

struct SuccessThresholds {
  double object = 0.2;  // metres
  double body = 0.1;    // metres, mean over bodies
};

bool frame_success(const HoiState& sim, const HoiState& ref,
                   const SuccessThresholds& thresholds = {});

// Mean Euclidean distance over frames and rows, in millimetres.
double mpjpe(std::span<const Eigen::MatrixXd> sim,
             std::span<const Eigen::MatrixXd> ref);

// Mean over frames of the per-frame mean squared edge difference.
double contact_accuracy(const std::vector<std::vector<std::uint8_t>>& sim,
                        const std::vector<std::vector<std::uint8_t>>& ref);

// Simulated HOI states for frames 0..T-1 of one rollout. Frames from
// `diverged_at` on have no state.
struct Rollout {
  std::vector<HoiState> states;
  std::vector<double> penetration;  // per recorded frame, metres
  int diverged_at = -1;
  TerminationReason reason = TerminationReason::kNone;
};

// Deterministic (policy mean) rollout over the whole sequence, without
// early termination.
Rollout rollout_policy(const ActorCritic& policy, const RefHoiSequence& seq,
                       const ExperimentConfig& cfg);

// Loads every reference frame into the simulator (settled) and reads the
// HOI state back, contacts included.
Rollout kinematic_replay(const RefHoiSequence& seq, const Embodiment& body,
                         const physics::SimConfig& sim);

struct FrameRecord {
  int repeat = 0;
  int frame = 0;
  bool success = false;
  bool diverged = false;
  double body_err = 0.0;  // metres
  double obj_err = 0.0;   // metres
  double cg_err = 0.0;    // mean squared edge difference
};

struct EvalReport {
  double succ = 0.0;
  double e_b_mpjpe = 0.0;  // mm
  double e_o_mpjpe = 0.0;  // mm
  double e_cg = 0.0;
  std::vector<std::uint8_t> success_mask;  // one per scored frame and repeat
  int episodes = 0;
  std::array<int, kTerminationReasonCount> terminations{};
  std::vector<FrameRecord> frames;
};

// Scores frames 1..T-1 of each rollout against the reference. Diverged
// frames count as failures with every edge wrong and are left out of the
// MPJPE means.
EvalReport score_rollouts(const std::vector<Rollout>& rollouts,
                          const RefHoiSequence& seq,
                          const SuccessThresholds& thresholds = {});

EvalReport evaluate(const ActorCritic& policy, const RefHoiSequence& seq,
                    const ExperimentConfig& cfg, int repeats = 10,
                    int workers = 0);

nlohmann::json to_json(const EvalReport& report);
void write_frame_csv(const EvalReport& report, const std::string& path);

struct RectifiedExport {
  RefHoiSequence sequence;
  double max_penetration = 0.0;
  int frames_over_slop = 0;
};

// Records the policy rollout as a new HOI sequence (poses and contact
// labels read from the simulator) and writes it when `out_path` is set.
RectifiedExport export_rectified(const ActorCritic& policy,
                                 const RefHoiSequence& seq,
                                 const ExperimentConfig& cfg,
                                 const std::string& out_path = "");

}  // namespace hoi
