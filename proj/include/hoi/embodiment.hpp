#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "hoi/model.hpp"
#include "hoi/physics2d.hpp"
#include "hoi/root_frame.hpp"

namespace hoi {

// Binds a simulated articulated model and disc to the HOI representation:
// one body per link, one object (the disc), contact bodies picked from the
// links, and a three-node hands / ball / rest-body contact graph.
struct Embodiment {
  physics::ArticulatedModel model;
  physics::DiscObject disc;
  std::vector<int> contact_links;

  static Embodiment toy_arm();

  BodyLayout layout() const;
  AggregationMap aggregation() const;
  std::vector<std::string> object_names() const { return {disc.name}; }
  void validate() const;
};

nlohmann::json to_json(const Embodiment& e);
Embodiment embodiment_from_json(const nlohmann::json& j);

// Sets link and disc poses from a reference frame (velocities converted
// from per-frame deltas to rates with the sequence fps), then runs the
// settle pass unless `settle` is false.
physics::WorldState reset_to_frame(const physics::Simulator& sim,
                                   const RefHoiSequence& seq,
                                   int frame_index = 0, bool settle = true);

// HOI frame of the simulated world in world coordinates. Velocities are the
// differences to `previous`, mirroring how reference velocities are built.
HoiState observe_world(const physics::Simulator& sim, const Embodiment& body,
                       const physics::WorldState& now,
                       const physics::WorldState& previous);

RootPose root_pose(const physics::WorldState& world);

// Joint angles (from rest) implied by the body rotations of a reference
// frame; the open-loop PD targets that track it.
std::vector<double> reference_joint_angles(const Embodiment& body,
                                           const RefHoiState& frame);

// Root-local observation of the simulated state (root height, local motion,
// contact-body forces, local object motion).
SimHoiState observe_local(const physics::Simulator& sim, const Embodiment& body,
                          const physics::WorldState& now,
                          const physics::WorldState& previous);

}  // namespace hoi
