#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hoi/contact_graph.hpp"

namespace hoi {

// Describes the articulated subject independently of the simulator. The toy
// planar arm and a full 52-body humanoid both fit in this type.
struct BodyLayout {
  int body_count = 0;
  int actuated_dof = 0;
  int spatial_dim = 2;
  int rot_feature_dim = 2;
  std::vector<std::string> body_names;
  std::vector<int> contact_body_indices;

  int contact_count() const {
    return static_cast<int>(contact_body_indices.size());
  }
  void validate() const;

  bool operator==(const BodyLayout&) const = default;
};

// Pose and per-frame deltas of a set of entities; one row per entity.
// Velocities are differences between consecutive frames, not rates.
struct Motion {
  Eigen::MatrixXd pos;      // n x spatial_dim
  Eigen::MatrixXd rot;      // n x rot_feature_dim
  Eigen::MatrixXd pos_vel;  // n x spatial_dim
  Eigen::MatrixXd rot_vel;  // n x rot_feature_dim

  static Motion zeros(int rows, int spatial_dim, int rot_dim);
  int rows() const { return static_cast<int>(pos.rows()); }
  bool operator==(const Motion& other) const;
};

using BodyMotion = Motion;
using ObjectMotion = Motion;

// Vectors from every object to every contact body; row i * object_count + j
// holds body i minus object j.
struct InteractionGraphState {
  Eigen::MatrixXd vectors;
  int contact_count = 0;
  int object_count = 0;

  bool operator==(const InteractionGraphState& other) const;
};

// One HOI frame: body motion, object motion, interaction graph and contact
// graph edges. Reference frames and simulated frames share this shape.
struct HoiState {
  BodyMotion body;
  ObjectMotion object;
  InteractionGraphState ig;
  std::vector<std::uint8_t> cg_edges;

  bool operator==(const HoiState&) const = default;
};

using RefHoiState = HoiState;

struct RefHoiSequence {
  BodyLayout layout;
  int fps = 30;
  AggregationMap cg;
  std::vector<std::string> object_names;
  std::vector<RefHoiState> frames;

  int frame_count() const { return static_cast<int>(frames.size()); }
  int object_count() const { return static_cast<int>(object_names.size()); }

  bool operator==(const RefHoiSequence&) const = default;
};

struct FrameDeltas {
  std::vector<Eigen::MatrixXd> pos_vel;
  std::vector<Eigen::MatrixXd> rot_vel;
};

// vel[t] = value[t] - value[t-1], vel[0] = 0.
FrameDeltas compute_velocities(std::span<const Eigen::MatrixXd> positions,
                               std::span<const Eigen::MatrixXd> rotations);

InteractionGraphState compute_ig(const Eigen::MatrixXd& body_positions,
                                 const Eigen::MatrixXd& object_positions,
                                 std::span<const int> contact_body_indices);

// Mean of squared elementwise differences over every element.
double mse(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

// Recomputes velocities and the interaction graph of every frame from the
// stored poses.
void refresh_derived(RefHoiSequence& seq);

struct ValidationReport {
  std::vector<std::string> warnings;
};

// Throws on structural violations (dimensions, non-binary edges, invalid
// rotation features); returns soft findings as warnings.
ValidationReport validate_sequence(const RefHoiSequence& seq);

}  // namespace hoi
