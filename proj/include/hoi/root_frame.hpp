#pragma once

#include <Eigen/Dense>

#include "hoi/model.hpp"

namespace hoi {

struct RootPose {
  Eigen::VectorXd position;     // spatial_dim
  Eigen::VectorXd orientation;  // rotation feature
};

// Heading-only frame attached to the root: translate by -root position, then
// rotate by -heading (planar angle in 2D, yaw about +z in 3D). Height is the
// last spatial coordinate and is also reported globally.
class RootFrame {
 public:
  explicit RootFrame(const RootPose& pose);

  int spatial_dim() const { return static_cast<int>(origin_.size()); }
  double heading() const { return heading_; }
  double root_height() const { return origin_[origin_.size() - 1]; }

  // Row-wise transforms; one entity per row.
  Eigen::MatrixXd points(const Eigen::MatrixXd& world) const;
  Eigen::MatrixXd vectors(const Eigen::MatrixXd& world) const;
  Eigen::MatrixXd features(const Eigen::MatrixXd& world) const;
  Motion motion(const Motion& world) const;

  Eigen::MatrixXd points_to_world(const Eigen::MatrixXd& local) const;
  Eigen::MatrixXd vectors_to_world(const Eigen::MatrixXd& local) const;
  Eigen::MatrixXd features_to_world(const Eigen::MatrixXd& local) const;

 private:
  Eigen::MatrixXd rotate_rows(const Eigen::MatrixXd& rows,
                              const Eigen::MatrixXd& rot) const;
  Eigen::MatrixXd rotate_features(const Eigen::MatrixXd& rows,
                                  const Eigen::MatrixXd& rot) const;

  Eigen::VectorXd origin_;
  double heading_ = 0.0;
  Eigen::MatrixXd to_local_;  // spatial_dim x spatial_dim
};

// Raw simulator readout in world coordinates. Velocities are per-frame
// deltas so they compare directly against reference velocities.
struct WorldReadout {
  Motion body;
  Motion object;
  Eigen::MatrixXd contact_forces;  // contact_count x spatial_dim, Newtons
};

struct SimHoiState {
  double root_height = 0.0;
  Motion body;                     // root-local
  Eigen::MatrixXd contact_forces;  // root-local
  Motion object;                   // root-local

  int flat_size() const;
  void append_to(Eigen::VectorXd& out, int& offset) const;
};

SimHoiState to_root_local(const WorldReadout& world, const RootPose& root);
WorldReadout from_root_local(const SimHoiState& local, const RootPose& root);

}  // namespace hoi
