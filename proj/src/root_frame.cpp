#include "hoi/root_frame.hpp"

#include <cmath>

#include "hoi/error.hpp"
#include "hoi/rotation.hpp"

namespace hoi {

namespace {

Eigen::MatrixXd planar_rotation(double angle) {
  Eigen::MatrixXd r(2, 2);
  const double c = std::cos(angle), s = std::sin(angle);
  r << c, -s, s, c;
  return r;
}

Eigen::MatrixXd yaw_rotation(double angle) {
  Eigen::MatrixXd r = Eigen::MatrixXd::Identity(3, 3);
  r.topLeftCorner(2, 2) = planar_rotation(angle);
  return r;
}

void append_block(Eigen::VectorXd& out, int& offset, const Eigen::MatrixXd& m) {
  // Entity-major: all fields of row 0, then row 1, ...
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) out[offset++] = m(r, c);
  }
}

}  // namespace

RootFrame::RootFrame(const RootPose& pose) : origin_(pose.position) {
  const auto dim = origin_.size();
  if (dim != 2 && dim != 3) {
    throw Error(ErrorKind::kInvalidArgument, "root position must be 2D or 3D");
  }
  if (!pose.orientation.allFinite() || !origin_.allFinite()) {
    throw Error(ErrorKind::kNonFinite, "root pose is not finite");
  }
  if (dim == 2) {
    if (pose.orientation.size() != 2) {
      throw Error(ErrorKind::kDimensionMismatch,
                  "planar root orientation needs 2 features");
    }
    if (pose.orientation.norm() < 1e-12) {
      throw Error(ErrorKind::kDegenerateRotation,
                  "root orientation has zero norm");
    }
    heading_ = std::atan2(pose.orientation[1], pose.orientation[0]);
    to_local_ = planar_rotation(-heading_);
  } else {
    if (pose.orientation.size() != 6) {
      throw Error(ErrorKind::kDimensionMismatch,
                  "3D root orientation needs 6 features");
    }
    const Eigen::Matrix3d rot =
        decode_rotation(Vector6d(pose.orientation.head<6>()));
    const double hx = rot(0, 0), hy = rot(1, 0);
    if (std::hypot(hx, hy) < 1e-9) {
      throw Error(ErrorKind::kDegenerateRotation,
                  "root heading undefined (forward axis is vertical)");
    }
    heading_ = std::atan2(hy, hx);
    to_local_ = yaw_rotation(-heading_);
  }
}

Eigen::MatrixXd RootFrame::rotate_rows(const Eigen::MatrixXd& rows,
                                       const Eigen::MatrixXd& rot) const {
  if (rows.cols() != rot.rows()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "vector rows have " + std::to_string(rows.cols()) +
                    " columns, frame is " + std::to_string(rot.rows()) + "D");
  }
  return rows * rot.transpose();
}

Eigen::MatrixXd RootFrame::rotate_features(const Eigen::MatrixXd& rows,
                                           const Eigen::MatrixXd& rot) const {
  const auto dim = rot.rows();
  if (rows.cols() == dim) return rotate_rows(rows, rot);
  if (dim == 3 && rows.cols() == 6) {
    Eigen::MatrixXd out(rows.rows(), 6);
    out.leftCols(3) = rows.leftCols(3) * rot.transpose();
    out.rightCols(3) = rows.rightCols(3) * rot.transpose();
    return out;
  }
  throw Error(ErrorKind::kDimensionMismatch,
              "rotation features have " + std::to_string(rows.cols()) +
                  " columns for a " + std::to_string(dim) + "D frame");
}

Eigen::MatrixXd RootFrame::points(const Eigen::MatrixXd& world) const {
  Eigen::MatrixXd shifted = world;
  if (world.cols() != origin_.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "point dimension mismatch");
  }
  shifted.rowwise() -= origin_.transpose();
  return rotate_rows(shifted, to_local_);
}

Eigen::MatrixXd RootFrame::vectors(const Eigen::MatrixXd& world) const {
  return rotate_rows(world, to_local_);
}

Eigen::MatrixXd RootFrame::features(const Eigen::MatrixXd& world) const {
  return rotate_features(world, to_local_);
}

Motion RootFrame::motion(const Motion& world) const {
  return {points(world.pos), features(world.rot), vectors(world.pos_vel),
          features(world.rot_vel)};
}

Eigen::MatrixXd RootFrame::points_to_world(const Eigen::MatrixXd& local) const {
  Eigen::MatrixXd out = rotate_rows(local, to_local_.transpose());
  out.rowwise() += origin_.transpose();
  return out;
}

Eigen::MatrixXd RootFrame::vectors_to_world(
    const Eigen::MatrixXd& local) const {
  return rotate_rows(local, to_local_.transpose());
}

Eigen::MatrixXd RootFrame::features_to_world(
    const Eigen::MatrixXd& local) const {
  return rotate_features(local, to_local_.transpose());
}

int SimHoiState::flat_size() const {
  return static_cast<int>(1 + body.pos.size() + body.rot.size() +
                          body.pos_vel.size() + body.rot_vel.size() +
                          contact_forces.size() + object.pos.size() +
                          object.rot.size() + object.pos_vel.size() +
                          object.rot_vel.size());
}

void SimHoiState::append_to(Eigen::VectorXd& out, int& offset) const {
  out[offset++] = root_height;
  Eigen::MatrixXd b(body.rows(), body.pos.cols() * 2 + body.rot.cols() * 2);
  b << body.pos, body.rot, body.pos_vel, body.rot_vel;
  append_block(out, offset, b);
  append_block(out, offset, contact_forces);
  Eigen::MatrixXd o(object.rows(), object.pos.cols() * 2 + object.rot.cols() * 2);
  o << object.pos, object.rot, object.pos_vel, object.rot_vel;
  append_block(out, offset, o);
}

SimHoiState to_root_local(const WorldReadout& world, const RootPose& root) {
  const RootFrame frame(root);
  SimHoiState out;
  out.root_height = frame.root_height();
  out.body = frame.motion(world.body);
  out.contact_forces = frame.vectors(world.contact_forces);
  out.object = frame.motion(world.object);
  return out;
}

WorldReadout from_root_local(const SimHoiState& local, const RootPose& root) {
  const RootFrame frame(root);
  auto to_world = [&](const Motion& m) {
    return Motion{frame.points_to_world(m.pos), frame.features_to_world(m.rot),
                  frame.vectors_to_world(m.pos_vel),
                  frame.features_to_world(m.rot_vel)};
  };
  return {to_world(local.body), to_world(local.object),
          frame.vectors_to_world(local.contact_forces)};
}

}  // namespace hoi
