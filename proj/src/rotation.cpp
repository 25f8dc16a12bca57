#include "hoi/rotation.hpp"

#include <cmath>
#include <numbers>

#include "hoi/error.hpp"

namespace hoi {

Eigen::Vector2d encode_rotation(double angle) {
  if (!std::isfinite(angle)) {
    throw Error(ErrorKind::kNonFinite, "rotation angle is not finite");
  }
  return {std::cos(angle), std::sin(angle)};
}

double decode_rotation(const Eigen::Vector2d& feature) {
  if (!feature.allFinite()) {
    throw Error(ErrorKind::kNonFinite, "rotation feature is not finite");
  }
  if (feature.norm() == 0.0) {
    throw Error(ErrorKind::kDegenerateRotation, "zero rotation feature");
  }
  return std::atan2(feature.y(), feature.x());
}

Vector6d encode_rotation(const Eigen::Matrix3d& rotation) {
  if (!rotation.allFinite()) {
    throw Error(ErrorKind::kNonFinite, "rotation matrix is not finite");
  }
  Vector6d out;
  out << rotation.col(0), rotation.col(1);
  return out;
}

Eigen::Matrix3d decode_rotation(const Vector6d& feature) {
  if (!feature.allFinite()) {
    throw Error(ErrorKind::kNonFinite, "rotation feature is not finite");
  }
  const Eigen::Vector3d a = feature.head<3>();
  const Eigen::Vector3d b = feature.tail<3>();
  const double na = a.norm();
  if (na == 0.0) {
    throw Error(ErrorKind::kDegenerateRotation, "first column has zero norm");
  }
  const Eigen::Vector3d e1 = a / na;
  const Eigen::Vector3d u2 = b - e1.dot(b) * e1;
  const double n2 = u2.norm();
  if (n2 < 1e-12) {
    throw Error(ErrorKind::kDegenerateRotation, "feature columns are parallel");
  }
  const Eigen::Vector3d e2 = u2 / n2;
  Eigen::Matrix3d out;
  out.col(0) = e1;
  out.col(1) = e2;
  out.col(2) = e1.cross(e2);
  return out;
}

double wrap_angle(double angle) {
  return std::remainder(angle, 2.0 * std::numbers::pi);
}

double feature_angle_delta(const Eigen::Vector2d& feature,
                           const Eigen::Vector2d& delta) {
  const Eigen::Vector2d prev = feature - delta;
  const double cross = prev.x() * feature.y() - prev.y() * feature.x();
  const double dot = prev.dot(feature);
  return std::atan2(cross, dot);
}

}  // namespace hoi
