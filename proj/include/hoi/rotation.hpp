#pragma once

#include <Eigen/Dense>

namespace hoi {

using Vector6d = Eigen::Matrix<double, 6, 1>;

// Planar rotation feature (cos, sin).
Eigen::Vector2d encode_rotation(double angle);
double decode_rotation(const Eigen::Vector2d& feature);

// 3D rotation feature: the first two columns of the matrix, column 0 then
// column 1. Decoding re-orthonormalises with Gram-Schmidt (a, then b).
Vector6d encode_rotation(const Eigen::Matrix3d& rotation);
Eigen::Matrix3d decode_rotation(const Vector6d& feature);

double wrap_angle(double angle);

// Angle of a planar feature relative to the previous feature, using the
// stored delta. Returns the signed rotation in radians.
double feature_angle_delta(const Eigen::Vector2d& feature,
                           const Eigen::Vector2d& delta);

}  // namespace hoi
