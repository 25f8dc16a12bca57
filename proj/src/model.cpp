#include "hoi/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "hoi/error.hpp"

namespace hoi {

void BodyLayout::validate() const {
  if (body_count < 2) {
    throw Error(ErrorKind::kInvalidArgument, "layout needs at least 2 bodies");
  }
  if (actuated_dof < 1) {
    throw Error(ErrorKind::kInvalidArgument,
                "layout needs at least 1 actuated DoF");
  }
  if (spatial_dim != 2 && spatial_dim != 3) {
    throw Error(ErrorKind::kInvalidArgument, "spatial_dim must be 2 or 3");
  }
  const int expected_rot = spatial_dim == 2 ? 2 : 6;
  if (rot_feature_dim != expected_rot) {
    throw Error(ErrorKind::kInvalidArgument,
                "rot_feature_dim must be " + std::to_string(expected_rot) +
                    " for spatial_dim " + std::to_string(spatial_dim));
  }
  if (static_cast<int>(body_names.size()) != body_count) {
    throw Error(ErrorKind::kDimensionMismatch,
                "body_names has " + std::to_string(body_names.size()) +
                    " entries, expected " + std::to_string(body_count));
  }
  std::set<std::string> names(body_names.begin(), body_names.end());
  if (names.size() != body_names.size()) {
    throw Error(ErrorKind::kInvalidArgument, "body names are not unique");
  }
  std::set<int> seen;
  for (int idx : contact_body_indices) {
    if (idx < 0 || idx >= body_count) {
      throw Error(ErrorKind::kOutOfRange,
                  "contact body index " + std::to_string(idx) +
                      " outside [0, " + std::to_string(body_count) + ")");
    }
    if (!seen.insert(idx).second) {
      throw Error(ErrorKind::kInvalidArgument,
                  "duplicate contact body index " + std::to_string(idx));
    }
  }
}

Motion Motion::zeros(int rows, int spatial_dim, int rot_dim) {
  Motion m;
  m.pos = Eigen::MatrixXd::Zero(rows, spatial_dim);
  m.rot = Eigen::MatrixXd::Zero(rows, rot_dim);
  m.pos_vel = Eigen::MatrixXd::Zero(rows, spatial_dim);
  m.rot_vel = Eigen::MatrixXd::Zero(rows, rot_dim);
  return m;
}

static bool same(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

bool Motion::operator==(const Motion& other) const {
  return same(pos, other.pos) && same(rot, other.rot) &&
         same(pos_vel, other.pos_vel) && same(rot_vel, other.rot_vel);
}

bool InteractionGraphState::operator==(
    const InteractionGraphState& other) const {
  return contact_count == other.contact_count &&
         object_count == other.object_count && same(vectors, other.vectors);
}

static std::vector<Eigen::MatrixXd> frame_deltas(
    std::span<const Eigen::MatrixXd> values, const char* axis) {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(values.size());
  for (std::size_t t = 0; t < values.size(); ++t) {
    if (values[t].rows() != values[0].rows() ||
        values[t].cols() != values[0].cols()) {
      std::ostringstream msg;
      msg << axis << " frame has shape " << values[t].rows() << "x"
          << values[t].cols() << ", expected " << values[0].rows() << "x"
          << values[0].cols();
      throw Error(ErrorKind::kDimensionMismatch, msg.str(),
                  static_cast<long>(t));
    }
    if (t == 0) {
      out.push_back(Eigen::MatrixXd::Zero(values[0].rows(), values[0].cols()));
    } else {
      out.push_back(values[t] - values[t - 1]);
    }
  }
  return out;
}

FrameDeltas compute_velocities(std::span<const Eigen::MatrixXd> positions,
                               std::span<const Eigen::MatrixXd> rotations) {
  if (positions.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "need at least one frame");
  }
  if (positions.size() != rotations.size()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "time axis: " + std::to_string(positions.size()) +
                    " position frames vs " + std::to_string(rotations.size()) +
                    " rotation frames");
  }
  if (positions[0].rows() != rotations[0].rows()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "entity axis: positions have " +
                    std::to_string(positions[0].rows()) +
                    " rows, rotations " + std::to_string(rotations[0].rows()));
  }
  return {frame_deltas(positions, "position"),
          frame_deltas(rotations, "rotation")};
}

InteractionGraphState compute_ig(const Eigen::MatrixXd& body_positions,
                                 const Eigen::MatrixXd& object_positions,
                                 std::span<const int> contact_body_indices) {
  if (contact_body_indices.empty()) {
    throw Error(ErrorKind::kInvalidArgument,
                "interaction graph needs at least one contact body");
  }
  if (body_positions.cols() != object_positions.cols()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "spatial axis differs between bodies and objects");
  }
  InteractionGraphState ig;
  ig.contact_count = static_cast<int>(contact_body_indices.size());
  ig.object_count = static_cast<int>(object_positions.rows());
  ig.vectors.resize(ig.contact_count * ig.object_count, body_positions.cols());
  for (int i = 0; i < ig.contact_count; ++i) {
    const int body = contact_body_indices[static_cast<std::size_t>(i)];
    if (body < 0 || body >= body_positions.rows()) {
      throw Error(ErrorKind::kOutOfRange,
                  "contact body index " + std::to_string(body) +
                      " out of range");
    }
    for (int j = 0; j < ig.object_count; ++j) {
      ig.vectors.row(i * ig.object_count + j) =
          body_positions.row(body) - object_positions.row(j);
    }
  }
  return ig;
}

double mse(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    std::ostringstream msg;
    msg << "cannot compare " << a.rows() << "x" << a.cols() << " with "
        << b.rows() << "x" << b.cols();
    throw Error(ErrorKind::kDimensionMismatch, msg.str());
  }
  if (a.size() == 0) return 0.0;
  return (a - b).squaredNorm() / static_cast<double>(a.size());
}

void refresh_derived(RefHoiSequence& seq) {
  std::vector<Eigen::MatrixXd> bp, br, op, orr;
  for (const auto& f : seq.frames) {
    bp.push_back(f.body.pos);
    br.push_back(f.body.rot);
    op.push_back(f.object.pos);
    orr.push_back(f.object.rot);
  }
  const FrameDeltas body = compute_velocities(bp, br);
  const FrameDeltas obj = compute_velocities(op, orr);
  for (std::size_t t = 0; t < seq.frames.size(); ++t) {
    auto& f = seq.frames[t];
    f.body.pos_vel = body.pos_vel[t];
    f.body.rot_vel = body.rot_vel[t];
    f.object.pos_vel = obj.pos_vel[t];
    f.object.rot_vel = obj.rot_vel[t];
    f.ig = compute_ig(f.body.pos, f.object.pos,
                      seq.layout.contact_body_indices);
  }
}

static void check_rotation_rows(const Eigen::MatrixXd& rot, long frame,
                                const char* what) {
  for (int r = 0; r < rot.rows(); ++r) {
    if (rot.cols() == 2) {
      if (std::abs(rot.row(r).norm() - 1.0) > 1e-6) {
        throw Error(ErrorKind::kDegenerateRotation,
                    std::string(what) + " rotation feature " +
                        std::to_string(r) + " is not unit norm",
                    frame);
      }
    } else {
      const Eigen::Vector3d a = rot.row(r).segment<3>(0).transpose();
      const Eigen::Vector3d b = rot.row(r).segment<3>(3).transpose();
      if (std::abs(a.norm() - 1.0) > 1e-6 || std::abs(b.norm() - 1.0) > 1e-6 ||
          std::abs(a.dot(b)) > 1e-6) {
        throw Error(ErrorKind::kDegenerateRotation,
                    std::string(what) + " rotation feature " +
                        std::to_string(r) + " is not orthonormal",
                    frame);
      }
    }
  }
}

ValidationReport validate_sequence(const RefHoiSequence& seq) {
  seq.layout.validate();
  seq.cg.validate(seq.layout.body_names, seq.object_names);
  if (seq.fps <= 0) {
    throw Error(ErrorKind::kInvalidArgument, "fps must be positive");
  }
  if (seq.frame_count() < 2) {
    throw Error(ErrorKind::kInvalidArgument, "sequence needs at least 2 frames");
  }
  if (seq.object_count() < 1) {
    throw Error(ErrorKind::kInvalidArgument, "sequence needs an object");
  }
  const auto& L = seq.layout;
  const int m = seq.object_count();
  const auto edges = static_cast<std::size_t>(seq.cg.edge_count());
  auto check_shape = [](const Eigen::MatrixXd& x, int rows, int cols,
                        const std::string& what, long frame) {
    if (x.rows() != rows || x.cols() != cols) {
      std::ostringstream msg;
      msg << what << " is " << x.rows() << "x" << x.cols() << ", expected "
          << rows << "x" << cols;
      throw Error(ErrorKind::kDimensionMismatch, msg.str(), frame);
    }
    if (!x.allFinite()) {
      throw Error(ErrorKind::kNonFinite, what + " has non-finite entries",
                  frame);
    }
  };
  for (int t = 0; t < seq.frame_count(); ++t) {
    const auto& f = seq.frames[static_cast<std::size_t>(t)];
    check_shape(f.body.pos, L.body_count, L.spatial_dim, "body_pos", t);
    check_shape(f.body.rot, L.body_count, L.rot_feature_dim, "body_rot", t);
    check_shape(f.body.pos_vel, L.body_count, L.spatial_dim, "body_pos_vel", t);
    check_shape(f.body.rot_vel, L.body_count, L.rot_feature_dim,
                "body_rot_vel", t);
    check_shape(f.object.pos, m, L.spatial_dim, "obj_pos", t);
    check_shape(f.object.rot, m, L.rot_feature_dim, "obj_rot", t);
    check_shape(f.object.pos_vel, m, L.spatial_dim, "obj_pos_vel", t);
    check_shape(f.object.rot_vel, m, L.rot_feature_dim, "obj_rot_vel", t);
    check_shape(f.ig.vectors, L.contact_count() * m, L.spatial_dim, "ig", t);
    check_rotation_rows(f.body.rot, t, "body");
    check_rotation_rows(f.object.rot, t, "object");
    if (f.cg_edges.size() != edges) {
      throw Error(ErrorKind::kDimensionMismatch,
                  "cg_edges has " + std::to_string(f.cg_edges.size()) +
                      " entries, expected " + std::to_string(edges),
                  t);
    }
    for (auto e : f.cg_edges) {
      if (e > 1) {
        throw Error(ErrorKind::kNonBinaryEdge,
                    "cg edge value " + std::to_string(e) + " is not 0 or 1",
                    t);
      }
    }
  }

  ValidationReport report;
  RefHoiSequence recomputed = seq;
  refresh_derived(recomputed);
  double max_dev = 0.0;
  long worst = -1;
  for (int t = 0; t < seq.frame_count(); ++t) {
    const auto& a = seq.frames[static_cast<std::size_t>(t)];
    const auto& b = recomputed.frames[static_cast<std::size_t>(t)];
    const double dev = std::max(
        {(a.body.pos_vel - b.body.pos_vel).cwiseAbs().maxCoeff(),
         (a.body.rot_vel - b.body.rot_vel).cwiseAbs().maxCoeff(),
         (a.object.pos_vel - b.object.pos_vel).cwiseAbs().maxCoeff(),
         (a.object.rot_vel - b.object.rot_vel).cwiseAbs().maxCoeff()});
    if (dev > max_dev) {
      max_dev = dev;
      worst = t;
    }
  }
  if (max_dev > 0.0) {
    std::ostringstream msg;
    msg << "stored velocities deviate from discrete differences; max "
           "deviation "
        << max_dev << " at frame " << worst;
    report.warnings.push_back(msg.str());
  }
  return report;
}

}  // namespace hoi
