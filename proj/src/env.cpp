#include "hoi/env.hpp"

#include <limits>

#include "hoi/error.hpp"

namespace hoi {

namespace {

void append_rows(Eigen::VectorXd& out, int& offset, const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out[offset++] = m(r, c);
  }
}

void append_motion(Eigen::VectorXd& out, int& offset, const Motion& m) {
  Eigen::MatrixXd rows(m.rows(), m.pos.cols() * 2 + m.rot.cols() * 2);
  rows << m.pos, m.rot, m.pos_vel, m.rot_vel;
  append_rows(out, offset, rows);
}

}  // namespace

std::string to_string(TerminationReason reason) {
  switch (reason) {
    case TerminationReason::kNone: return "none";
    case TerminationReason::kMaxTime: return "max_time";
    case TerminationReason::kObjectDeviation: return "object_deviation";
    case TerminationReason::kBodyDeviation: return "body_deviation";
    case TerminationReason::kDiverged: return "diverged";
  }
  return "unknown";
}

void TerminationThresholds::validate() const {
  if (!(object > 0.0) || !(body > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "termination thresholds must be > 0");
  }
}

nlohmann::json to_json(const TerminationThresholds& t) {
  return {{"object", t.object}, {"body", t.body}};
}

TerminationThresholds thresholds_from_json(const nlohmann::json& j) {
  TerminationThresholds t;
  for (const auto& [key, _] : j.items()) {
    if (key != "object" && key != "body") {
      throw Error(ErrorKind::kSchema, "unknown key '" + key + "' in termination block");
    }
  }
  try {
    t.object = j.value("object", t.object);
    t.body = j.value("body", t.body);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kSchema, std::string("termination block: ") + e.what());
  }
  t.validate();
  return t;
}

TerminationCheck check_termination(int t, int frame_count, double object_error,
                                   double body_error,
                                   const TerminationThresholds& thresholds) {
  if (t >= frame_count - 1) return {true, TerminationReason::kMaxTime};
  if (object_error > thresholds.object) {
    return {true, TerminationReason::kObjectDeviation};
  }
  if (body_error > thresholds.body) {
    return {true, TerminationReason::kBodyDeviation};
  }
  return {};
}

double object_position_error(const HoiState& sim, const HoiState& ref) {
  if (sim.object.pos.rows() != ref.object.pos.rows() ||
      sim.object.pos.cols() != ref.object.pos.cols()) {
    throw Error(ErrorKind::kDimensionMismatch, "object shapes differ");
  }
  if (sim.object.pos.rows() == 0) return 0.0;
  return (sim.object.pos - ref.object.pos).rowwise().norm().maxCoeff();
}

double body_position_error(const HoiState& sim, const HoiState& ref) {
  if (sim.body.pos.rows() != ref.body.pos.rows() ||
      sim.body.pos.cols() != ref.body.pos.cols()) {
    throw Error(ErrorKind::kDimensionMismatch, "body shapes differ");
  }
  return (sim.body.pos - ref.body.pos).rowwise().norm().mean();
}

int state_dimension(const BodyLayout& layout, int object_count, int edge_count) {
  const int d = layout.spatial_dim, r = layout.rot_feature_dim;
  const int per_entity = 2 * d + 2 * r;
  const int sim = 1 + layout.body_count * per_entity +
                  layout.contact_count() * d + object_count * per_entity;
  const int ref = layout.body_count * per_entity + object_count * per_entity +
                  layout.contact_count() * object_count * d + edge_count;
  return sim + ref;
}

Eigen::VectorXd build_state(const SimHoiState& sim, const RefHoiState& ref_next,
                            const RootPose& root) {
  const RootFrame frame(root);
  const Motion body = frame.motion(ref_next.body);
  const Motion object = frame.motion(ref_next.object);
  const Eigen::MatrixXd ig = frame.vectors(ref_next.ig.vectors);
  const int size = sim.flat_size() + static_cast<int>(
      body.pos.size() + body.rot.size() + body.pos_vel.size() +
      body.rot_vel.size() + object.pos.size() + object.rot.size() +
      object.pos_vel.size() + object.rot_vel.size() + ig.size() +
      static_cast<Eigen::Index>(ref_next.cg_edges.size()));
  Eigen::VectorXd out(size);
  int offset = 0;
  sim.append_to(out, offset);
  append_motion(out, offset, body);
  append_motion(out, offset, object);
  append_rows(out, offset, ig);
  for (auto e : ref_next.cg_edges) out[offset++] = static_cast<double>(e);
  for (int i = 0; i < size; ++i) {
    if (!std::isfinite(out[i])) {
      throw Error(ErrorKind::kNonFinite, "state entry is not finite", i);
    }
  }
  return out;
}

HoiEnv::HoiEnv(std::shared_ptr<const RefHoiSequence> seq, Embodiment body,
               physics::SimConfig sim_config, RewardConfig reward,
               TerminationThresholds thresholds, bool early_termination)
    : seq_(std::move(seq)),
      body_(std::move(body)),
      sim_(body_.model, body_.disc, sim_config),
      reward_(std::move(reward)),
      thresholds_(thresholds),
      early_termination_(early_termination) {
  if (!seq_ || seq_->frame_count() < 2) {
    throw Error(ErrorKind::kInvalidArgument, "environment needs at least two frames");
  }
  if (!(seq_->layout == body_.layout())) {
    throw Error(ErrorKind::kDimensionMismatch,
                "sequence layout does not match the embodiment");
  }
  if (sim_config.control_hz != seq_->fps) {
    throw Error(ErrorKind::kInvalidArgument,
                "control rate " + std::to_string(sim_config.control_hz) +
                    " Hz differs from sequence fps " + std::to_string(seq_->fps));
  }
  const int edges = static_cast<int>(seq_->frames.front().cg_edges.size());
  reward_.weights.validate(edges);
  thresholds_.validate();
  state_dim_ = state_dimension(seq_->layout, seq_->object_count(), edges);
  initial_ = reset_to_frame(sim_, *seq_, 0);
}

Eigen::VectorXd HoiEnv::reset() {
  world_ = initial_;
  previous_ = initial_;
  t_ = 0;
  done_ = false;
  return state();
}

HoiState HoiEnv::observe() const {
  return observe_world(sim_, body_, world_, previous_);
}

Eigen::VectorXd HoiEnv::state() const {
  const int next = std::min(t_ + 1, seq_->frame_count() - 1);
  return build_state(observe_local(sim_, body_, world_, previous_),
                     seq_->frames[static_cast<std::size_t>(next)],
                     root_pose(world_));
}

EnvStep HoiEnv::step(const Eigen::VectorXd& action) {
  if (done_) throw Error(ErrorKind::kInvalidArgument, "step called on a finished episode");
  EnvStep out;
  out.frame = t_ + 1;
  physics::WorldState next;
  try {
    next = sim_.step_control(
        world_, std::span<const double>(action.data(),
                                        static_cast<std::size_t>(action.size())));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kSimulationDiverged) throw;
    done_ = true;
    out.done = true;
    out.reason = TerminationReason::kDiverged;
    out.reward.r_total = 0.0;
    out.object_error = out.body_error = std::numeric_limits<double>::infinity();
    return out;
  }
  previous_ = world_;
  world_ = std::move(next);
  t_ += 1;
  const auto& ref = seq_->frames[static_cast<std::size_t>(t_)];
  out.sim = observe();
  out.reward = total_reward(out.sim, ref, reward_.weights, reward_.mode);
  out.object_error = object_position_error(out.sim, ref);
  out.body_error = body_position_error(out.sim, ref);
  TerminationCheck check = check_termination(t_, seq_->frame_count(),
                                             out.object_error, out.body_error,
                                             thresholds_);
  if (!early_termination_ && check.reason != TerminationReason::kMaxTime) {
    check = {};
  }
  out.done = done_ = check.done;
  out.reason = check.reason;
  out.state = state();
  return out;
}

}  // namespace hoi
