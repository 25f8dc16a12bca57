#include "hoi/demo.hpp"

#include <cmath>

#include "hoi/error.hpp"
#include "hoi/rotation.hpp"

namespace hoi::demo {

namespace {

constexpr double kGravity = 9.81;
const Eigen::Vector2d kRootPos(0.0, 0.1);
constexpr double kRootAngle = 0.0;

struct HandPose {
  Eigen::Vector2d position;
  double angle;
  Eigen::Vector2d velocity;
};

// Cubic Hermite through the keyframes; angles use zero tangents.
HandPose sample_path(const std::vector<HandKeyframe>& keys, double t) {
  if (t <= keys.front().time) {
    return {keys.front().position, keys.front().angle, keys.front().velocity};
  }
  if (t >= keys.back().time) {
    return {keys.back().position, keys.back().angle, keys.back().velocity};
  }
  std::size_t k = 0;
  while (k + 1 < keys.size() && keys[k + 1].time < t) ++k;
  const auto& a = keys[k];
  const auto& b = keys[k + 1];
  const double span = b.time - a.time;
  const double s = (t - a.time) / span;
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
  const double d00 = 6 * s2 - 6 * s, d10 = 3 * s2 - 4 * s + 1;
  const double d01 = -6 * s2 + 6 * s, d11 = 3 * s2 - 2 * s;
  HandPose p;
  p.position = h00 * a.position + h10 * span * a.velocity + h01 * b.position +
               h11 * span * b.velocity;
  p.velocity = (d00 * a.position + d01 * b.position) / span +
               d10 * a.velocity + d11 * b.velocity;
  p.angle = h00 * a.angle + h01 * b.angle;
  return p;
}

Eigen::Vector2d rotate(double angle, const Eigen::Vector2d& v) {
  return Eigen::Rotation2Dd(angle) * v;
}

std::vector<HandKeyframe> default_keyframes(const DemoScript& s,
                                            const Embodiment& body) {
  const double T = s.duration;
  switch (s.kind) {
    case TaskKind::kHold:
    case TaskKind::kBiasedHold:
      return {{0.0, {0.42, 0.42}, 0.0, {0, 0}},
              {T, {0.42, 0.47}, 0.0, {0, 0}}};
    case TaskKind::kCarry:
      return {{0.0, {0.34, 0.40}, 0.0, {0, 0}},
              {T, {0.52, 0.50}, 0.0, {0, 0}}};
    case TaskKind::kTossCatch: {
      const Eigen::Vector2d v0 = s.toss_velocity;
      const Eigen::Vector2d start(0.40, 0.30);
      const double windup = 0.2;
      const double stop = 0.1;
      const double soften = 0.5;
      const Eigen::Vector2d release = start + v0 * windup / 2.0;
      const Eigen::Vector2d stopped = release + v0 * stop / 2.0;
      const double flight = s.catch_time - s.release_time;
      const Eigen::Vector2d offset = ball_offset(body);
      const Eigen::Vector2d ball_at_catch =
          release + offset + v0 * flight -
          Eigen::Vector2d(0.0, 0.5 * kGravity * flight * flight);
      const Eigen::Vector2d ball_vel_at_catch =
          v0 - Eigen::Vector2d(0.0, kGravity * flight);
      const Eigen::Vector2d catch_pos = ball_at_catch - offset;
      const Eigen::Vector2d catch_vel = 0.3 * ball_vel_at_catch;
      const Eigen::Vector2d rest = catch_pos + catch_vel * soften / 2.0;
      std::vector<HandKeyframe> keys = {
          {0.0, start, 0.0, {0, 0}},
          {s.release_time - windup, start, 0.0, {0, 0}},
          {s.release_time, release, 0.0, v0},
          {s.release_time + stop, stopped, 0.0, {0, 0}},
          {s.catch_time, catch_pos, 0.0, catch_vel},
          {std::min(s.catch_time + soften, T), rest, 0.0, {0, 0}},
      };
      if (keys.back().time < T) keys.push_back({T, rest, 0.0, {0, 0}});
      return keys;
    }
  }
  return {};
}

}  // namespace

std::string to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::kHold: return "hold";
    case TaskKind::kCarry: return "carry";
    case TaskKind::kTossCatch: return "toss_catch";
    case TaskKind::kBiasedHold: return "biased_hold";
  }
  return "unknown";
}

TaskKind task_from_string(const std::string& name) {
  for (auto k : {TaskKind::kHold, TaskKind::kCarry, TaskKind::kTossCatch,
                 TaskKind::kBiasedHold}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorKind::kInvalidArgument, "unknown task '" + name + "'");
}

DemoScript DemoScript::defaults(TaskKind kind) {
  DemoScript s;
  s.kind = kind;
  return s;
}

void DemoScript::validate() const {
  if (!(duration >= 0.5)) {
    throw Error(ErrorKind::kInvalidArgument, "duration must be >= 0.5 s");
  }
  if (fps <= 0) throw Error(ErrorKind::kInvalidArgument, "fps must be > 0");
  if (kind == TaskKind::kTossCatch) {
    if (!(release_time < catch_time)) {
      throw Error(ErrorKind::kInvalidArgument,
                  "release must come before catch");
    }
    if (release_time < 0.2 || catch_time > duration) {
      throw Error(ErrorKind::kInvalidArgument,
                  "toss timing must fit inside the demo");
    }
  }
  // Negative bias pushes the ball into the hand; generate() bounds it by
  // the contact geometry.
  if (!std::isfinite(bias)) {
    throw Error(ErrorKind::kInvalidArgument, "bias must be finite");
  }
  for (std::size_t k = 1; k < keyframes.size(); ++k) {
    if (!(keyframes[k].time > keyframes[k - 1].time)) {
      throw Error(ErrorKind::kInvalidArgument,
                  "keyframe times must increase", static_cast<long>(k));
    }
  }
}

nlohmann::json to_json(const DemoScript& s) {
  nlohmann::json keys = nlohmann::json::array();
  for (const auto& k : s.keyframes) {
    keys.push_back({{"time", k.time},
                    {"position", {k.position.x(), k.position.y()}},
                    {"angle", k.angle},
                    {"velocity", {k.velocity.x(), k.velocity.y()}}});
  }
  return {{"task", to_string(s.kind)},
          {"duration", s.duration},
          {"fps", s.fps},
          {"release_time", s.release_time},
          {"catch_time", s.catch_time},
          {"toss_velocity", {s.toss_velocity.x(), s.toss_velocity.y()}},
          {"bias", s.bias},
          {"keyframes", keys}};
}

DemoScript script_from_json(const nlohmann::json& j) {
  static const std::vector<std::string> known{
      "task", "duration", "fps", "release_time", "catch_time",
      "toss_velocity", "bias", "keyframes"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw Error(ErrorKind::kSchema, "unknown key '" + key + "' in demo script");
    }
  }
  DemoScript s = DemoScript::defaults(
      task_from_string(j.value("task", std::string("hold"))));
  try {
    s.duration = j.value("duration", s.duration);
    s.fps = j.value("fps", s.fps);
    s.release_time = j.value("release_time", s.release_time);
    s.catch_time = j.value("catch_time", s.catch_time);
    if (j.contains("toss_velocity")) {
      const auto v = j.at("toss_velocity").get<std::vector<double>>();
      s.toss_velocity = {v.at(0), v.at(1)};
    }
    s.bias = j.value("bias", s.bias);
    if (j.contains("keyframes")) {
      for (const auto& kj : j.at("keyframes")) {
        HandKeyframe k;
        k.time = kj.at("time").get<double>();
        const auto p = kj.at("position").get<std::vector<double>>();
        k.position = {p.at(0), p.at(1)};
        k.angle = kj.value("angle", 0.0);
        if (kj.contains("velocity")) {
          const auto v = kj.at("velocity").get<std::vector<double>>();
          k.velocity = {v.at(0), v.at(1)};
        }
        s.keyframes.push_back(k);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kSchema, std::string("demo script: ") + e.what());
  }
  s.validate();
  return s;
}

IkResult solve_hand_ik(const Embodiment& body, const Eigen::Vector2d& root_pos,
                       double root_angle, const Eigen::Vector2d& hand_pos,
                       double hand_angle, std::vector<double> initial_q) {
  const physics::Simulator sim(body.model, body.disc, physics::SimConfig{});
  const auto& model = body.model;
  const int dof = model.dof();
  const int hand = body.contact_links.front();
  constexpr int kIterations = 100;
  constexpr double kTolerance = 1e-4;
  constexpr double kDamping = 1e-2;

  IkResult out;
  out.q = std::move(initial_q);
  out.q.resize(static_cast<std::size_t>(dof), 0.0);
  for (int it = 0; it <= kIterations; ++it) {
    const auto poses = sim.forward_kinematics(root_pos, root_angle, out.q);
    const auto& h = poses[static_cast<std::size_t>(hand)];
    Eigen::Vector3d err;
    err << hand_pos - h.pos, wrap_angle(hand_angle - h.angle);
    out.position_error = err.head<2>().norm();
    out.angle_error = std::abs(err[2]);
    if (out.position_error < kTolerance && out.angle_error < kTolerance) {
      out.converged = true;
      break;
    }
    if (it == kIterations) break;
    // Column j: rotation about joint j moves every descendant.
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(3, dof);
    for (int j = 0; j < dof; ++j) {
      const auto& joint = model.joints[static_cast<std::size_t>(j)];
      const auto& parent = poses[static_cast<std::size_t>(joint.parent)];
      const Eigen::Vector2d pivot =
          parent.pos + rotate(parent.angle, joint.parent_anchor);
      int link = hand;
      bool moves = false;
      while (link > 0) {
        if (link == joint.child) {
          moves = true;
          break;
        }
        for (const auto& js : model.joints) {
          if (js.child == link) {
            link = js.parent;
            break;
          }
        }
      }
      if (!moves) continue;
      const Eigen::Vector2d r = h.pos - pivot;
      J(0, j) = -r.y();
      J(1, j) = r.x();
      J(2, j) = 1.0;
    }
    const Eigen::Matrix3d A =
        J * J.transpose() + kDamping * kDamping * Eigen::Matrix3d::Identity();
    const Eigen::VectorXd dq = J.transpose() * A.ldlt().solve(err);
    for (int j = 0; j < dof; ++j) out.q[static_cast<std::size_t>(j)] += dq[j];
  }
  if (out.converged) {
    for (int j = 0; j < dof; ++j) {
      const auto& joint = model.joints[static_cast<std::size_t>(j)];
      const double q = out.q[static_cast<std::size_t>(j)];
      if (q < joint.lower || q > joint.upper) out.converged = false;
    }
  }
  return out;
}

Eigen::Vector2d ball_offset(const Embodiment& body, double bias) {
  const int hand = body.contact_links.front();
  const auto& link = body.model.links[static_cast<std::size_t>(hand)];
  return {0.25 * link.length, link.radius + body.disc.radius + bias};
}

RefHoiSequence generate(const DemoScript& script, const Embodiment& body) {
  script.validate();
  body.validate();
  const std::vector<HandKeyframe> keys =
      script.keyframes.empty() ? default_keyframes(script, body)
                               : script.keyframes;
  const physics::Simulator sim(body.model, body.disc, physics::SimConfig{});
  const int dof = body.model.dof();

  // Every keyframe must be reachable on its own.
  for (std::size_t k = 0; k < keys.size(); ++k) {
    const IkResult ik =
        solve_hand_ik(body, kRootPos, kRootAngle, keys[k].position,
                      keys[k].angle, std::vector<double>(dof, 0.0));
    if (!ik.converged) {
      throw Error(ErrorKind::kUnreachable,
                  "hand keyframe at t=" + std::to_string(keys[k].time) +
                      " is unreachable (residual " +
                      std::to_string(ik.position_error) + " m)",
                  static_cast<long>(k));
    }
  }

  RefHoiSequence seq;
  seq.layout = body.layout();
  seq.fps = script.fps;
  seq.cg = body.aggregation();
  seq.object_names = body.object_names();

  const int frames = static_cast<int>(std::lround(script.duration * script.fps));
  const double bias = script.kind == TaskKind::kBiasedHold ? script.bias : 0.0;
  const double touch =
      body.model.links[static_cast<std::size_t>(body.contact_links.front())].radius +
      body.disc.radius;
  if (bias <= -touch) {
    throw Error(ErrorKind::kInvalidArgument, "bias would put the ball centre inside the hand");
  }
  const Eigen::Vector2d g(0.0, -kGravity);
  const int hands_ball = edge_index(0, 1, seq.cg.node_count());
  std::vector<double> q(static_cast<std::size_t>(dof), 0.0);

  double release_angle = 0.0;
  for (int f = 0; f < frames; ++f) {
    const double t = static_cast<double>(f) / script.fps;
    const HandPose hand = sample_path(keys, t);
    const IkResult ik =
        solve_hand_ik(body, kRootPos, kRootAngle, hand.position, hand.angle, q);
    if (!ik.converged) {
      throw Error(ErrorKind::kUnreachable,
                  "hand path leaves the workspace at t=" + std::to_string(t), f);
    }
    q = ik.q;
    const auto poses = sim.forward_kinematics(kRootPos, kRootAngle, q);

    RefHoiState state;
    state.body = Motion::zeros(seq.layout.body_count, 2, 2);
    state.object = Motion::zeros(1, 2, 2);
    for (int l = 0; l < seq.layout.body_count; ++l) {
      const auto& p = poses[static_cast<std::size_t>(l)];
      state.body.pos.row(l) = p.pos.transpose();
      state.body.rot.row(l) = encode_rotation(p.angle).transpose();
    }
    const auto& h = poses[static_cast<std::size_t>(body.contact_links.front())];
    const Eigen::Vector2d attach = h.pos + rotate(h.angle, ball_offset(body, bias));

    bool attached = true;
    if (script.kind == TaskKind::kTossCatch) {
      constexpr double kEps = 1e-9;
      attached = t + kEps < script.release_time || t + kEps >= script.catch_time;
    }
    state.cg_edges.assign(static_cast<std::size_t>(seq.cg.edge_count()), 0);
    if (attached) {
      state.object.pos.row(0) = attach.transpose();
      state.object.rot.row(0) = encode_rotation(h.angle).transpose();
      state.cg_edges[static_cast<std::size_t>(hands_ball)] = 1;
      release_angle = h.angle;
    } else {
      // Position filled in below from the ballistic closed form.
      state.object.rot.row(0) = encode_rotation(release_angle).transpose();
    }
    seq.frames.push_back(std::move(state));
  }
  if (script.kind == TaskKind::kTossCatch) {
    // The free-flight segment is anchored at the exact release keyframe.
    const HandPose at_release = sample_path(keys, script.release_time);
    const IkResult ik = solve_hand_ik(body, kRootPos, kRootAngle,
                                      at_release.position, at_release.angle, q);
    const auto poses = sim.forward_kinematics(kRootPos, kRootAngle, ik.q);
    const auto& h = poses[static_cast<std::size_t>(body.contact_links.front())];
    const Eigen::Vector2d p0 = h.pos + rotate(h.angle, ball_offset(body));
    const Eigen::Vector2d v0 = at_release.velocity;
    for (int f = 0; f < frames; ++f) {
      const double t = static_cast<double>(f) / script.fps;
      auto& state = seq.frames[static_cast<std::size_t>(f)];
      if (state.cg_edges[static_cast<std::size_t>(hands_ball)] == 1) continue;
      const double tau = t - script.release_time;
      state.object.pos.row(0) = (p0 + v0 * tau + 0.5 * g * tau * tau).transpose();
    }
  }
  refresh_derived(seq);
  validate_sequence(seq);
  return seq;
}

CalibrationResult calibrate(const RefHoiSequence& seq, const Embodiment& body,
                            const physics::SimConfig& config) {
  validate_sequence(seq);
  const physics::Simulator sim(body.model, body.disc, config);
  CalibrationResult out;
  out.sequence = seq;
  const AggregationMap map = body.aggregation();
  for (int f = 0; f < seq.frame_count(); ++f) {
    physics::WorldState w;
    try {
      w = reset_to_frame(sim, seq, f);
    } catch (const Error& e) {
      throw Error(ErrorKind::kSimulationDiverged,
                  std::string("settle failed: ") + e.what(), f);
    }
    auto& frame = out.sequence.frames[static_cast<std::size_t>(f)];
    for (int l = 0; l < body.model.link_count(); ++l) {
      const auto& b = w.links[static_cast<std::size_t>(l)];
      frame.body.pos.row(l) = b.pos.transpose();
      frame.body.rot.row(l) = encode_rotation(b.angle).transpose();
    }
    frame.object.pos.row(0) = w.disc.pos.transpose();
    frame.object.rot.row(0) = encode_rotation(w.disc.angle).transpose();
    ContactEvidence evidence;
    for (const auto& p : sim.touching_pairs(w)) {
      evidence.pairs.emplace_back(sim.entity_name(p.a), sim.entity_name(p.b));
    }
    const auto edges = extract_cg(evidence, map).edges;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (edges[e] != frame.cg_edges[e]) {
        out.flips.push_back({f, static_cast<int>(e), frame.cg_edges[e], edges[e]});
      }
    }
    frame.cg_edges = edges;
    out.max_penetration = std::max(out.max_penetration, sim.max_penetration(w));
  }
  refresh_derived(out.sequence);
  validate_sequence(out.sequence);
  return out;
}

}  // namespace hoi::demo
