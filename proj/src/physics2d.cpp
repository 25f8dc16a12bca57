#include "hoi/physics2d.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "hoi/error.hpp"
#include "hoi/rotation.hpp"

namespace hoi::physics {

namespace {

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }
Vec2 cross(double w, const Vec2& r) { return {-w * r.y(), w * r.x()}; }

Vec2 rotate(double angle, const Vec2& v) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
}

bool finite(const BodyState& b) {
  return b.pos.allFinite() && std::isfinite(b.angle) && b.vel.allFinite() &&
         std::isfinite(b.omega);
}

}  // namespace

double LinkSpec::moment() const {
  if (inertia > 0.0) return inertia;
  return mass * (length * length / 12.0 + radius * radius / 4.0);
}

double DiscObject::moment() const {
  if (inertia > 0.0) return inertia;
  return 0.5 * mass * radius * radius;
}

void DiscObject::validate() const {
  if (!(radius > 0.0) || !(mass > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "disc radius and mass must be > 0");
  }
  if (restitution < 0.0 || restitution > 1.0) {
    throw Error(ErrorKind::kInvalidArgument, "restitution must be in [0, 1]");
  }
  if (friction < 0.0 || rolling_resistance < 0.0) {
    throw Error(ErrorKind::kInvalidArgument,
                "friction and rolling resistance must be >= 0");
  }
}

double ArticulatedModel::joint_kd(int j) const {
  const auto& joint = joints[static_cast<std::size_t>(j)];
  if (joint.kd >= 0.0) return joint.kd;
  const auto& child = links[static_cast<std::size_t>(joint.child)];
  const double about_anchor =
      child.moment() + child.mass * joint.child_anchor.squaredNorm();
  return 2.0 * std::sqrt(joint.kp * about_anchor);
}

void ArticulatedModel::validate() const {
  if (links.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "model has no links");
  }
  std::set<std::string> names;
  for (const auto& l : links) {
    if (!(l.length > 0.0) || !(l.radius > 0.0) || !(l.mass > 0.0) ||
        !(l.moment() > 0.0)) {
      throw Error(ErrorKind::kInvalidArgument,
                  "link '" + l.name + "' needs positive geometry and mass");
    }
    if (!names.insert(l.name).second) {
      throw Error(ErrorKind::kInvalidArgument,
                  "duplicate link name '" + l.name + "'");
    }
  }
  std::vector<int> parent_count(links.size(), 0);
  for (std::size_t j = 0; j < joints.size(); ++j) {
    const auto& joint = joints[j];
    if (joint.parent < 0 || joint.child <= 0 ||
        joint.child >= link_count() || joint.parent >= joint.child) {
      throw Error(ErrorKind::kInvalidArgument,
                  "joint " + std::to_string(j) +
                      " must connect an earlier parent to a later child");
    }
    if (++parent_count[static_cast<std::size_t>(joint.child)] > 1) {
      throw Error(ErrorKind::kInvalidArgument,
                  "link " + std::to_string(joint.child) +
                      " has two parent joints");
    }
    if (!(joint.lower < joint.upper) || joint.lower <= -M_PI ||
        joint.upper >= M_PI) {
      throw Error(ErrorKind::kInvalidArgument,
                  "joint " + std::to_string(j) + " limits must be ordered");
    }
    if (!(joint.kp > 0.0) || !(joint.torque_limit > 0.0) ||
        !(joint_kd(static_cast<int>(j)) > 0.0)) {
      throw Error(ErrorKind::kInvalidArgument,
                  "joint " + std::to_string(j) + " gains must be positive");
    }
  }
  for (int l = 1; l < link_count(); ++l) {
    if (parent_count[static_cast<std::size_t>(l)] != 1) {
      throw Error(ErrorKind::kInvalidArgument,
                  "link " + std::to_string(l) + " is not attached");
    }
  }
}

void SimConfig::validate() const {
  if (sim_hz <= 0 || control_hz <= 0 || sim_hz % control_hz != 0) {
    throw Error(ErrorKind::kInvalidArgument,
                "sim_hz must be a positive multiple of control_hz");
  }
  if (!(contact_slop > 0.0) || solver_iterations < 1 || baumgarte < 0.0 ||
      baumgarte > 1.0 || !(touch_tolerance >= 0.0) || settle_iterations < 0) {
    throw Error(ErrorKind::kInvalidArgument, "invalid solver settings");
  }
  if (disc_radius && !(*disc_radius > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "disc radius override must be > 0");
  }
}

struct Simulator::Contact {
  int a = 0;
  int b = 0;
  Vec2 normal = Vec2::Zero();  // from b towards a
  Vec2 ra = Vec2::Zero();
  Vec2 rb = Vec2::Zero();
  double gap = 0.0;
  double normal_mass = 0.0;
  double tangent_mass = 0.0;
  double target = 0.0;
  double friction = 0.0;
  double lambda_n = 0.0;
  double lambda_t = 0.0;
  double rolling = 0.0;  // bound per unit normal impulse, metres
  double lambda_r = 0.0;
};

struct Simulator::Workspace {
  std::vector<BodyState> bodies;  // links then disc
  std::vector<Vec2> impulse;      // accumulated contact impulse per body
  std::vector<double> limit_lower;
  std::vector<double> limit_upper;
  std::vector<double> drive;
  std::set<std::pair<int, int>> pairs;
};

Simulator::Simulator(ArticulatedModel model, DiscObject disc, SimConfig config)
    : model_(std::move(model)), disc_(std::move(disc)), config_(config) {
  if (config_.disc_radius) disc_.radius = *config_.disc_radius;
  model_.validate();
  disc_.validate();
  config_.validate();
  for (const auto& l : model_.links) {
    inv_mass_.push_back(1.0 / l.mass);
    inv_inertia_.push_back(1.0 / l.moment());
  }
  inv_mass_.push_back(1.0 / disc_.mass);
  inv_inertia_.push_back(1.0 / disc_.moment());
}

std::string Simulator::entity_name(int id) const {
  if (id >= 0 && id < model_.link_count()) {
    return model_.links[static_cast<std::size_t>(id)].name;
  }
  if (id == disc_id()) return disc_.name;
  if (id == ground_id()) return "ground";
  throw Error(ErrorKind::kOutOfRange, "entity id " + std::to_string(id));
}

std::vector<BodyState> Simulator::forward_kinematics(
    const Vec2& root_pos, double root_angle, std::span<const double> q) const {
  if (static_cast<int>(q.size()) != model_.dof()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "expected " + std::to_string(model_.dof()) + " joint angles");
  }
  std::vector<BodyState> out(model_.links.size());
  out[0].pos = root_pos;
  out[0].angle = root_angle;
  for (std::size_t j = 0; j < model_.joints.size(); ++j) {
    const auto& joint = model_.joints[j];
    const auto& parent = out[static_cast<std::size_t>(joint.parent)];
    auto& child = out[static_cast<std::size_t>(joint.child)];
    child.angle = parent.angle + joint.rest_angle + q[j];
    child.pos = parent.pos + rotate(parent.angle, joint.parent_anchor) -
                rotate(child.angle, joint.child_anchor);
  }
  return out;
}

double Simulator::joint_angle(const WorldState& w, int joint) const {
  const auto& spec = model_.joints[static_cast<std::size_t>(joint)];
  return wrap_angle(w.links[static_cast<std::size_t>(spec.child)].angle -
                    w.links[static_cast<std::size_t>(spec.parent)].angle -
                    spec.rest_angle);
}

double Simulator::joint_rate(const WorldState& w, int joint) const {
  const auto& spec = model_.joints[static_cast<std::size_t>(joint)];
  return w.links[static_cast<std::size_t>(spec.child)].omega -
         w.links[static_cast<std::size_t>(spec.parent)].omega;
}

std::vector<Simulator::Contact> Simulator::collect_contacts(
    const Workspace& ws, double dt, bool speculative) const {
  std::vector<Contact> out;
  const int n_links = model_.link_count();
  const int disc = disc_id();
  const BodyState& d = ws.bodies[static_cast<std::size_t>(disc)];
  const double r_disc = disc_.radius;

  auto speed_margin = [&](int a, int b, double extent_a, double extent_b) {
    if (!speculative) return 0.0;
    double s = 0.0;
    for (auto [id, ext] : {std::pair{a, extent_a}, std::pair{b, extent_b}}) {
      if (id == ground_id()) continue;
      const auto& body = ws.bodies[static_cast<std::size_t>(id)];
      s += body.vel.norm() + std::abs(body.omega) * ext;
    }
    return s * dt;
  };

  auto add = [&](int a, int b, const Vec2& n, const Vec2& point, double gap,
                 double friction, double restitution) {
    Contact c;
    c.a = a;
    c.b = b;
    c.normal = n;
    c.gap = gap;
    c.friction = friction;
    const auto& A = ws.bodies[static_cast<std::size_t>(a)];
    c.ra = point - A.pos;
    const double ima = inv_mass_[static_cast<std::size_t>(a)];
    const double iia = inv_inertia_[static_cast<std::size_t>(a)];
    double imb = 0.0, iib = 0.0;
    Vec2 vb = Vec2::Zero();
    if (b != ground_id()) {
      const auto& B = ws.bodies[static_cast<std::size_t>(b)];
      c.rb = point - B.pos;
      imb = inv_mass_[static_cast<std::size_t>(b)];
      iib = inv_inertia_[static_cast<std::size_t>(b)];
      vb = B.vel + cross(B.omega, c.rb);
    }
    const Vec2 t(-n.y(), n.x());
    const double rna = cross(c.ra, n), rnb = cross(c.rb, n);
    const double rta = cross(c.ra, t), rtb = cross(c.rb, t);
    c.normal_mass = 1.0 / (ima + imb + iia * rna * rna + iib * rnb * rnb);
    c.tangent_mass = 1.0 / (ima + imb + iia * rta * rta + iib * rtb * rtb);
    const Vec2 va = A.vel + cross(A.omega, c.ra);
    const double vn0 = (va - vb).dot(n);
    if (!speculative) {
      // Positional settle: push out to half the slop.
      c.target = std::max(-gap - 0.5 * config_.contact_slop, 0.0) / dt;
    } else {
      c.target = gap >= 0.0 ? -gap / dt
                            : config_.baumgarte *
                                  std::max(-gap - config_.contact_slop, 0.0) /
                                  dt;
      if (restitution > 0.0 && vn0 < -config_.restitution_threshold &&
          gap <= -vn0 * dt) {
        c.target = std::max(c.target, -restitution * vn0);
      }
    }
    out.push_back(c);
  };

  const double mu_disc_link = std::sqrt(disc_.friction * model_.friction);
  for (int l = 0; l < n_links; ++l) {
    const auto& spec = model_.links[static_cast<std::size_t>(l)];
    const auto& L = ws.bodies[static_cast<std::size_t>(l)];
    const Vec2 half = rotate(L.angle, Vec2(0.5 * spec.length, 0.0));
    const Vec2 e0 = L.pos - half, e1 = L.pos + half;
    const double extent = 0.5 * spec.length + spec.radius;

    // Disc against capsule.
    {
      const Vec2 seg = e1 - e0;
      const double s =
          std::clamp((d.pos - e0).dot(seg) / seg.squaredNorm(), 0.0, 1.0);
      const Vec2 closest = e0 + s * seg;
      const Vec2 delta = d.pos - closest;
      const double dist = delta.norm();
      const double gap = dist - spec.radius - r_disc;
      const double margin = std::max(config_.touch_tolerance,
                                     speed_margin(disc, l, r_disc, extent));
      if (gap < margin) {
        const Vec2 n = dist > 1e-12 ? Vec2(delta / dist)
                                    : rotate(L.angle, Vec2(0.0, 1.0));
        const Vec2 point = closest + n * (spec.radius + 0.5 * gap);
        add(disc, l, n, point, gap, mu_disc_link, disc_.restitution);
        out.back().rolling = disc_.rolling_resistance * r_disc;
      }
    }
    // Capsule end caps against the ground.
    if (config_.ground) {
      for (const Vec2& e : {e0, e1}) {
        const double gap = e.y() - spec.radius;
        const double margin =
            std::max(config_.touch_tolerance,
                     speed_margin(l, ground_id(), extent, 0.0));
        if (gap < margin) {
          add(l, ground_id(), Vec2(0.0, 1.0), Vec2(e.x(), 0.5 * gap), gap,
              model_.friction, 0.0);
        }
      }
    }
  }
  if (config_.ground) {
    const double gap = d.pos.y() - r_disc;
    const double margin = std::max(config_.touch_tolerance,
                                   speed_margin(disc, ground_id(), r_disc, 0.0));
    if (gap < margin) {
      add(disc, ground_id(), Vec2(0.0, 1.0), Vec2(d.pos.x(), 0.5 * gap), gap,
          std::sqrt(disc_.friction * model_.friction), disc_.restitution);
      out.back().rolling = disc_.rolling_resistance * r_disc;
    }
  }
  return out;
}

void Simulator::solve_contact(Workspace& ws, Contact& c) const {
  auto& A = ws.bodies[static_cast<std::size_t>(c.a)];
  const double ima = inv_mass_[static_cast<std::size_t>(c.a)];
  const double iia = inv_inertia_[static_cast<std::size_t>(c.a)];
  BodyState* B = nullptr;
  double imb = 0.0, iib = 0.0;
  if (c.b != ground_id()) {
    B = &ws.bodies[static_cast<std::size_t>(c.b)];
    imb = inv_mass_[static_cast<std::size_t>(c.b)];
    iib = inv_inertia_[static_cast<std::size_t>(c.b)];
  }
  auto relative_velocity = [&] {
    Vec2 v = A.vel + cross(A.omega, c.ra);
    if (B) v -= B->vel + cross(B->omega, c.rb);
    return v;
  };
  auto apply = [&](const Vec2& p) {
    A.vel += ima * p;
    A.omega += iia * cross(c.ra, p);
    ws.impulse[static_cast<std::size_t>(c.a)] += p;
    if (B) {
      B->vel -= imb * p;
      B->omega -= iib * cross(c.rb, p);
      ws.impulse[static_cast<std::size_t>(c.b)] -= p;
    }
  };

  // Normal.
  {
    const double vn = relative_velocity().dot(c.normal);
    const double next = std::max(c.lambda_n + c.normal_mass * (c.target - vn), 0.0);
    const double delta = next - c.lambda_n;
    c.lambda_n = next;
    apply(delta * c.normal);
  }
  // Friction.
  {
    const Vec2 t(-c.normal.y(), c.normal.x());
    const double vt = relative_velocity().dot(t);
    const double bound = c.friction * c.lambda_n;
    const double next =
        std::clamp(c.lambda_t - c.tangent_mass * vt, -bound, bound);
    const double delta = next - c.lambda_t;
    c.lambda_t = next;
    apply(delta * t);
  }
  if (c.rolling > 0.0) {
    const double spin = A.omega - (B ? B->omega : 0.0);
    const double bound = c.rolling * c.lambda_n;
    const double next =
        std::clamp(c.lambda_r - spin / (iia + iib), -bound, bound);
    const double delta = next - c.lambda_r;
    c.lambda_r = next;
    A.omega += iia * delta;
    if (B) B->omega -= iib * delta;
  }
}

void Simulator::solve_joint_point(Workspace& ws, int j, double dt,
                                  double beta) const {
  const auto& joint = model_.joints[static_cast<std::size_t>(j)];
  auto& P = ws.bodies[static_cast<std::size_t>(joint.parent)];
  auto& C = ws.bodies[static_cast<std::size_t>(joint.child)];
  const double mp = inv_mass_[static_cast<std::size_t>(joint.parent)];
  const double mc = inv_mass_[static_cast<std::size_t>(joint.child)];
  const double ip = inv_inertia_[static_cast<std::size_t>(joint.parent)];
  const double ic = inv_inertia_[static_cast<std::size_t>(joint.child)];
  const Vec2 rp = rotate(P.angle, joint.parent_anchor);
  const Vec2 rc = rotate(C.angle, joint.child_anchor);
  const Vec2 error = (C.pos + rc) - (P.pos + rp);
  const Vec2 cdot =
      C.vel + cross(C.omega, rc) - P.vel - cross(P.omega, rp);
  Eigen::Matrix2d K;
  K(0, 0) = mp + mc + rp.y() * rp.y() * ip + rc.y() * rc.y() * ic;
  K(0, 1) = -rp.y() * rp.x() * ip - rc.y() * rc.x() * ic;
  K(1, 0) = K(0, 1);
  K(1, 1) = mp + mc + rp.x() * rp.x() * ip + rc.x() * rc.x() * ic;
  const Vec2 impulse = -K.inverse() * (cdot + (beta / dt) * error);
  C.vel += mc * impulse;
  C.omega += ic * cross(rc, impulse);
  P.vel -= mp * impulse;
  P.omega -= ip * cross(rp, impulse);
}

void Simulator::solve_joint_limit(Workspace& ws, int j, double dt) const {
  const auto& joint = model_.joints[static_cast<std::size_t>(j)];
  auto& P = ws.bodies[static_cast<std::size_t>(joint.parent)];
  auto& C = ws.bodies[static_cast<std::size_t>(joint.child)];
  const double ip = inv_inertia_[static_cast<std::size_t>(joint.parent)];
  const double ic = inv_inertia_[static_cast<std::size_t>(joint.child)];
  const double mass = 1.0 / (ip + ic);
  const double q = wrap_angle(C.angle - P.angle - joint.rest_angle);
  auto apply = [&](double impulse) {
    C.omega += ic * impulse;
    P.omega -= ip * impulse;
  };
  // Rates that keep q + dt * w inside the limits after integration.
  {
    const double w = C.omega - P.omega;
    const double target = (joint.lower - q) / dt;
    double& acc = ws.limit_lower[static_cast<std::size_t>(j)];
    const double next = std::max(acc + mass * (target - w), 0.0);
    apply(next - acc);
    acc = next;
  }
  {
    const double w = C.omega - P.omega;
    const double target = (joint.upper - q) / dt;
    double& acc = ws.limit_upper[static_cast<std::size_t>(j)];
    const double next = std::min(acc + mass * (target - w), 0.0);
    apply(next - acc);
    acc = next;
  }
}

// PD drive as a soft angular constraint, so the spring is implicit and sees
// the inertia of everything the pins couple to the joint.
void Simulator::solve_drive(Workspace& ws, int j, double dt,
                            double target) const {
  const auto& joint = model_.joints[static_cast<std::size_t>(j)];
  auto& P = ws.bodies[static_cast<std::size_t>(joint.parent)];
  auto& C = ws.bodies[static_cast<std::size_t>(joint.child)];
  const double ip = inv_inertia_[static_cast<std::size_t>(joint.parent)];
  const double ic = inv_inertia_[static_cast<std::size_t>(joint.child)];
  const double kd = model_.joint_kd(j);
  const double soft = 1.0 / (dt * (kd + dt * joint.kp));
  const double bias = joint.kp * soft * dt;  // beta / dt
  const double q = wrap_angle(C.angle - P.angle - joint.rest_angle);
  const double w = C.omega - P.omega;
  double& acc = ws.drive[static_cast<std::size_t>(j)];
  const double lambda =
      -(w + bias * (q - target) + soft * acc) / (ip + ic + soft);
  const double cap = joint.torque_limit * dt;
  const double next = std::clamp(acc + lambda, -cap, cap);
  C.omega += ic * (next - acc);
  P.omega -= ip * (next - acc);
  acc = next;
}

void Simulator::substep(Workspace& ws, std::span<const double> targets) const {
  const double dt = config_.dt();
  for (auto& b : ws.bodies) b.vel += dt * config_.gravity;

  std::vector<Contact> contacts = collect_contacts(ws, dt, true);
  std::fill(ws.limit_lower.begin(), ws.limit_lower.end(), 0.0);
  std::fill(ws.limit_upper.begin(), ws.limit_upper.end(), 0.0);
  std::fill(ws.drive.begin(), ws.drive.end(), 0.0);
  for (int it = 0; it < config_.solver_iterations; ++it) {
    for (int j = 0; j < model_.dof(); ++j) {
      solve_drive(ws, j, dt, targets[static_cast<std::size_t>(j)]);
    }
    for (auto& c : contacts) solve_contact(ws, c);
    for (int j = 0; j < model_.dof(); ++j) {
      solve_joint_point(ws, j, dt, config_.baumgarte);
    }
    for (int j = 0; j < model_.dof(); ++j) solve_joint_limit(ws, j, dt);
  }
  for (const auto& c : contacts) {
    if (c.lambda_n > 0.0) {
      ws.pairs.insert({std::min(c.a, c.b), std::max(c.a, c.b)});
    }
  }
  for (auto& b : ws.bodies) {
    b.pos += dt * b.vel;
    b.angle += dt * b.omega;
  }
  const auto deep = collect_contacts(ws, dt, false);
  if (std::any_of(deep.begin(), deep.end(), [&](const Contact& c) {
        return c.gap < -config_.contact_slop;
      })) {
    project_positions(ws, 1);
  }
}

void Simulator::project_positions(Workspace& ws, int passes) const {
  const double dt = config_.dt();
  std::vector<std::pair<Vec2, double>> saved;
  for (const auto& b : ws.bodies) saved.emplace_back(b.vel, b.omega);
  const auto impulse = ws.impulse;
  const auto lower = ws.limit_lower, upper = ws.limit_upper;

  for (int pass = 0; pass < passes; ++pass) {
    for (auto& b : ws.bodies) {
      b.vel.setZero();
      b.omega = 0.0;
    }
    std::vector<Contact> contacts = collect_contacts(ws, dt, false);
    std::fill(ws.limit_lower.begin(), ws.limit_lower.end(), 0.0);
    std::fill(ws.limit_upper.begin(), ws.limit_upper.end(), 0.0);
    for (int it = 0; it < config_.solver_iterations; ++it) {
      for (auto& c : contacts) solve_contact(ws, c);
      for (int j = 0; j < model_.dof(); ++j) solve_joint_point(ws, j, dt, 1.0);
    }
    for (auto& b : ws.bodies) {
      b.pos += dt * b.vel;
      b.angle += dt * b.omega;
    }
  }
  for (std::size_t i = 0; i < ws.bodies.size(); ++i) {
    ws.bodies[i].vel = saved[i].first;
    ws.bodies[i].omega = saved[i].second;
  }
  ws.impulse = impulse;
  ws.limit_lower = lower;
  ws.limit_upper = upper;
}

WorldState Simulator::step_control(const WorldState& world,
                                   std::span<const double> pd_targets) const {
  if (static_cast<int>(pd_targets.size()) != model_.dof()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "expected " + std::to_string(model_.dof()) + " PD targets, got " +
                    std::to_string(pd_targets.size()));
  }
  std::vector<double> targets(pd_targets.begin(), pd_targets.end());
  for (std::size_t j = 0; j < targets.size(); ++j) {
    if (!std::isfinite(targets[j])) {
      throw Error(ErrorKind::kNonFinite, "PD target is not finite",
                  static_cast<long>(j));
    }
    targets[j] = std::clamp(targets[j], model_.joints[j].lower,
                            model_.joints[j].upper);
  }

  Workspace ws;
  ws.bodies = world.links;
  ws.bodies.push_back(world.disc);
  ws.impulse.assign(ws.bodies.size(), Vec2::Zero());
  ws.limit_lower.assign(model_.joints.size(), 0.0);
  ws.limit_upper.assign(model_.joints.size(), 0.0);
  ws.drive.assign(model_.joints.size(), 0.0);
  for (int s = 0; s < config_.substeps(); ++s) substep(ws, targets);

  WorldState out;
  out.step = world.step + 1;
  out.links.assign(ws.bodies.begin(), ws.bodies.end() - 1);
  out.disc = ws.bodies.back();
  for (const auto& b : ws.bodies) {
    if (!finite(b)) {
      throw Error(ErrorKind::kSimulationDiverged,
                  "non-finite body state after control step", out.step);
    }
  }
  const double inv_dt = 1.0 / config_.control_dt();
  for (int l = 0; l < model_.link_count(); ++l) {
    out.link_forces.push_back(ws.impulse[static_cast<std::size_t>(l)] * inv_dt);
  }
  out.disc_force = ws.impulse.back() * inv_dt;
  for (const auto& p : touching_pairs(out)) ws.pairs.insert({p.a, p.b});
  for (const auto& [a, b] : ws.pairs) out.contacts.push_back({a, b});
  return out;
}

WorldState Simulator::settle(const WorldState& world) const {
  Workspace ws;
  ws.bodies = world.links;
  ws.bodies.push_back(world.disc);
  ws.impulse.assign(ws.bodies.size(), Vec2::Zero());
  ws.limit_lower.assign(model_.joints.size(), 0.0);
  ws.limit_upper.assign(model_.joints.size(), 0.0);
  project_positions(ws, config_.settle_iterations);
  WorldState out = world;
  out.links.assign(ws.bodies.begin(), ws.bodies.end() - 1);
  out.disc = ws.bodies.back();
  for (const auto& b : ws.bodies) {
    if (!finite(b)) {
      throw Error(ErrorKind::kSimulationDiverged, "settle pass diverged",
                  world.step);
    }
  }
  out.contacts = touching_pairs(out);
  return out;
}

double Simulator::disc_link_gap(const WorldState& world, int link) const {
  const auto& spec = model_.links[static_cast<std::size_t>(link)];
  const auto& L = world.links[static_cast<std::size_t>(link)];
  const Vec2 half = rotate(L.angle, Vec2(0.5 * spec.length, 0.0));
  const Vec2 e0 = L.pos - half, seg = 2.0 * half;
  const double s =
      std::clamp((world.disc.pos - e0).dot(seg) / seg.squaredNorm(), 0.0, 1.0);
  return (world.disc.pos - (e0 + s * seg)).norm() - spec.radius - disc_.radius;
}

std::vector<ContactPair> Simulator::touching_pairs(
    const WorldState& world) const {
  std::vector<ContactPair> out;
  const double tol = config_.touch_tolerance;
  for (int l = 0; l < model_.link_count(); ++l) {
    if (disc_link_gap(world, l) <= tol) out.push_back({l, disc_id()});
  }
  if (config_.ground) {
    for (int l = 0; l < model_.link_count(); ++l) {
      const auto& spec = model_.links[static_cast<std::size_t>(l)];
      const auto& L = world.links[static_cast<std::size_t>(l)];
      const double half_y =
          std::abs(std::sin(L.angle)) * 0.5 * spec.length;
      if (L.pos.y() - half_y - spec.radius <= tol) {
        out.push_back({l, ground_id()});
      }
    }
    if (world.disc.pos.y() - disc_.radius <= tol) {
      out.push_back({disc_id(), ground_id()});
    }
  }
  return out;
}

double Simulator::max_penetration(const WorldState& world) const {
  double worst = 0.0;
  for (int l = 0; l < model_.link_count(); ++l) {
    worst = std::max(worst, -disc_link_gap(world, l));
  }
  if (config_.ground) {
    for (int l = 0; l < model_.link_count(); ++l) {
      const auto& spec = model_.links[static_cast<std::size_t>(l)];
      const auto& L = world.links[static_cast<std::size_t>(l)];
      const double half_y = std::abs(std::sin(L.angle)) * 0.5 * spec.length;
      worst = std::max(worst, -(L.pos.y() - half_y - spec.radius));
    }
    worst = std::max(worst, -(world.disc.pos.y() - disc_.radius));
  }
  return worst;
}

ContactEvidence Simulator::read_contacts(const WorldState& world) const {
  ContactEvidence ev;
  for (const auto& p : world.contacts) {
    ev.pairs.emplace_back(entity_name(p.a), entity_name(p.b));
  }
  for (int l = 0; l < model_.link_count(); ++l) {
    ev.net_forces[entity_name(l)] =
        world.link_forces.empty()
            ? Eigen::VectorXd(Eigen::VectorXd::Zero(2))
            : Eigen::VectorXd(world.link_forces[static_cast<std::size_t>(l)]);
  }
  ev.net_forces[disc_.name] = Eigen::VectorXd(world.disc_force);
  return ev;
}

Vec2 Simulator::linear_momentum(const WorldState& world) const {
  Vec2 p = disc_.mass * world.disc.vel;
  for (int l = 0; l < model_.link_count(); ++l) {
    p += model_.links[static_cast<std::size_t>(l)].mass *
         world.links[static_cast<std::size_t>(l)].vel;
  }
  return p;
}

ArticulatedModel toy_arm_model() {
  ArticulatedModel m;
  m.links = {
      {"torso", 0.5, 0.1, 10.0, 0.0},
      {"upper_arm", 0.30, 0.04, 1.0, 0.0},
      {"forearm", 0.25, 0.035, 0.6, 0.0},
      {"hand", 0.16, 0.02, 0.3, 0.0},
  };
  JointSpec shoulder;
  shoulder.parent = 0;
  shoulder.child = 1;
  shoulder.parent_anchor = Vec2(0.15, 0.1);
  shoulder.child_anchor = Vec2(-0.15, 0.0);
  shoulder.rest_angle = 1.75;
  shoulder.lower = -1.4;
  shoulder.upper = 1.4;
  JointSpec elbow;
  elbow.parent = 1;
  elbow.child = 2;
  elbow.parent_anchor = Vec2(0.15, 0.0);
  elbow.child_anchor = Vec2(-0.125, 0.0);
  elbow.rest_angle = -1.95;
  elbow.lower = -2.0;
  elbow.upper = 2.0;
  JointSpec wrist;
  wrist.parent = 2;
  wrist.child = 3;
  wrist.parent_anchor = Vec2(0.125, 0.0);
  wrist.child_anchor = Vec2(-0.08, 0.0);
  wrist.rest_angle = 0.2;
  wrist.lower = -1.5;
  wrist.upper = 1.5;
  shoulder.kp = 400.0;
  elbow.kp = 250.0;
  wrist.kp = 80.0;
  for (auto* j : {&shoulder, &elbow, &wrist}) j->torque_limit = 40.0;
  m.joints = {shoulder, elbow, wrist};
  return m;
}

using nlohmann::json;

namespace {

json vec_json(const Vec2& v) { return json::array({v.x(), v.y()}); }
Vec2 vec_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 2) throw Error(ErrorKind::kSchema, "expected a 2-vector");
  return {v[0], v[1]};
}

void check_keys(const json& j, std::initializer_list<const char*> keys,
                const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    if (std::find_if(keys.begin(), keys.end(), [&](const char* k) {
          return key == k;
        }) == keys.end()) {
      throw Error(ErrorKind::kSchema, "unknown key '" + key + "' in " + where);
    }
  }
}

}  // namespace

json to_json(const ArticulatedModel& model) {
  json links = json::array();
  for (const auto& l : model.links) {
    links.push_back({{"name", l.name},
                     {"length", l.length},
                     {"radius", l.radius},
                     {"mass", l.mass},
                     {"inertia", l.inertia}});
  }
  json joints = json::array();
  for (const auto& j : model.joints) {
    joints.push_back({{"parent", j.parent},
                      {"child", j.child},
                      {"parent_anchor", vec_json(j.parent_anchor)},
                      {"child_anchor", vec_json(j.child_anchor)},
                      {"rest_angle", j.rest_angle},
                      {"lower", j.lower},
                      {"upper", j.upper},
                      {"kp", j.kp},
                      {"kd", j.kd},
                      {"torque_limit", j.torque_limit}});
  }
  return {{"links", links}, {"joints", joints}, {"friction", model.friction}};
}

ArticulatedModel model_from_json(const json& j) {
  check_keys(j, {"links", "joints", "friction"}, "model");
  ArticulatedModel m;
  try {
    for (const auto& lj : j.at("links")) {
      check_keys(lj, {"name", "length", "radius", "mass", "inertia"}, "link");
      LinkSpec l;
      l.name = lj.at("name").get<std::string>();
      l.length = lj.at("length").get<double>();
      l.radius = lj.at("radius").get<double>();
      l.mass = lj.at("mass").get<double>();
      l.inertia = lj.value("inertia", 0.0);
      m.links.push_back(l);
    }
    for (const auto& jj : j.at("joints")) {
      check_keys(jj,
                 {"parent", "child", "parent_anchor", "child_anchor",
                  "rest_angle", "lower", "upper", "kp", "kd", "torque_limit"},
                 "joint");
      JointSpec js;
      js.parent = jj.at("parent").get<int>();
      js.child = jj.at("child").get<int>();
      js.parent_anchor = vec_from(jj.at("parent_anchor"));
      js.child_anchor = vec_from(jj.at("child_anchor"));
      js.rest_angle = jj.value("rest_angle", 0.0);
      js.lower = jj.at("lower").get<double>();
      js.upper = jj.at("upper").get<double>();
      js.kp = jj.value("kp", 60.0);
      js.kd = jj.value("kd", -1.0);
      js.torque_limit = jj.value("torque_limit", 60.0);
      m.joints.push_back(js);
    }
    m.friction = j.value("friction", 0.9);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kSchema, std::string("model: ") + e.what());
  }
  m.validate();
  return m;
}

json to_json(const DiscObject& disc) {
  return {{"name", disc.name},         {"radius", disc.radius},
          {"mass", disc.mass},         {"inertia", disc.inertia},
          {"restitution", disc.restitution}, {"friction", disc.friction},
          {"rolling_resistance", disc.rolling_resistance}};
}

DiscObject disc_from_json(const json& j) {
  check_keys(j,
             {"name", "radius", "mass", "inertia", "restitution", "friction",
              "rolling_resistance"},
             "disc");
  DiscObject d;
  try {
    d.name = j.value("name", d.name);
    d.radius = j.value("radius", d.radius);
    d.mass = j.value("mass", d.mass);
    d.inertia = j.value("inertia", d.inertia);
    d.restitution = j.value("restitution", d.restitution);
    d.friction = j.value("friction", d.friction);
    d.rolling_resistance = j.value("rolling_resistance", d.rolling_resistance);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kSchema, std::string("disc: ") + e.what());
  }
  d.validate();
  return d;
}

json to_json(const SimConfig& c) {
  json j = {{"sim_hz", c.sim_hz},
            {"control_hz", c.control_hz},
            {"gravity", vec_json(c.gravity)},
            {"contact_slop", c.contact_slop},
            {"solver_iterations", c.solver_iterations},
            {"baumgarte", c.baumgarte},
            {"restitution_threshold", c.restitution_threshold},
            {"touch_tolerance", c.touch_tolerance},
            {"settle_iterations", c.settle_iterations},
            {"ground", c.ground}};
  j["disc_radius"] = c.disc_radius ? json(*c.disc_radius) : json(nullptr);
  return j;
}

SimConfig sim_config_from_json(const json& j) {
  check_keys(j,
             {"sim_hz", "control_hz", "gravity", "contact_slop",
              "solver_iterations", "baumgarte", "restitution_threshold",
              "touch_tolerance", "settle_iterations", "ground", "disc_radius"},
             "sim");
  SimConfig c;
  try {
    c.sim_hz = j.value("sim_hz", c.sim_hz);
    c.control_hz = j.value("control_hz", c.control_hz);
    if (j.contains("gravity")) c.gravity = vec_from(j.at("gravity"));
    c.contact_slop = j.value("contact_slop", c.contact_slop);
    c.solver_iterations = j.value("solver_iterations", c.solver_iterations);
    c.baumgarte = j.value("baumgarte", c.baumgarte);
    c.restitution_threshold =
        j.value("restitution_threshold", c.restitution_threshold);
    c.touch_tolerance = j.value("touch_tolerance", c.touch_tolerance);
    c.settle_iterations = j.value("settle_iterations", c.settle_iterations);
    c.ground = j.value("ground", c.ground);
    if (j.contains("disc_radius") && !j.at("disc_radius").is_null()) {
      c.disc_radius = j.at("disc_radius").get<double>();
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kSchema, std::string("sim: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace hoi::physics
