#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "hoi/contact_graph.hpp"

namespace hoi::physics {

using Vec2 = Eigen::Vector2d;

// Capsule link lying along its local x axis, centred on the link origin.
struct LinkSpec {
  std::string name;
  double length = 0.3;
  double radius = 0.04;
  double mass = 1.0;
  double inertia = 0.0;  // about the centre; <= 0 means "use the capsule rod formula"

  double moment() const;
};

// Revolute joint between two links. The joint angle is
// q = wrap(theta_child - theta_parent - rest_angle).
struct JointSpec {
  int parent = 0;
  int child = 1;
  Vec2 parent_anchor = Vec2::Zero();
  Vec2 child_anchor = Vec2::Zero();
  double rest_angle = 0.0;
  double lower = -2.0;
  double upper = 2.0;
  double kp = 60.0;
  double kd = -1.0;  // < 0: 2 sqrt(kp I) with I the child inertia about the anchor
  double torque_limit = 60.0;
};

// Link 0 is the root and has a free planar base.
struct ArticulatedModel {
  std::vector<LinkSpec> links;
  std::vector<JointSpec> joints;
  double friction = 0.9;

  int link_count() const { return static_cast<int>(links.size()); }
  int dof() const { return static_cast<int>(joints.size()); }
  double joint_kd(int j) const;
  void validate() const;
};

struct DiscObject {
  std::string name = "ball";
  double radius = 0.08;
  double mass = 0.3;
  double inertia = 0.0;  // <= 0: solid disc 0.5 m r^2
  double restitution = 0.2;
  double friction = 0.9;
  // Bounds the spin torque at a contact by this times radius times the normal force.
  double rolling_resistance = 0.5;

  double moment() const;
  void validate() const;
};

struct SimConfig {
  int sim_hz = 60;
  int control_hz = 30;
  Vec2 gravity{0.0, -9.81};
  double contact_slop = 5e-3;
  int solver_iterations = 40;
  double baumgarte = 0.2;
  double restitution_threshold = 1.0;  // m/s approach speed for bouncing
  double touch_tolerance = 1e-2;       // gap counted as touching
  int settle_iterations = 5;
  bool ground = true;
  std::optional<double> disc_radius;  // overrides DiscObject::radius

  int substeps() const { return sim_hz / control_hz; }
  double dt() const { return 1.0 / sim_hz; }
  double control_dt() const { return 1.0 / control_hz; }
  void validate() const;
};

struct BodyState {
  Vec2 pos = Vec2::Zero();
  double angle = 0.0;
  Vec2 vel = Vec2::Zero();
  double omega = 0.0;
  bool operator==(const BodyState&) const = default;
};

// Entity ids: links are 0..L-1, the disc is L, the ground is L+1.
struct ContactPair {
  int a = 0;
  int b = 0;
  bool operator==(const ContactPair&) const = default;
};

struct WorldState {
  std::vector<BodyState> links;
  BodyState disc;
  // Net contact force per link and on the disc, averaged over the last
  // control step.
  std::vector<Vec2> link_forces;
  Vec2 disc_force = Vec2::Zero();
  std::vector<ContactPair> contacts;
  long step = 0;  // control steps taken since reset

  bool operator==(const WorldState&) const = default;
};

class Simulator {
 public:
  Simulator(ArticulatedModel model, DiscObject disc, SimConfig config);

  const ArticulatedModel& model() const { return model_; }
  const DiscObject& disc() const { return disc_; }
  const SimConfig& config() const { return config_; }

  int disc_id() const { return model_.link_count(); }
  int ground_id() const { return model_.link_count() + 1; }
  std::string entity_name(int id) const;

  // World poses of every link with joints assembled from root pose and
  // joint angles (angles measured from rest).
  std::vector<BodyState> forward_kinematics(const Vec2& root_pos,
                                            double root_angle,
                                            std::span<const double> q) const;

  double joint_angle(const WorldState& w, int joint) const;
  double joint_rate(const WorldState& w, int joint) const;

  // Clamps targets to the joint limits and advances one control step.
  WorldState step_control(const WorldState& world,
                          std::span<const double> pd_targets) const;

  // Positional pass (no gravity) that pushes interpenetrating shapes apart.
  WorldState settle(const WorldState& world) const;

  ContactEvidence read_contacts(const WorldState& world) const;

  // Largest penetration depth over all shape pairs (0 when separated).
  double max_penetration(const WorldState& world) const;
  // Signed distance between the disc and a link surface.
  double disc_link_gap(const WorldState& world, int link) const;

  // Pairs whose surfaces are within touch_tolerance right now.
  std::vector<ContactPair> touching_pairs(const WorldState& world) const;

  Vec2 linear_momentum(const WorldState& world) const;

 private:
  struct Contact;
  struct Workspace;

  void substep(Workspace& ws, std::span<const double> targets) const;
  void project_positions(Workspace& ws, int passes) const;
  std::vector<Contact> collect_contacts(const Workspace& ws, double dt,
                                        bool speculative) const;
  void solve_contact(Workspace& ws, Contact& c) const;
  void solve_joint_point(Workspace& ws, int j, double dt, double beta) const;
  void solve_joint_limit(Workspace& ws, int j, double dt) const;
  void solve_drive(Workspace& ws, int j, double dt, double target) const;

  ArticulatedModel model_;
  DiscObject disc_;
  SimConfig config_;
  std::vector<double> inv_mass_;
  std::vector<double> inv_inertia_;
};

ArticulatedModel toy_arm_model();

nlohmann::json to_json(const ArticulatedModel& model);
ArticulatedModel model_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DiscObject& disc);
DiscObject disc_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SimConfig& config);
SimConfig sim_config_from_json(const nlohmann::json& j);

}  // namespace hoi::physics
