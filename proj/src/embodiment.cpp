#include "hoi/embodiment.hpp"

#include <algorithm>

#include "hoi/error.hpp"
#include "hoi/rotation.hpp"

namespace hoi {

Embodiment Embodiment::toy_arm() {
  Embodiment e;
  e.model = physics::toy_arm_model();
  e.disc = physics::DiscObject{};
  e.contact_links = {3};
  return e;
}

BodyLayout Embodiment::layout() const {
  BodyLayout layout;
  layout.body_count = model.link_count();
  layout.actuated_dof = model.dof();
  layout.spatial_dim = 2;
  layout.rot_feature_dim = 2;
  for (const auto& l : model.links) layout.body_names.push_back(l.name);
  layout.contact_body_indices = contact_links;
  return layout;
}

AggregationMap Embodiment::aggregation() const {
  std::vector<std::string> hands, rest;
  for (int l = 0; l < model.link_count(); ++l) {
    const auto& name = model.links[static_cast<std::size_t>(l)].name;
    if (std::find(contact_links.begin(), contact_links.end(), l) !=
        contact_links.end()) {
      hands.push_back(name);
    } else {
      rest.push_back(name);
    }
  }
  return AggregationMap::ball_play(hands, rest, disc.name);
}

void Embodiment::validate() const {
  model.validate();
  disc.validate();
  layout().validate();
  if (contact_links.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "embodiment needs a contact link");
  }
}

nlohmann::json to_json(const Embodiment& e) {
  return {{"model", physics::to_json(e.model)},
          {"disc", physics::to_json(e.disc)},
          {"contact_links", e.contact_links}};
}

Embodiment embodiment_from_json(const nlohmann::json& j) {
  Embodiment e = Embodiment::toy_arm();
  for (const auto& [key, _] : j.items()) {
    if (key != "model" && key != "disc" && key != "contact_links") {
      throw Error(ErrorKind::kSchema, "unknown key '" + key + "' in embodiment");
    }
  }
  if (j.contains("model")) e.model = physics::model_from_json(j.at("model"));
  if (j.contains("disc")) e.disc = physics::disc_from_json(j.at("disc"));
  if (j.contains("contact_links")) {
    e.contact_links = j.at("contact_links").get<std::vector<int>>();
  }
  e.validate();
  return e;
}

physics::WorldState reset_to_frame(const physics::Simulator& sim,
                                   const RefHoiSequence& seq,
                                   int frame_index, bool settle) {
  if (frame_index < 0 || frame_index >= seq.frame_count()) {
    throw Error(ErrorKind::kOutOfRange,
                "frame " + std::to_string(frame_index) + " outside sequence of " +
                    std::to_string(seq.frame_count()),
                frame_index);
  }
  const int links = sim.model().link_count();
  if (seq.layout.body_count != links || seq.layout.spatial_dim != 2 ||
      seq.object_count() != 1) {
    throw Error(ErrorKind::kDimensionMismatch,
                "sequence layout does not match the simulated model");
  }
  const auto& f = seq.frames[static_cast<std::size_t>(frame_index)];
  const double fps = seq.fps;
  auto body_state = [&](const Motion& m, int row) {
    physics::BodyState b;
    b.pos = m.pos.row(row).transpose();
    const Eigen::Vector2d feature = m.rot.row(row).transpose();
    b.angle = decode_rotation(feature);
    b.vel = m.pos_vel.row(row).transpose() * fps;
    b.omega =
        feature_angle_delta(feature, m.rot_vel.row(row).transpose()) * fps;
    return b;
  };
  physics::WorldState w;
  for (int l = 0; l < links; ++l) w.links.push_back(body_state(f.body, l));
  w.disc = body_state(f.object, 0);
  w.link_forces.assign(static_cast<std::size_t>(links),
                       physics::Vec2::Zero());
  w.disc_force.setZero();
  return settle ? sim.settle(w) : w;
}

RootPose root_pose(const physics::WorldState& world) {
  const auto& root = world.links.at(0);
  RootPose pose;
  pose.position = root.pos;
  pose.orientation = encode_rotation(root.angle);
  return pose;
}

static Motion motion_of(const std::vector<physics::BodyState>& now,
                        const std::vector<physics::BodyState>& prev) {
  const int n = static_cast<int>(now.size());
  Motion m = Motion::zeros(n, 2, 2);
  for (int i = 0; i < n; ++i) {
    const auto& b = now[static_cast<std::size_t>(i)];
    const auto& p = prev[static_cast<std::size_t>(i)];
    m.pos.row(i) = b.pos.transpose();
    m.rot.row(i) = encode_rotation(b.angle).transpose();
    m.pos_vel.row(i) = (b.pos - p.pos).transpose();
    m.rot_vel.row(i) =
        (encode_rotation(b.angle) - encode_rotation(p.angle)).transpose();
  }
  return m;
}

HoiState observe_world(const physics::Simulator& sim, const Embodiment& body,
                       const physics::WorldState& now,
                       const physics::WorldState& previous) {
  HoiState s;
  s.body = motion_of(now.links, previous.links);
  s.object = motion_of({now.disc}, {previous.disc});
  s.ig = compute_ig(s.body.pos, s.object.pos, body.contact_links);
  s.cg_edges = extract_cg(sim.read_contacts(now), body.aggregation()).edges;
  return s;
}

SimHoiState observe_local(const physics::Simulator& sim, const Embodiment& body,
                          const physics::WorldState& now,
                          const physics::WorldState& previous) {
  (void)sim;
  WorldReadout readout;
  readout.body = motion_of(now.links, previous.links);
  readout.object = motion_of({now.disc}, {previous.disc});
  readout.contact_forces.resize(static_cast<int>(body.contact_links.size()), 2);
  for (std::size_t i = 0; i < body.contact_links.size(); ++i) {
    const auto link = static_cast<std::size_t>(body.contact_links[i]);
    readout.contact_forces.row(static_cast<int>(i)) =
        now.link_forces.empty() ? Eigen::RowVector2d::Zero()
                                : Eigen::RowVector2d(now.link_forces[link].transpose());
  }
  return to_root_local(readout, root_pose(now));
}

std::vector<double> reference_joint_angles(const Embodiment& body,
                                           const RefHoiState& frame) {
  const auto& rot = frame.body.rot;
  if (rot.rows() != body.model.link_count() || rot.cols() != 2) {
    throw Error(ErrorKind::kDimensionMismatch,
                "frame does not match the embodiment's bodies");
  }
  std::vector<double> q;
  for (const auto& j : body.model.joints) {
    const double child = decode_rotation(Eigen::Vector2d(rot.row(j.child).transpose()));
    const double parent = decode_rotation(Eigen::Vector2d(rot.row(j.parent).transpose()));
    q.push_back(wrap_angle(child - parent - j.rest_angle));
  }
  return q;
}

}  // namespace hoi
