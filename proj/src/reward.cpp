#include "hoi/reward.hpp"

#include <cmath>
#include <set>

#include "hoi/contact_graph.hpp"
#include "hoi/error.hpp"

namespace hoi {

RewardWeights RewardWeights::ball_play() { return RewardWeights{}; }

RewardWeights RewardWeights::grab() {
  RewardWeights w;
  w.or_ = 0.1;
  w.orv = 0.01;
  w.cg = {50.0, 5.0, 5.0};
  return w;
}

void RewardWeights::validate(int edge_count) const {
  for (double v : {p, r, pv, rv, op, or_, opv, orv, ig}) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorKind::kInvalidArgument,
                  "reward weights must be finite and non-negative");
    }
  }
  for (double v : cg) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorKind::kInvalidArgument,
                  "contact graph weights must be finite and non-negative");
    }
  }
  if (static_cast<int>(cg.size()) != edge_count) {
    throw Error(ErrorKind::kDimensionMismatch,
                "lambda cg has " + std::to_string(cg.size()) +
                    " entries for " + std::to_string(edge_count) + " edges");
  }
}

std::string to_string(RewardMode mode) {
  switch (mode) {
    case RewardMode::kMultiplicative: return "multiplicative";
    case RewardMode::kKinematicOnly: return "kinematic_only";
    case RewardMode::kKinematicNoIg: return "kinematic_no_ig";
    case RewardMode::kDeepMimicAdditive: return "deepmimic_additive";
  }
  return "unknown";
}

RewardMode reward_mode_from_string(const std::string& name) {
  for (auto mode : {RewardMode::kMultiplicative, RewardMode::kKinematicOnly,
                    RewardMode::kKinematicNoIg,
                    RewardMode::kDeepMimicAdditive}) {
    if (to_string(mode) == name) return mode;
  }
  throw Error(ErrorKind::kInvalidArgument, "unknown reward mode '" + name + "'");
}

double exp_reward(double error, double lambda) {
  if (error < 0.0 || std::isnan(error)) {
    throw Error(ErrorKind::kInvalidArgument,
                "reward error must be non-negative, got " +
                    std::to_string(error));
  }
  if (lambda < 0.0) {
    throw Error(ErrorKind::kInvalidArgument, "lambda must be non-negative");
  }
  return std::exp(-lambda * error);
}

static ChannelRewards motion_reward(const Motion& sim, const Motion& ref,
                                    double lp, double lr, double lpv,
                                    double lrv) {
  ChannelRewards c;
  c.pos = exp_reward(mse(sim.pos, ref.pos), lp);
  c.rot = exp_reward(mse(sim.rot, ref.rot), lr);
  c.pos_vel = exp_reward(mse(sim.pos_vel, ref.pos_vel), lpv);
  c.rot_vel = exp_reward(mse(sim.rot_vel, ref.rot_vel), lrv);
  c.product = c.pos * c.rot * c.pos_vel * c.rot_vel;
  return c;
}

ChannelRewards body_reward(const BodyMotion& sim, const BodyMotion& ref,
                           const RewardWeights& w) {
  return motion_reward(sim, ref, w.p, w.r, w.pv, w.rv);
}

ChannelRewards object_reward(const ObjectMotion& sim, const ObjectMotion& ref,
                             const RewardWeights& w) {
  return motion_reward(sim, ref, w.op, w.or_, w.opv, w.orv);
}

double ig_reward(const InteractionGraphState& sim,
                 const InteractionGraphState& ref, double lambda_ig) {
  return exp_reward(mse(sim.vectors, ref.vectors), lambda_ig);
}

double cg_reward(std::span<const std::uint8_t> e_cg,
                 std::span<const double> lambda_cg) {
  if (e_cg.size() != lambda_cg.size()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "edge error has " + std::to_string(e_cg.size()) +
                    " entries, lambda cg " + std::to_string(lambda_cg.size()));
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < e_cg.size(); ++j) {
    sum += lambda_cg[j] * static_cast<double>(e_cg[j]);
  }
  return std::exp(-sum);
}

RewardBreakdown total_reward(const HoiState& sim, const RefHoiState& ref,
                             const RewardWeights& w, RewardMode mode) {
  RewardBreakdown out;
  const ChannelRewards b = body_reward(sim.body, ref.body, w);
  const ChannelRewards o = object_reward(sim.object, ref.object, w);
  out.r_p = b.pos;
  out.r_r = b.rot;
  out.r_pv = b.pos_vel;
  out.r_rv = b.rot_vel;
  out.r_b = b.product;
  out.r_op = o.pos;
  out.r_or = o.rot;
  out.r_opv = o.pos_vel;
  out.r_orv = o.rot_vel;
  out.r_o = o.product;
  out.r_ig = ig_reward(sim.ig, ref.ig, w.ig);
  out.r_cg = cg_reward(cg_error(sim.cg_edges, ref.cg_edges), w.cg);
  switch (mode) {
    case RewardMode::kMultiplicative:
      out.r_total = out.r_b * out.r_o * out.r_ig * out.r_cg;
      break;
    case RewardMode::kKinematicOnly:
      out.r_total = out.r_b * out.r_o * out.r_ig;
      break;
    case RewardMode::kKinematicNoIg:
      out.r_total = out.r_b * out.r_o;
      break;
    case RewardMode::kDeepMimicAdditive:
      out.r_total = (out.r_p + out.r_r + out.r_pv + out.r_rv + out.r_op +
                     out.r_or + out.r_opv + out.r_orv) /
                    8.0;
      break;
  }
  return out;
}

RewardConfig reward_config_from_json(const nlohmann::json& j) {
  RewardConfig cfg;
  for (const auto& [key, _] : j.items()) {
    if (key != "mode" && key != "lambda") {
      throw Error(ErrorKind::kSchema, "unknown key '" + key + "' in reward");
    }
  }
  try {
    if (j.contains("mode")) {
      cfg.mode = reward_mode_from_string(j.at("mode").get<std::string>());
    }
    if (j.contains("lambda")) {
      const auto& l = j.at("lambda");
      static const std::set<std::string> known{
          "p", "r", "pv", "rv", "op", "or", "opv", "orv", "ig", "cg"};
      for (const auto& [key, _] : l.items()) {
        if (!known.count(key)) {
          throw Error(ErrorKind::kSchema,
                      "unknown key '" + key + "' in reward.lambda");
        }
      }
      auto& w = cfg.weights;
      w.p = l.value("p", w.p);
      w.r = l.value("r", w.r);
      w.pv = l.value("pv", w.pv);
      w.rv = l.value("rv", w.rv);
      w.op = l.value("op", w.op);
      w.or_ = l.value("or", w.or_);
      w.opv = l.value("opv", w.opv);
      w.orv = l.value("orv", w.orv);
      w.ig = l.value("ig", w.ig);
      if (l.contains("cg")) w.cg = l.at("cg").get<std::vector<double>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kSchema, std::string("reward: ") + e.what());
  }
  return cfg;
}

nlohmann::json to_json(const RewardConfig& cfg) {
  const auto& w = cfg.weights;
  return {{"mode", to_string(cfg.mode)},
          {"lambda",
           {{"p", w.p},
            {"r", w.r},
            {"pv", w.pv},
            {"rv", w.rv},
            {"op", w.op},
            {"or", w.or_},
            {"opv", w.opv},
            {"orv", w.orv},
            {"ig", w.ig},
            {"cg", w.cg}}}};
}

}  // namespace hoi
