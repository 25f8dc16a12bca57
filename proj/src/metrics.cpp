#include "hoi/metrics.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <thread>

#include "hoi/error.hpp"
#include "hoi/sequence_io.hpp"
#include "hoi/train.hpp"

namespace hoi {

namespace {

double edge_mse(const std::vector<std::uint8_t>& a,
                const std::vector<std::uint8_t>& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "edge vectors differ in length");
  }
  if (a.empty()) return 0.0;
  int wrong = 0;
  for (std::size_t k = 0; k < a.size(); ++k) wrong += a[k] != b[k];
  return static_cast<double>(wrong) / static_cast<double>(a.size());
}

}  // namespace

bool frame_success(const HoiState& sim, const HoiState& ref,
                   const SuccessThresholds& thresholds) {
  if (sim.cg_edges.size() != ref.cg_edges.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "frames have different edge counts");
  }
  return object_position_error(sim, ref) <= thresholds.object &&
         body_position_error(sim, ref) <= thresholds.body &&
         sim.cg_edges == ref.cg_edges;
}

double mpjpe(std::span<const Eigen::MatrixXd> sim,
             std::span<const Eigen::MatrixXd> ref) {
  if (sim.size() != ref.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "trajectories differ in length");
  }
  double sum = 0.0;
  long count = 0;
  for (std::size_t t = 0; t < sim.size(); ++t) {
    if (sim[t].rows() != ref[t].rows() || sim[t].cols() != ref[t].cols()) {
      throw Error(ErrorKind::kDimensionMismatch, "frame shapes differ",
                  static_cast<long>(t));
    }
    sum += (sim[t] - ref[t]).rowwise().norm().sum();
    count += sim[t].rows();
  }
  return count == 0 ? 0.0 : 1000.0 * sum / static_cast<double>(count);
}

double contact_accuracy(const std::vector<std::vector<std::uint8_t>>& sim,
                        const std::vector<std::vector<std::uint8_t>>& ref) {
  if (sim.size() != ref.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "edge sequences differ in length");
  }
  if (sim.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t t = 0; t < sim.size(); ++t) sum += edge_mse(sim[t], ref[t]);
  return sum / static_cast<double>(sim.size());
}

Rollout rollout_policy(const ActorCritic& policy, const RefHoiSequence& seq,
                       const ExperimentConfig& cfg) {
  auto shared = std::make_shared<const RefHoiSequence>(seq);
  HoiEnv env(shared, cfg.embodiment, cfg.sim, cfg.reward, cfg.termination,
             false);
  if (env.state_dim() != policy.state_dim() ||
      env.action_dim() != policy.action_dim()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "checkpoint does not fit this sequence and embodiment");
  }
  Rollout r;
  Eigen::VectorXd state = env.reset();
  r.states.push_back(env.observe());
  r.penetration.push_back(env.simulator().max_penetration(env.world()));
  while (!env.done()) {
    const EnvStep step = env.step(policy.deterministic_action(state).action);
    r.reason = step.reason;
    if (step.reason == TerminationReason::kDiverged) {
      r.diverged_at = step.frame;
      break;
    }
    r.states.push_back(step.sim);
    r.penetration.push_back(env.simulator().max_penetration(env.world()));
    state = step.state;
  }
  return r;
}

Rollout kinematic_replay(const RefHoiSequence& seq, const Embodiment& body,
                         const physics::SimConfig& sim_config) {
  const physics::Simulator sim(body.model, body.disc, sim_config);
  Rollout r;
  physics::WorldState previous;
  for (int t = 0; t < seq.frame_count(); ++t) {
    const physics::WorldState now = reset_to_frame(sim, seq, t);
    r.states.push_back(observe_world(sim, body, now, t == 0 ? now : previous));
    r.penetration.push_back(sim.max_penetration(now));
    previous = now;
  }
  r.reason = TerminationReason::kMaxTime;
  return r;
}

EvalReport score_rollouts(const std::vector<Rollout>& rollouts,
                          const RefHoiSequence& seq,
                          const SuccessThresholds& thresholds) {
  EvalReport report;
  std::vector<Eigen::MatrixXd> sim_body, ref_body, sim_obj, ref_obj;
  double cg_sum = 0.0;
  const int frames = seq.frame_count();
  for (std::size_t rep = 0; rep < rollouts.size(); ++rep) {
    const Rollout& r = rollouts[rep];
    ++report.episodes;
    ++report.terminations[static_cast<std::size_t>(r.reason)];
    for (int t = 1; t < frames; ++t) {
      const auto& ref = seq.frames[static_cast<std::size_t>(t)];
      FrameRecord rec;
      rec.repeat = static_cast<int>(rep);
      rec.frame = t;
      if (t >= static_cast<int>(r.states.size())) {
        rec.diverged = true;
        rec.cg_err = 1.0;
        rec.body_err = rec.obj_err = std::numeric_limits<double>::quiet_NaN();
      } else {
        const auto& sim = r.states[static_cast<std::size_t>(t)];
        rec.success = frame_success(sim, ref, thresholds);
        rec.body_err = body_position_error(sim, ref);
        rec.obj_err = object_position_error(sim, ref);
        rec.cg_err = edge_mse(sim.cg_edges, ref.cg_edges);
        sim_body.push_back(sim.body.pos);
        ref_body.push_back(ref.body.pos);
        sim_obj.push_back(sim.object.pos);
        ref_obj.push_back(ref.object.pos);
      }
      cg_sum += rec.cg_err;
      report.success_mask.push_back(rec.success ? 1 : 0);
      report.frames.push_back(rec);
    }
  }
  const double n = static_cast<double>(report.success_mask.size());
  if (n > 0) {
    double hits = 0.0;
    for (auto s : report.success_mask) hits += s;
    report.succ = hits / n;
    report.e_cg = cg_sum / n;
  }
  report.e_b_mpjpe = mpjpe(sim_body, ref_body);
  report.e_o_mpjpe = mpjpe(sim_obj, ref_obj);
  return report;
}

EvalReport evaluate(const ActorCritic& policy, const RefHoiSequence& seq,
                    const ExperimentConfig& cfg, int repeats, int workers) {
  if (repeats < 1) throw Error(ErrorKind::kInvalidArgument, "repeats must be >= 1");
  std::vector<Rollout> rollouts(static_cast<std::size_t>(repeats));
  workers = std::max(1, std::min(workers > 0 ? workers : default_worker_count(),
                                 repeats));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  auto run = [&](int w) {
    try {
      for (int r = w; r < repeats; r += workers) {
        rollouts[static_cast<std::size_t>(r)] = rollout_policy(policy, seq, cfg);
      }
    } catch (...) {
      errors[static_cast<std::size_t>(w)] = std::current_exception();
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> threads;
    for (int w = 0; w < workers; ++w) threads.emplace_back(run, w);
    for (auto& t : threads) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return score_rollouts(rollouts, seq);
}

nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json hist = nlohmann::json::object();
  for (int k = 0; k < kTerminationReasonCount; ++k) {
    const auto reason = static_cast<TerminationReason>(k);
    if (reason == TerminationReason::kNone) continue;
    hist[to_string(reason)] = r.terminations[static_cast<std::size_t>(k)];
  }
  return {{"succ", r.succ},
          {"e_b_mpjpe_mm", r.e_b_mpjpe},
          {"e_o_mpjpe_mm", r.e_o_mpjpe},
          {"e_cg", r.e_cg},
          {"episodes", r.episodes},
          {"scored_frames", r.success_mask.size()},
          {"terminations", hist},
          {"success_mask", r.success_mask}};
}

void write_frame_csv(const EvalReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
  out.precision(10);
  out << "repeat,frame,success,body_err,obj_err,cg_err\n";
  for (const auto& f : report.frames) {
    out << f.repeat << ',' << f.frame << ',' << (f.success ? 1 : 0) << ',';
    if (f.diverged) {
      out << ",," << f.cg_err << '\n';
    } else {
      out << f.body_err << ',' << f.obj_err << ',' << f.cg_err << '\n';
    }
  }
  if (!out) throw Error(ErrorKind::kIo, "failed writing " + path);
}

RectifiedExport export_rectified(const ActorCritic& policy,
                                 const RefHoiSequence& seq,
                                 const ExperimentConfig& cfg,
                                 const std::string& out_path) {
  const Rollout r = rollout_policy(policy, seq, cfg);
  if (r.diverged_at >= 0) {
    throw Error(ErrorKind::kSimulationDiverged,
                "rollout diverged; no rectified sequence written", r.diverged_at);
  }
  RectifiedExport out;
  RefHoiSequence& rect = out.sequence;
  rect.layout = seq.layout;
  rect.fps = cfg.sim.control_hz;
  rect.cg = cfg.embodiment.aggregation();
  rect.object_names = cfg.embodiment.object_names();
  for (std::size_t t = 0; t < r.states.size(); ++t) {
    RefHoiState f = r.states[t];
    rect.frames.push_back(std::move(f));
    out.max_penetration = std::max(out.max_penetration, r.penetration[t]);
    if (r.penetration[t] > cfg.sim.contact_slop) ++out.frames_over_slop;
  }
  refresh_derived(rect);
  validate_sequence(rect);
  if (!out_path.empty()) save_sequence(rect, out_path);
  return out;
}

}  // namespace hoi
