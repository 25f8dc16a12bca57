// hoi: command-line front end for demo generation, training, evaluation
// and data export.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hoi/demo.hpp"
#include "hoi/error.hpp"
#include "hoi/experiment.hpp"
#include "hoi/metrics.hpp"
#include "hoi/sequence_io.hpp"
#include "hoi/train.hpp"

namespace {

using namespace hoi;

constexpr int kUsageError = 2;
constexpr int kValidationError = 1;

void print_warnings(const ValidationReport& report) {
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
}

RefHoiSequence read_sequence(const std::string& path) {
  ValidationReport report;
  RefHoiSequence seq = load_sequence(path, &report);
  print_warnings(report);
  return seq;
}

void write_json(const nlohmann::json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
  out << j.dump(2) << '\n';
}

// Experiment settings for evaluation: those stored in the checkpoint, or
// a config file, or the defaults.
ExperimentConfig eval_config(const Checkpoint* ckpt, const std::string& config_path) {
  if (!config_path.empty()) return load_experiment(config_path);
  if (ckpt && !ckpt->experiment.is_null()) return experiment_from_json(ckpt->experiment);
  return ExperimentConfig{};
}

struct GenDemoArgs {
  std::string task, out, script;
  double duration = 0.0;
  double bias = -1.0;
};

int run_gen_demo(const GenDemoArgs& a) {
  demo::DemoScript script;
  if (!a.script.empty()) {
    std::ifstream in(a.script);
    if (!in) throw Error(ErrorKind::kIo, "cannot open script " + a.script);
    script = demo::script_from_json(nlohmann::json::parse(in));
  } else {
    script = demo::DemoScript::defaults(demo::task_from_string(a.task));
  }
  if (a.duration > 0.0) script.duration = a.duration;
  if (a.bias >= 0.0) script.bias = a.bias;
  script.validate();
  const RefHoiSequence seq = demo::generate(script, Embodiment::toy_arm());
  save_sequence(seq, a.out);
  std::cerr << "wrote " << seq.frame_count() << " frames to " << a.out << '\n';
  return 0;
}

struct TrainArgs {
  std::string config, out, data;
  std::int64_t seed = -1;
  int iterations = 0;
};

int run_train(const TrainArgs& a) {
  ExperimentConfig cfg = load_experiment(a.config);
  if (a.seed >= 0) cfg.seed = static_cast<std::uint64_t>(a.seed);
  if (!a.data.empty()) cfg.sequence_path = a.data;
  if (!a.out.empty()) cfg.output_dir = a.out;
  if (a.iterations > 0) cfg.ppo.iterations = a.iterations;
  if (cfg.sequence_path.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "no sequence given in the config or with --data");
  }
  if (cfg.output_dir.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "no output directory given in the config or with --out");
  }
  cfg.validate();
  const RefHoiSequence seq = read_sequence(cfg.sequence_path);
  TrainOptions opt;
  opt.output_dir = cfg.output_dir;
  const int every = std::max(1, cfg.ppo.iterations / 20);
  opt.on_iteration = [every](const IterationLog& l) {
    if (l.iteration % every == 0 || l.iteration == 1) {
      std::fprintf(stderr, "iter %5d  reward %.4f  len %.1f  value_loss %.4g\n",
                   l.iteration, l.mean_reward.r_total, l.mean_episode_length, l.loss.value);
    }
  };
  const TrainResult res = train(seq, cfg, opt);
  std::cerr << "config " << res.config_hash << ", checkpoint in " << cfg.output_dir << '\n';
  return 0;
}

struct EvalArgs {
  std::string checkpoint, data, config, out, frames;
  bool replay = false;
  int repeats = 10;
};

int run_eval(const EvalArgs& a) {
  if (a.checkpoint.empty() == !a.replay) {
    throw CLI::ValidationError("eval", "give exactly one of --checkpoint and --replay");
  }
  const RefHoiSequence seq = read_sequence(a.data);
  EvalReport report;
  if (a.replay) {
    const ExperimentConfig cfg = eval_config(nullptr, a.config);
    const Rollout r = kinematic_replay(seq, cfg.embodiment, cfg.sim);
    report = score_rollouts(std::vector<Rollout>(static_cast<std::size_t>(a.repeats), r), seq);
  } else {
    const Checkpoint ckpt = load_checkpoint(a.checkpoint);
    const ExperimentConfig cfg = eval_config(&ckpt, a.config);
    report = evaluate(ckpt.policy, seq, cfg, a.repeats);
  }
  nlohmann::json j = to_json(report);
  j.erase("success_mask");
  if (!a.checkpoint.empty()) j["checkpoint"] = a.checkpoint;
  write_json(j, a.out);
  if (!a.frames.empty()) write_frame_csv(report, a.frames);
  return 0;
}

int run_extract_cg(const std::string& data) {
  const RefHoiSequence seq = read_sequence(data);
  for (const auto& f : seq.frames) {
    for (std::size_t e = 0; e < f.cg_edges.size(); ++e) {
      std::cout << (e ? " " : "") << static_cast<int>(f.cg_edges[e]);
    }
    std::cout << '\n';
  }
  return 0;
}

int run_replay(const std::string& data, const std::string& out, const std::string& config) {
  const RefHoiSequence seq = read_sequence(data);
  const ExperimentConfig cfg = eval_config(nullptr, config);
  const Rollout r = kinematic_replay(seq, cfg.embodiment, cfg.sim);
  std::ofstream csv(out);
  if (!csv) throw Error(ErrorKind::kIo, "cannot write " + out);
  csv.precision(10);
  csv << "frame,penetration";
  for (int e = 0; e < seq.cg.edge_count(); ++e) csv << ",sim_edge" << e << ",ref_edge" << e;
  csv << ",body_err,obj_err\n";
  double worst = 0.0;
  int over = 0, mismatched = 0;
  for (int t = 0; t < seq.frame_count(); ++t) {
    const auto& sim = r.states[static_cast<std::size_t>(t)];
    const auto& ref = seq.frames[static_cast<std::size_t>(t)];
    const double pen = r.penetration[static_cast<std::size_t>(t)];
    worst = std::max(worst, pen);
    over += pen > cfg.sim.contact_slop;
    mismatched += sim.cg_edges != ref.cg_edges;
    csv << t << ',' << pen;
    for (std::size_t e = 0; e < ref.cg_edges.size(); ++e) {
      csv << ',' << int(sim.cg_edges[e]) << ',' << int(ref.cg_edges[e]);
    }
    csv << ',' << body_position_error(sim, ref) << ',' << object_position_error(sim, ref) << '\n';
  }
  std::printf("frames %d  max_penetration %.6f m  frames_over_slop %d  cg_mismatch_frames %d\n",
              seq.frame_count(), worst, over, mismatched);
  return 0;
}

int run_rectify(const std::string& checkpoint, const std::string& data, const std::string& out,
                const std::string& config) {
  const RefHoiSequence seq = read_sequence(data);
  const Checkpoint ckpt = load_checkpoint(checkpoint);
  const ExperimentConfig cfg = eval_config(&ckpt, config);
  const RectifiedExport r = export_rectified(ckpt.policy, seq, cfg, out);
  std::printf("frames %d  max_penetration %.6f m  frames_over_slop %d\n",
              r.sequence.frame_count(), r.max_penetration, r.frames_over_slop);
  return 0;
}

void report_error(const Error& e) {
  std::cerr << "error [" << to_string(e.kind()) << "]";
  if (e.index()) std::cerr << " at " << *e.index();
  std::cerr << ": " << e.what() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Physics-based human-object interaction imitation on a planar toy arm"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  GenDemoArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-demo", "Generate a synthetic reference sequence");
  auto* task_opt = gen_cmd->add_option("--task", gen.task, "hold, carry, toss_catch or biased_hold")
                       ->check(CLI::IsMember({"hold", "carry", "toss_catch", "biased_hold"}));
  gen_cmd->add_option("--script", gen.script, "Demo script JSON (instead of --task)")
      ->check(CLI::ExistingFile)
      ->excludes(task_opt);
  gen_cmd->add_option("--out", gen.out, "Output sequence file")->required();
  gen_cmd->add_option("--duration", gen.duration, "Override the duration in seconds");
  gen_cmd->add_option("--bias", gen.bias, "Ball lift off the hand for biased_hold, metres");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train an imitation policy with PPO");
  train_cmd->add_option("--config", tr.config, "Experiment config JSON")
      ->required()
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--seed", tr.seed, "Override the experiment seed")->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--out", tr.out, "Output directory (overrides the config)");
  train_cmd->add_option("--data", tr.data, "Reference sequence (overrides the config)")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--iterations", tr.iterations, "Override the PPO iteration count")
      ->check(CLI::PositiveNumber);

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint or a kinematic replay");
  eval_cmd->add_option("--checkpoint", ev.checkpoint, "Policy checkpoint")->check(CLI::ExistingFile);
  eval_cmd->add_flag("--replay", ev.replay, "Score the kinematic replay of the data instead");
  eval_cmd->add_option("--data", ev.data, "Reference sequence")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--repeats", ev.repeats, "Number of rollouts")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--config", ev.config, "Experiment config (defaults to the checkpoint's)")
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--out", ev.out, "Report JSON path (stdout when omitted)");
  eval_cmd->add_option("--frames", ev.frames, "Per-frame CSV path");

  std::string cg_data;
  auto* cg_cmd = app.add_subcommand("extract-cg", "Print the contact-graph edge vector of every frame");
  cg_cmd->add_option("--data", cg_data, "Sequence file")->required()->check(CLI::ExistingFile);

  std::string rp_data, rp_out, rp_config;
  auto* replay_cmd = app.add_subcommand("replay", "Play a sequence kinematically through the simulator");
  replay_cmd->add_option("--data", rp_data, "Sequence file")->required()->check(CLI::ExistingFile);
  replay_cmd->add_option("--out", rp_out, "Per-frame CSV with penetration and contacts")->required();
  replay_cmd->add_option("--config", rp_config, "Experiment config for the simulator settings")
      ->check(CLI::ExistingFile);

  std::string rc_ckpt, rc_data, rc_out, rc_config;
  auto* rect_cmd = app.add_subcommand("rectify", "Export a physically rectified sequence");
  rect_cmd->add_option("--checkpoint", rc_ckpt, "Policy checkpoint")->required()->check(CLI::ExistingFile);
  rect_cmd->add_option("--data", rc_data, "Reference sequence")->required()->check(CLI::ExistingFile);
  rect_cmd->add_option("--out", rc_out, "Output sequence file")->required();
  rect_cmd->add_option("--config", rc_config, "Experiment config (defaults to the checkpoint's)")
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }
  if (gen_cmd->parsed() && gen.task.empty() && gen.script.empty()) {
    std::cerr << "gen-demo: one of --task and --script is required\n" << gen_cmd->help();
    return kUsageError;
  }

  try {
    if (gen_cmd->parsed()) return run_gen_demo(gen);
    if (train_cmd->parsed()) return run_train(tr);
    if (eval_cmd->parsed()) return run_eval(ev);
    if (cg_cmd->parsed()) return run_extract_cg(cg_data);
    if (replay_cmd->parsed()) return run_replay(rp_data, rp_out, rp_config);
    if (rect_cmd->parsed()) return run_rectify(rc_ckpt, rc_data, rc_out, rc_config);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << '\n';
    return kUsageError;
  } catch (const Error& e) {
    report_error(e);
    return kValidationError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error [schema]: " << e.what() << '\n';
    return kValidationError;
  }
  return kUsageError;
}
