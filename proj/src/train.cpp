#include "hoi/train.hpp"

#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <thread>

#include "hoi/error.hpp"

namespace hoi {

namespace {

struct EnvSlot {
  std::unique_ptr<HoiEnv> env;
  std::mt19937_64 rng;
  Eigen::VectorXd state;
  int length = 0;
};

struct Segment {
  Eigen::MatrixXd states, actions;
  std::vector<double> log_probs, rewards, values, next_values;
  std::vector<std::uint8_t> dones;
  std::vector<RewardBreakdown> breakdowns;
  std::vector<TerminationReason> reasons;
  std::vector<int> finished_lengths;
  bool diverged = false;
};

void collect(EnvSlot& slot, const ActorCritic& policy, int horizon, Segment& seg) {
  const int s = policy.state_dim(), d = policy.action_dim();
  seg = Segment{};
  seg.states.resize(s, horizon);
  seg.actions.resize(d, horizon);
  for (int h = 0; h < horizon; ++h) {
    const ActionSample a = policy.sample_action(slot.state, slot.rng);
    seg.states.col(h) = slot.state;
    seg.actions.col(h) = a.action;
    seg.log_probs.push_back(a.log_prob);
    seg.values.push_back(policy.value(slot.state));
    EnvStep step = slot.env->step(a.action);
    ++slot.length;
    seg.rewards.push_back(step.reward.r_total);
    seg.breakdowns.push_back(step.reward);
    seg.reasons.push_back(step.reason);
    seg.dones.push_back(step.done ? 1 : 0);
    if (step.reason == TerminationReason::kDiverged) seg.diverged = true;
    if (step.done && step.reason != TerminationReason::kMaxTime) {
      seg.next_values.push_back(0.0);
    } else {
      seg.next_values.push_back(policy.value(step.state));
    }
    if (step.done) {
      seg.finished_lengths.push_back(slot.length);
      slot.length = 0;
      slot.state = slot.env->reset();
    } else {
      slot.state = std::move(step.state);
    }
  }
}

void run_parallel(int tasks, int workers, const std::function<void(int)>& fn) {
  workers = std::max(1, std::min(workers, tasks));
  if (workers == 1) {
    for (int i = 0; i < tasks; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::vector<std::thread> threads;
  for (int w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      try {
        for (int i = w; i < tasks; i += workers) fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void add(RewardBreakdown& sum, const RewardBreakdown& r, double k) {
  sum.r_p += k * r.r_p;
  sum.r_r += k * r.r_r;
  sum.r_pv += k * r.r_pv;
  sum.r_rv += k * r.r_rv;
  sum.r_b += k * r.r_b;
  sum.r_op += k * r.r_op;
  sum.r_or += k * r.r_or;
  sum.r_opv += k * r.r_opv;
  sum.r_orv += k * r.r_orv;
  sum.r_o += k * r.r_o;
  sum.r_ig += k * r.r_ig;
  sum.r_cg += k * r.r_cg;
  sum.r_total += k * r.r_total;
}

RewardBreakdown zero_breakdown() {
  RewardBreakdown z;
  add(z, z, -1.0);
  return z;
}

}  // namespace

std::string training_log_header() {
  std::string h =
      "iteration,env_steps,episodes,mean_episode_length,max_episode_length,"
      "r_total,r_b,r_p,r_r,r_pv,r_rv,r_o,r_op,r_or,r_opv,r_orv,r_ig,r_cg";
  for (int k = 0; k < kTerminationReasonCount; ++k) {
    const auto reason = static_cast<TerminationReason>(k);
    if (reason == TerminationReason::kNone) continue;
    h += ",term_" + to_string(reason);
  }
  h += ",diverged_envs,loss_total,loss_policy,loss_value,entropy,approx_kl,"
       "clip_fraction,grad_norm,mean_std";
  return h;
}

std::string to_csv_row(const IterationLog& l) {
  std::ostringstream o;
  o.precision(10);
  const auto& r = l.mean_reward;
  o << l.iteration << ',' << l.env_steps << ',' << l.episodes << ','
    << l.mean_episode_length << ',' << l.max_episode_length << ',' << r.r_total
    << ',' << r.r_b << ',' << r.r_p << ',' << r.r_r << ',' << r.r_pv << ','
    << r.r_rv << ',' << r.r_o << ',' << r.r_op << ',' << r.r_or << ','
    << r.r_opv << ',' << r.r_orv << ',' << r.r_ig << ',' << r.r_cg;
  for (int k = 0; k < kTerminationReasonCount; ++k) {
    if (static_cast<TerminationReason>(k) == TerminationReason::kNone) continue;
    o << ',' << l.terminations[static_cast<std::size_t>(k)];
  }
  o << ',' << l.diverged_envs << ',' << l.loss.total << ',' << l.loss.policy
    << ',' << l.loss.value << ',' << l.loss.entropy << ',' << l.loss.approx_kl
    << ',' << l.loss.clip_fraction << ',' << l.loss.grad_norm << ','
    << l.mean_std;
  return o.str();
}

int default_worker_count() {
  if (const char* env = std::getenv("HOI_NUM_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

TrainResult train(const RefHoiSequence& seq, const ExperimentConfig& cfg,
                  const TrainOptions& options) {
  cfg.validate();
  validate_sequence(seq);
  const PpoConfig& ppo = cfg.ppo;
  auto shared = std::make_shared<const RefHoiSequence>(seq);

  std::vector<EnvSlot> slots(static_cast<std::size_t>(ppo.env_count));
  for (int e = 0; e < ppo.env_count; ++e) {
    auto& slot = slots[static_cast<std::size_t>(e)];
    slot.env = std::make_unique<HoiEnv>(shared, cfg.embodiment, cfg.sim,
                                        cfg.reward, cfg.termination, true);
    slot.rng.seed(cfg.seed + static_cast<std::uint64_t>(e));
    slot.state = slot.env->reset();
  }
  const HoiEnv& probe = *slots.front().env;

  std::seed_seq init_seq{cfg.seed, std::uint64_t{1}};
  std::seed_seq update_seq{cfg.seed, std::uint64_t{2}};
  std::mt19937_64 init_rng(init_seq), update_rng(update_seq);

  TrainResult result;
  result.config_hash = config_hash(cfg);
  result.policy = ActorCritic::create(probe.state_dim(), probe.action_dim(),
                                      ppo.hidden, ppo.init_log_std,
                                      ppo.normalize_observations, init_rng);
  PpoOptimizer optimizer(result.policy, ppo);
  const int workers = options.workers > 0 ? options.workers : default_worker_count();

  const std::filesystem::path out_dir(options.output_dir);
  std::ofstream csv;
  const nlohmann::json experiment = to_json(cfg);
  if (!options.output_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ofstream conf(out_dir / "config.json");
    nlohmann::json saved = experiment;
    saved["config_hash"] = result.config_hash;
    conf << saved.dump(2) << '\n';
    csv.open(out_dir / "training_log.csv");
    if (!csv) throw Error(ErrorKind::kIo, "cannot write training log in " + options.output_dir);
    csv << training_log_header() << '\n';
  }
  auto write_checkpoint = [&](int iteration, const std::string& name) {
    if (options.output_dir.empty()) return;
    save_checkpoint({result.policy, iteration, result.config_hash, experiment},
                    (out_dir / name).string());
  };

  std::vector<Segment> segments(slots.size());
  const int h = ppo.horizon;
  const int n = ppo.env_count * h;
  for (int it = 1; it <= ppo.iterations; ++it) {
    run_parallel(ppo.env_count, workers, [&](int e) {
      collect(slots[static_cast<std::size_t>(e)], result.policy, h,
              segments[static_cast<std::size_t>(e)]);
    });

    IterationLog log;
    log.iteration = it;
    log.env_steps = n;
    log.mean_reward = zero_breakdown();
    PpoBatch batch;
    batch.states.resize(probe.state_dim(), n);
    batch.actions.resize(probe.action_dim(), n);
    batch.old_log_probs.resize(n);
    batch.advantages.resize(n);
    batch.returns.resize(n);
    int scored = 0;
    long finished_total = 0;
    for (int e = 0; e < ppo.env_count; ++e) {
      const Segment& seg = segments[static_cast<std::size_t>(e)];
      const GaeResult gae = compute_gae(seg.rewards, seg.values, seg.next_values,
                                        seg.dones, ppo.gamma, ppo.gae_lambda);
      batch.states.middleCols(e * h, h) = seg.states;
      batch.actions.middleCols(e * h, h) = seg.actions;
      for (int k = 0; k < h; ++k) {
        batch.old_log_probs[e * h + k] = seg.log_probs[static_cast<std::size_t>(k)];
        const auto reason = seg.reasons[static_cast<std::size_t>(k)];
        if (seg.dones[static_cast<std::size_t>(k)]) {
          ++log.terminations[static_cast<std::size_t>(reason)];
        }
        if (reason != TerminationReason::kDiverged) {
          add(log.mean_reward, seg.breakdowns[static_cast<std::size_t>(k)], 1.0);
          ++scored;
        }
      }
      batch.advantages.segment(e * h, h) = gae.advantages;
      batch.returns.segment(e * h, h) = gae.returns;
      for (int len : seg.finished_lengths) {
        ++log.episodes;
        finished_total += len;
        log.max_episode_length = std::max(log.max_episode_length, len);
      }
      if (seg.diverged) ++log.diverged_envs;
    }
    if (2 * log.diverged_envs > ppo.env_count) {
      throw Error(ErrorKind::kTrainingAborted,
                  std::to_string(log.diverged_envs) + " of " +
                      std::to_string(ppo.env_count) +
                      " environments diverged in iteration " + std::to_string(it),
                  it);
    }
    if (scored > 0) add(log.mean_reward, log.mean_reward, 1.0 / scored - 1.0);
    if (log.episodes > 0) {
      log.mean_episode_length = static_cast<double>(finished_total) / log.episodes;
    } else {
      for (const auto& slot : slots) {
        log.max_episode_length = std::max(log.max_episode_length, slot.length);
        log.mean_episode_length += slot.length;
      }
      log.mean_episode_length /= static_cast<double>(slots.size());
    }

    log.loss = ppo_update(result.policy, optimizer, batch, ppo, update_rng);
    result.policy.normalizer.update(batch.states);
    log.mean_std = result.policy.log_std.array().exp().mean();

    if (csv.is_open()) csv << to_csv_row(log) << '\n' << std::flush;
    if (options.on_iteration) options.on_iteration(log);
    result.log.push_back(log);
    if (ppo.checkpoint_every > 0 && it % ppo.checkpoint_every == 0) {
      char name[64];
      std::snprintf(name, sizeof name, "checkpoint_%06d.json", it);
      write_checkpoint(it, name);
    }
  }
  write_checkpoint(ppo.iterations, "checkpoint_final.json");
  return result;
}

}  // namespace hoi
