#include <cmath>
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "../oracles/ppo_oracle.hpp"
#include "hoi/error.hpp"
#include "hoi/mlp.hpp"
#include "hoi/policy.hpp"
#include "hoi/ppo.hpp"

using namespace hoi;

namespace {

// Discounted sum written out term by term.
std::vector<double> brute_force_advantages(const std::vector<double>& r,
                                           const std::vector<double>& v,
                                           const std::vector<double>& next_v,
                                           const std::vector<std::uint8_t>& done,
                                           double gamma, double lambda) {
  const std::size_t n = r.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    double weight = 1.0;
    for (std::size_t k = t; k < n; ++k) {
      const double delta = r[k] + gamma * next_v[k] - v[k];
      out[t] += weight * delta;
      if (done[k]) break;
      weight *= gamma * lambda;
    }
  }
  return out;
}

}  // namespace

TEST(Gae, MyopicLimit) {
  const std::vector<double> r{1, 2, 3}, v{0.5, 0.1, -1}, nv{0.1, -1, 4};
  const std::vector<std::uint8_t> d{0, 0, 0};
  const auto g = compute_gae(r, v, nv, d, 0.0, 0.95);
  for (int t = 0; t < 3; ++t) EXPECT_DOUBLE_EQ(g.advantages[t], r[t] - v[t]);
}

TEST(Gae, SingleStepEpisode) {
  const std::vector<double> r{1}, v{0}, nv{0};
  const std::vector<std::uint8_t> d{1};
  const auto g = compute_gae(r, v, nv, d, 0.99, 0.95);
  EXPECT_EQ(g.advantages[0], 1.0);
  EXPECT_EQ(g.returns[0], 1.0);
}

TEST(Gae, MatchesBruteForce) {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> n(0.0, 1.0);
  std::bernoulli_distribution b(0.15);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> r(20), v(20), nv(20);
    std::vector<std::uint8_t> d(20);
    for (int t = 0; t < 20; ++t) {
      r[t] = n(rng);
      v[t] = n(rng);
      d[t] = b(rng);
    }
    for (int t = 0; t < 20; ++t) nv[t] = d[t] ? (b(rng) ? 0.0 : n(rng)) : (t + 1 < 20 ? v[t + 1] : n(rng));
    const auto g = compute_gae(r, v, nv, d, 0.99, 0.95);
    const auto want = brute_force_advantages(r, v, nv, d, 0.99, 0.95);
    for (int t = 0; t < 20; ++t) {
      EXPECT_NEAR(g.advantages[t], want[t], 1e-10);
      EXPECT_NEAR(g.returns[t], want[t] + v[t], 1e-10);
    }
  }
}

TEST(Gae, LengthMismatchRejected) {
  const std::vector<double> r{1, 2}, v{0};
  const std::vector<std::uint8_t> d{0, 0};
  EXPECT_THROW(compute_gae(r, v, r, d, 0.99, 0.95), Error);
}

TEST(Policy, LogProbMatchesDensity) {
  std::mt19937_64 rng(32);
  auto policy = ActorCritic::create(5, 3, {8}, std::log(0.3), false, rng);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd s(5);
    for (int i = 0; i < 5; ++i) s[i] = n(rng);
    const auto a = policy.sample_action(s, rng);
    double density = 1.0;
    for (int i = 0; i < 3; ++i) {
      const double sigma = std::exp(policy.log_std[i]);
      const double z = (a.action[i] - a.mean[i]) / sigma;
      density *= std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * M_PI));
    }
    EXPECT_NEAR(a.log_prob, std::log(density), 1e-9);
    EXPECT_NEAR(gaussian_log_prob(a.mean, policy.log_std, a.action), a.log_prob, 1e-9);
  }
}

TEST(Policy, TinySigmaReturnsMean) {
  std::mt19937_64 rng(33);
  auto policy = ActorCritic::create(4, 2, {8}, -40.0, false, rng);
  const Eigen::VectorXd s = Eigen::VectorXd::LinSpaced(4, -1, 1);
  const auto a = policy.sample_action(s, rng);
  EXPECT_LT((a.action - policy.mean(s)).norm(), 1e-15);
  EXPECT_EQ(policy.deterministic_action(s).action, policy.mean(s));
}

TEST(Policy, SeededSamplingIsReproducible) {
  std::mt19937_64 init1(34), init2(34);
  const auto p1 = ActorCritic::create(4, 2, {8}, std::log(0.3), true, init1);
  const auto p2 = ActorCritic::create(4, 2, {8}, std::log(0.3), true, init2);
  std::mt19937_64 r1(7), r2(7);
  const Eigen::VectorXd s = Eigen::VectorXd::Ones(4);
  for (int i = 0; i < 20; ++i) {
    EXPECT_EQ(p1.sample_action(s, r1).action, p2.sample_action(s, r2).action);
  }
}

TEST(Policy, OrthogonalInitGains) {
  std::mt19937_64 rng(35);
  const auto p = ActorCritic::create(6, 3, {16, 8}, std::log(0.05), false, rng);
  // First layer: 16 x 6 weights, orthonormal columns scaled by sqrt(2).
  Eigen::Map<const Eigen::MatrixXd> w0(p.actor.params().data(), 16, 6);
  const Eigen::MatrixXd gram = w0.transpose() * w0;
  EXPECT_LT((gram - 2.0 * Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_NEAR(p.log_std[0], std::log(0.05), 1e-15);
  const Eigen::VectorXd s = Eigen::VectorXd::Ones(6);
  EXPECT_LT(p.mean(s).cwiseAbs().maxCoeff(), 1.0);
}

TEST(Normalizer, MatchesBatchMoments) {
  std::mt19937_64 rng(36);
  std::normal_distribution<double> n(3.0, 2.0);
  Eigen::MatrixXd all(2, 300);
  for (int c = 0; c < 300; ++c) all.col(c) << n(rng), -n(rng);
  auto norm = ObsNormalizer::identity(2);
  norm.update(all.leftCols(100));
  norm.update(all.middleCols(100, 150));
  norm.update(all.rightCols(50));
  const Eigen::VectorXd mean = all.rowwise().mean();
  const Eigen::VectorXd var = (all.colwise() - mean).array().square().rowwise().mean();
  EXPECT_LT((norm.mean - mean).norm(), 1e-10);
  EXPECT_LT((norm.var - var).norm(), 1e-9);
  Eigen::MatrixXd far(2, 1);
  far << 1e6, -1e6;
  EXPECT_EQ(norm.apply(far)(0, 0), 5.0);
  EXPECT_EQ(norm.apply(far)(1, 0), -5.0);
}

TEST(Ppo, FiniteDifferenceGradient) {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 20; ++trial) {
    auto p = oracle::tiny_problem(rng);
    const auto check = oracle::finite_difference_check(p);
    EXPECT_LE(check.parameters, 64);
    EXPECT_LT(check.relative_error, 1e-4) << "batch " << trial;
  }
}

TEST(Ppo, TwoParameterGradient) {
  // Linear actor with no hidden layer: one weight and one bias.
  std::mt19937_64 rng(38);
  ActorCritic p = ActorCritic::create(1, 1, {}, std::log(0.4), false, rng);
  ASSERT_EQ(p.actor.parameter_count(), 2);
  p.actor.params() << 0.7, -0.2;
  PpoConfig cfg;
  cfg.value_coef = 0.0;
  PpoBatch b;
  b.states = Eigen::MatrixXd(1, 4);
  b.states << -1, 0.5, 2, 0.1;
  b.actions = Eigen::MatrixXd(1, 4);
  b.actions << -0.5, 0.6, 1.0, 0.3;
  b.old_log_probs = Eigen::VectorXd(4);
  b.old_log_probs << -0.2, -0.5, -0.4, -0.1;
  b.advantages = Eigen::VectorXd(4);
  b.advantages << 1.0, -0.5, 0.3, 2.0;
  b.returns = Eigen::VectorXd::Zero(4);
  PpoGradient g;
  ppo_loss(p, b, cfg, &g);
  const double h = 1e-5;
  for (int i = 0; i < 2; ++i) {
    ActorCritic up = p, down = p;
    up.actor.params()[i] += h;
    down.actor.params()[i] -= h;
    const double fd = (ppo_loss(up, b, cfg).total - ppo_loss(down, b, cfg).total) / (2 * h);
    EXPECT_NEAR(g.actor[i], fd, 1e-4 * std::max(1.0, std::abs(fd)));
  }
}

TEST(Ppo, IdentityRatioSurrogate) {
  std::mt19937_64 rng(39);
  auto p = oracle::tiny_problem(rng);
  for (int c = 0; c < p.batch.size(); ++c) {
    p.batch.old_log_probs[c] = gaussian_log_prob(p.policy.mean(p.batch.states.col(c)),
                                                 p.policy.log_std, p.batch.actions.col(c));
    p.batch.advantages[c] = std::abs(p.batch.advantages[c]);
  }
  const auto stats = ppo_loss(p.policy, p.batch, p.cfg);
  EXPECT_NEAR(stats.policy, -p.batch.advantages.mean(), 1e-12);
  EXPECT_NEAR(stats.approx_kl, 0.0, 1e-12);
  EXPECT_EQ(stats.clip_fraction, 0.0);
}

TEST(Ppo, ZeroAdvantagesOnlyMoveCritic) {
  std::mt19937_64 rng(40);
  auto p = oracle::tiny_problem(rng);
  p.batch.advantages.setZero();
  p.cfg.entropy_coef = 0.0;
  p.cfg.normalize_advantages = false;
  PpoGradient g;
  const auto stats = ppo_loss(p.policy, p.batch, p.cfg, &g);
  EXPECT_EQ(stats.policy, 0.0);
  EXPECT_EQ(g.actor.norm(), 0.0);
  EXPECT_GT(g.critic.norm(), 0.0);
  const Eigen::VectorXd actor_before = p.policy.actor.params();
  PpoOptimizer opt(p.policy, p.cfg);
  ppo_update(p.policy, opt, p.batch, p.cfg, rng);
  EXPECT_EQ(p.policy.actor.params(), actor_before);
}

TEST(Ppo, UpdateImprovesSurrogate) {
  std::mt19937_64 rng(41);
  auto p = oracle::tiny_problem(rng);
  p.cfg.learning_rate = 1e-2;
  p.cfg.minibatch = 16;
  p.cfg.learn_log_std = true;
  const double before = ppo_loss(p.policy, p.batch, p.cfg).total;
  PpoOptimizer opt(p.policy, p.cfg);
  auto cfg = p.cfg;
  cfg.normalize_advantages = false;
  for (int i = 0; i < 5; ++i) ppo_update(p.policy, opt, p.batch, cfg, rng);
  EXPECT_LT(ppo_loss(p.policy, p.batch, p.cfg).total, before);
}

TEST(Ppo, FixedLogStdStaysPut) {
  std::mt19937_64 rng(42);
  auto p = oracle::tiny_problem(rng);
  p.cfg.learn_log_std = false;
  const Eigen::VectorXd before = p.policy.log_std;
  PpoOptimizer opt(p.policy, p.cfg);
  ppo_update(p.policy, opt, p.batch, p.cfg, rng);
  EXPECT_EQ(p.policy.log_std, before);
}

TEST(PpoConfig, ValidationAndJson) {
  PpoConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_TRUE(ppo_config_from_json(to_json(c)) == c);
  EXPECT_THROW(ppo_config_from_json({{"gama", 0.9}}), Error);
  c.clip = 0.0;
  EXPECT_THROW(c.validate(), Error);
  c = PpoConfig{};
  c.gamma = 1.5;
  EXPECT_THROW(c.validate(), Error);
}

TEST(Checkpoint, RoundTrip) {
  std::mt19937_64 rng(43);
  Checkpoint ck;
  ck.policy = ActorCritic::create(5, 2, {8, 4}, std::log(0.05), true, rng);
  Eigen::MatrixXd s = Eigen::MatrixXd::Random(5, 10);
  ck.policy.normalizer.update(s);
  ck.iteration = 17;
  ck.config_hash = "0123456789abcdef";
  ck.experiment = {{"seed", 3}};
  const auto path = (std::filesystem::temp_directory_path() / "hoi_ckpt_test.json").string();
  save_checkpoint(ck, path);
  const auto back = load_checkpoint(path);
  std::filesystem::remove(path);
  EXPECT_EQ(back.iteration, 17);
  EXPECT_EQ(back.config_hash, ck.config_hash);
  EXPECT_EQ(back.policy.actor.params(), ck.policy.actor.params());
  EXPECT_EQ(back.policy.critic.params(), ck.policy.critic.params());
  EXPECT_EQ(back.policy.log_std, ck.policy.log_std);
  EXPECT_EQ(back.policy.normalizer.mean, ck.policy.normalizer.mean);
  const Eigen::VectorXd x = s.col(3);
  EXPECT_EQ(back.policy.mean(x), ck.policy.mean(x));
  EXPECT_THROW(load_checkpoint("/nonexistent/ck.json"), Error);
}
