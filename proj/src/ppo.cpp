#include "hoi/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hoi/error.hpp"

namespace hoi {

void PpoConfig::validate() const {
  auto fail = [](const std::string& msg) {
    throw Error(ErrorKind::kInvalidArgument, "ppo: " + msg);
  };
  if (!(gamma >= 0.0 && gamma < 1.0)) fail("gamma must be in [0, 1)");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) fail("gae_lambda must be in [0, 1]");
  if (!(clip > 0.0)) fail("clip must be > 0");
  if (!(learning_rate > 0.0)) fail("learning_rate must be > 0");
  if (epochs < 1 || minibatch < 1) fail("epochs and minibatch must be >= 1");
  if (env_count < 1) fail("env_count must be >= 1");
  if (horizon < 1) fail("horizon must be >= 1");
  if (iterations < 0) fail("iterations must be >= 0");
  if (value_coef < 0.0 || entropy_coef < 0.0) fail("loss coefficients must be >= 0");
  if (!std::isfinite(init_log_std)) fail("init_log_std must be finite");
  if (checkpoint_every < 0) fail("checkpoint_every must be >= 0");
  for (int h : hidden) {
    if (h < 1) fail("hidden sizes must be >= 1");
  }
}

nlohmann::json to_json(const PpoConfig& c) {
  return {{"gamma", c.gamma},
          {"gae_lambda", c.gae_lambda},
          {"clip", c.clip},
          {"learning_rate", c.learning_rate},
          {"epochs", c.epochs},
          {"minibatch", c.minibatch},
          {"env_count", c.env_count},
          {"horizon", c.horizon},
          {"iterations", c.iterations},
          {"normalize_advantages", c.normalize_advantages},
          {"value_coef", c.value_coef},
          {"entropy_coef", c.entropy_coef},
          {"hidden", c.hidden},
          {"init_log_std", c.init_log_std},
          {"learn_log_std", c.learn_log_std},
          {"max_grad_norm", c.max_grad_norm},
          {"normalize_observations", c.normalize_observations},
          {"checkpoint_every", c.checkpoint_every}};
}

PpoConfig ppo_config_from_json(const nlohmann::json& j) {
  PpoConfig c;
  if (!j.is_object()) throw Error(ErrorKind::kSchema, "ppo block must be an object");
  const nlohmann::json defaults = to_json(c);
  for (const auto& [key, _] : j.items()) {
    if (!defaults.contains(key)) {
      throw Error(ErrorKind::kSchema, "unknown key '" + key + "' in ppo block");
    }
  }
  try {
    c.gamma = j.value("gamma", c.gamma);
    c.gae_lambda = j.value("gae_lambda", c.gae_lambda);
    c.clip = j.value("clip", c.clip);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.epochs = j.value("epochs", c.epochs);
    c.minibatch = j.value("minibatch", c.minibatch);
    c.env_count = j.value("env_count", c.env_count);
    c.horizon = j.value("horizon", c.horizon);
    c.iterations = j.value("iterations", c.iterations);
    c.normalize_advantages = j.value("normalize_advantages", c.normalize_advantages);
    c.value_coef = j.value("value_coef", c.value_coef);
    c.entropy_coef = j.value("entropy_coef", c.entropy_coef);
    c.hidden = j.value("hidden", c.hidden);
    c.init_log_std = j.value("init_log_std", c.init_log_std);
    c.learn_log_std = j.value("learn_log_std", c.learn_log_std);
    c.max_grad_norm = j.value("max_grad_norm", c.max_grad_norm);
    c.normalize_observations =
        j.value("normalize_observations", c.normalize_observations);
    c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kSchema, std::string("ppo block: ") + e.what());
  }
  c.validate();
  return c;
}

GaeResult compute_gae(std::span<const double> rewards,
                      std::span<const double> values,
                      std::span<const double> next_values,
                      std::span<const std::uint8_t> dones, double gamma,
                      double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || next_values.size() != n || dones.size() != n) {
    throw Error(ErrorKind::kDimensionMismatch,
                "gae inputs must all have " + std::to_string(n) + " entries");
  }
  GaeResult out;
  out.advantages = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  double next_adv = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    const double delta = rewards[k] + gamma * next_values[k] - values[k];
    const double carry = dones[k] ? 0.0 : next_adv;
    next_adv = delta + gamma * lambda * carry;
    out.advantages[static_cast<Eigen::Index>(k)] = next_adv;
  }
  out.returns = out.advantages +
                Eigen::Map<const Eigen::VectorXd>(values.data(),
                                                  static_cast<Eigen::Index>(n));
  return out;
}

double PpoGradient::norm() const {
  return std::sqrt(actor.squaredNorm() + critic.squaredNorm() +
                   log_std.squaredNorm());
}

void PpoGradient::scale(double s) {
  actor *= s;
  critic *= s;
  log_std *= s;
}

LossStats ppo_loss(const ActorCritic& policy, const PpoBatch& batch,
                   const PpoConfig& cfg, PpoGradient* grad) {
  const int n = batch.size();
  if (n == 0) throw Error(ErrorKind::kInvalidArgument, "empty ppo batch");
  const int d = policy.action_dim();
  if (batch.actions.rows() != d || batch.actions.cols() != n ||
      batch.old_log_probs.size() != n || batch.advantages.size() != n ||
      batch.returns.size() != n) {
    throw Error(ErrorKind::kDimensionMismatch, "ppo batch shapes disagree");
  }
  const Eigen::MatrixXd x = policy.normalizer.apply(batch.states);
  Mlp::Cache actor_cache, critic_cache;
  const Eigen::MatrixXd mu = policy.actor.forward(x, grad ? &actor_cache : nullptr);
  const Eigen::MatrixXd v = policy.critic.forward(x, grad ? &critic_cache : nullptr);

  const Eigen::ArrayXd inv_std = (-policy.log_std.array()).exp();
  const Eigen::ArrayXXd z =
      (batch.actions - mu).array().colwise() * inv_std;  // d x n
  const double log_norm = policy.log_std.sum() + 0.5 * d * std::log(2.0 * M_PI);
  const Eigen::ArrayXd logp = -0.5 * z.square().colwise().sum().transpose() - log_norm;

  LossStats s;
  Eigen::VectorXd d_logp(n);
  for (int i = 0; i < n; ++i) {
    const double log_ratio = logp[i] - batch.old_log_probs[i];
    const double ratio = std::exp(log_ratio);
    const double a = batch.advantages[i];
    const double unclipped = ratio * a;
    const double clipped = std::clamp(ratio, 1.0 - cfg.clip, 1.0 + cfg.clip) * a;
    s.policy -= std::min(unclipped, clipped);
    d_logp[i] = unclipped <= clipped ? -a * ratio : 0.0;
    s.approx_kl += (ratio - 1.0) - log_ratio;
    if (std::abs(ratio - 1.0) > cfg.clip) s.clip_fraction += 1.0;
  }
  const Eigen::ArrayXd v_err = v.row(0).transpose() - batch.returns;
  s.policy /= n;
  s.value = v_err.square().mean();
  s.entropy = policy.log_std.sum() + 0.5 * d * (1.0 + std::log(2.0 * M_PI));
  s.approx_kl /= n;
  s.clip_fraction /= n;
  s.total = s.policy + cfg.value_coef * s.value - cfg.entropy_coef * s.entropy;
  if (!std::isfinite(s.total)) {
    throw Error(ErrorKind::kNonFiniteLoss,
                "loss is not finite (policy " + std::to_string(s.policy) +
                    ", value " + std::to_string(s.value) + ")");
  }
  if (!grad) return s;

  d_logp /= n;
  // d logp / d mu = z / sigma ; d logp / d log_std = z^2 - 1
  const Eigen::MatrixXd d_mu =
      ((z.colwise() * inv_std).rowwise() * d_logp.transpose().array()).matrix();
  grad->actor = Eigen::VectorXd::Zero(policy.actor.parameter_count());
  grad->critic = Eigen::VectorXd::Zero(policy.critic.parameter_count());
  policy.actor.backward(actor_cache, d_mu, grad->actor);
  grad->log_std =
      ((z.square() - 1.0).matrix() * d_logp) -
      Eigen::VectorXd::Constant(d, cfg.entropy_coef);
  const Eigen::MatrixXd d_v =
      (cfg.value_coef * 2.0 / n) * v_err.matrix().transpose();
  policy.critic.backward(critic_cache, d_v, grad->critic);
  return s;
}

PpoOptimizer::PpoOptimizer(const ActorCritic& policy, const PpoConfig& cfg)
    : actor_(policy.actor.parameter_count(), cfg.learning_rate),
      critic_(policy.critic.parameter_count(), cfg.learning_rate),
      log_std_(static_cast<int>(policy.log_std.size()), cfg.learning_rate),
      learn_log_std_(cfg.learn_log_std) {}

void PpoOptimizer::step(ActorCritic& policy, const PpoGradient& grad) {
  actor_.step(policy.actor.params(), grad.actor);
  critic_.step(policy.critic.params(), grad.critic);
  if (learn_log_std_) log_std_.step(policy.log_std, grad.log_std);
}

LossStats ppo_update(ActorCritic& policy, PpoOptimizer& optimizer,
                     PpoBatch batch, const PpoConfig& cfg,
                     std::mt19937_64& rng) {
  const int n = batch.size();
  if (n == 0) throw Error(ErrorKind::kInvalidArgument, "empty ppo batch");
  if (cfg.normalize_advantages && n > 1) {
    const double mean = batch.advantages.mean();
    const double sd = std::sqrt(
        (batch.advantages.array() - mean).square().sum() / (n - 1));
    batch.advantages = (batch.advantages.array() - mean) / (sd + 1e-8);
  }
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  LossStats sum;
  int steps = 0;
  PpoBatch mb;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (int start = 0; start < n; start += cfg.minibatch) {
      const int count = std::min(cfg.minibatch, n - start);
      mb.states.resize(batch.states.rows(), count);
      mb.actions.resize(batch.actions.rows(), count);
      mb.old_log_probs.resize(count);
      mb.advantages.resize(count);
      mb.returns.resize(count);
      for (int k = 0; k < count; ++k) {
        const int i = order[static_cast<std::size_t>(start + k)];
        mb.states.col(k) = batch.states.col(i);
        mb.actions.col(k) = batch.actions.col(i);
        mb.old_log_probs[k] = batch.old_log_probs[i];
        mb.advantages[k] = batch.advantages[i];
        mb.returns[k] = batch.returns[i];
      }
      PpoGradient g;
      LossStats s = ppo_loss(policy, mb, cfg, &g);
      s.grad_norm = g.norm();
      if (!std::isfinite(s.grad_norm)) {
        throw Error(ErrorKind::kNonFiniteLoss, "gradient is not finite");
      }
      if (cfg.max_grad_norm > 0.0 && s.grad_norm > cfg.max_grad_norm) {
        g.scale(cfg.max_grad_norm / s.grad_norm);
      }
      optimizer.step(policy, g);
      sum.total += s.total;
      sum.policy += s.policy;
      sum.value += s.value;
      sum.entropy += s.entropy;
      sum.approx_kl += s.approx_kl;
      sum.clip_fraction += s.clip_fraction;
      sum.grad_norm += s.grad_norm;
      ++steps;
    }
  }
  const double inv = 1.0 / steps;
  sum.total *= inv;
  sum.policy *= inv;
  sum.value *= inv;
  sum.entropy *= inv;
  sum.approx_kl *= inv;
  sum.clip_fraction *= inv;
  sum.grad_norm *= inv;
  return sum;
}

}  // namespace hoi
