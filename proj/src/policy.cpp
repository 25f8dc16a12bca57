#include "hoi/policy.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "hoi/error.hpp"

namespace hoi {

namespace {

constexpr int kCheckpointVersion = 1;

std::vector<double> to_vec(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd from_vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(),
                                           static_cast<Eigen::Index>(v.size()));
}

void require_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) {
    throw Error(ErrorKind::kNonFinite, std::string(what) + " is not finite");
  }
}

}  // namespace

ObsNormalizer ObsNormalizer::identity(int dim, bool enabled) {
  ObsNormalizer n;
  n.mean = Eigen::VectorXd::Zero(dim);
  n.var = Eigen::VectorXd::Ones(dim);
  n.enabled = enabled;
  return n;
}

void ObsNormalizer::update(const Eigen::MatrixXd& states) {
  if (!enabled || states.cols() == 0) return;
  if (states.rows() != mean.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "normaliser dimension mismatch");
  }
  const double n = static_cast<double>(states.cols());
  const Eigen::VectorXd batch_mean = states.rowwise().mean();
  const Eigen::VectorXd batch_var =
      (states.colwise() - batch_mean).array().square().rowwise().mean();
  if (count == 0.0) {
    mean = batch_mean;
    var = batch_var;
    count = n;
    return;
  }
  const double total = count + n;
  const Eigen::VectorXd delta = batch_mean - mean;
  mean += delta * (n / total);
  var = (var * count + batch_var * n +
         delta.cwiseAbs2() * (count * n / total)) /
        total;
  count = total;
}

Eigen::MatrixXd ObsNormalizer::apply(const Eigen::MatrixXd& states) const {
  if (!enabled) return states;
  const Eigen::ArrayXd inv_std = (var.array() + 1e-8).rsqrt();
  Eigen::MatrixXd out =
      ((states.colwise() - mean).array().colwise() * inv_std).matrix();
  return out.cwiseMax(-clip).cwiseMin(clip);
}

nlohmann::json to_json(const ObsNormalizer& n) {
  return {{"mean", to_vec(n.mean)}, {"var", to_vec(n.var)},
          {"count", n.count},       {"clip", n.clip},
          {"enabled", n.enabled}};
}

ObsNormalizer normalizer_from_json(const nlohmann::json& j) {
  ObsNormalizer n;
  n.mean = from_vec(j.at("mean").get<std::vector<double>>());
  n.var = from_vec(j.at("var").get<std::vector<double>>());
  n.count = j.at("count").get<double>();
  n.clip = j.at("clip").get<double>();
  n.enabled = j.at("enabled").get<bool>();
  if (n.mean.size() != n.var.size()) {
    throw Error(ErrorKind::kSchema, "normaliser mean and var differ in size");
  }
  return n;
}

double gaussian_log_prob(const Eigen::VectorXd& mean,
                         const Eigen::VectorXd& log_std,
                         const Eigen::VectorXd& x) {
  if (mean.size() != log_std.size() || x.size() != mean.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "log-prob dimension mismatch");
  }
  const Eigen::ArrayXd z = (x - mean).array() * (-log_std.array()).exp();
  return (-0.5 * z.square() - log_std.array() -
          0.5 * std::log(2.0 * M_PI))
      .sum();
}

ActorCritic ActorCritic::create(int state_dim, int action_dim,
                                const std::vector<int>& hidden,
                                double init_log_std, bool normalize_observations,
                                std::mt19937_64& rng) {
  std::vector<int> sizes{state_dim};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  ActorCritic p;
  sizes.push_back(action_dim);
  p.actor = Mlp(sizes);
  sizes.back() = 1;
  p.critic = Mlp(sizes);
  p.actor.init_orthogonal(rng, std::sqrt(2.0), 0.01);
  p.critic.init_orthogonal(rng, std::sqrt(2.0), 1.0);
  p.log_std = Eigen::VectorXd::Constant(action_dim, init_log_std);
  p.normalizer = ObsNormalizer::identity(state_dim, normalize_observations);
  return p;
}

Eigen::VectorXd ActorCritic::mean(const Eigen::VectorXd& state) const {
  require_finite(state, "policy input");
  Eigen::VectorXd out = actor.forward(normalizer.apply(state));
  require_finite(out, "policy output");
  return out;
}

double ActorCritic::value(const Eigen::VectorXd& state) const {
  require_finite(state, "value input");
  const double v = critic.forward(normalizer.apply(state))(0, 0);
  if (!std::isfinite(v)) throw Error(ErrorKind::kNonFinite, "value is not finite");
  return v;
}

ActionSample ActorCritic::sample_action(const Eigen::VectorXd& state,
                                        std::mt19937_64& rng) const {
  ActionSample s;
  s.mean = mean(state);
  std::normal_distribution<double> normal(0.0, 1.0);
  s.action.resize(s.mean.size());
  for (Eigen::Index i = 0; i < s.mean.size(); ++i) {
    s.action[i] = s.mean[i] + std::exp(log_std[i]) * normal(rng);
  }
  s.log_prob = gaussian_log_prob(s.mean, log_std, s.action);
  return s;
}

ActionSample ActorCritic::deterministic_action(const Eigen::VectorXd& state) const {
  ActionSample s;
  s.mean = mean(state);
  s.action = s.mean;
  s.log_prob = gaussian_log_prob(s.mean, log_std, s.action);
  return s;
}

nlohmann::json to_json(const ActorCritic& p) {
  return {{"actor", to_json(p.actor)},
          {"critic", to_json(p.critic)},
          {"log_std", to_vec(p.log_std)},
          {"normalizer", to_json(p.normalizer)}};
}

ActorCritic actor_critic_from_json(const nlohmann::json& j) {
  ActorCritic p;
  p.actor = mlp_from_json(j.at("actor"));
  p.critic = mlp_from_json(j.at("critic"));
  p.log_std = from_vec(j.at("log_std").get<std::vector<double>>());
  p.normalizer = normalizer_from_json(j.at("normalizer"));
  if (p.log_std.size() != p.actor.output_dim() ||
      p.critic.input_dim() != p.actor.input_dim() ||
      p.critic.output_dim() != 1 ||
      p.normalizer.mean.size() != p.actor.input_dim()) {
    throw Error(ErrorKind::kSchema, "policy networks have inconsistent shapes");
  }
  if (!p.log_std.allFinite()) {
    throw Error(ErrorKind::kNonFinite, "log-std is not finite");
  }
  return p;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  nlohmann::json j{{"version", kCheckpointVersion},
                   {"iteration", ckpt.iteration},
                   {"config_hash", ckpt.config_hash},
                   {"experiment", ckpt.experiment},
                   {"policy", to_json(ckpt.policy)}};
  const std::filesystem::path target(path);
  if (target.has_parent_path()) {
    std::filesystem::create_directories(target.parent_path());
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw Error(ErrorKind::kIo, "cannot write " + tmp);
    out << j.dump();
    if (!out) throw Error(ErrorKind::kIo, "failed writing " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open checkpoint " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kSchema, path + ": " + e.what());
  }
  try {
    if (j.at("version").get<int>() != kCheckpointVersion) {
      throw Error(ErrorKind::kSchema, "unsupported checkpoint version");
    }
    Checkpoint c;
    c.iteration = j.at("iteration").get<int>();
    c.config_hash = j.at("config_hash").get<std::string>();
    c.experiment = j.value("experiment", nlohmann::json::object());
    c.policy = actor_critic_from_json(j.at("policy"));
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kSchema, path + ": " + e.what());
  }
}

}  // namespace hoi
