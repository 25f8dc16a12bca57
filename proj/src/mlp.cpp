#include "hoi/mlp.hpp"

#include <cmath>

#include "hoi/error.hpp"

namespace hoi {

Mlp::Mlp(std::vector<int> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) {
    throw Error(ErrorKind::kInvalidArgument, "network needs input and output sizes");
  }
  int total = 0;
  for (int l = 0; l < layers(); ++l) {
    const int in = sizes_[static_cast<std::size_t>(l)];
    const int out = sizes_[static_cast<std::size_t>(l) + 1];
    if (in < 1 || out < 1) {
      throw Error(ErrorKind::kInvalidArgument, "layer sizes must be >= 1", l);
    }
    offsets_.push_back(total);
    total += out * in + out;
  }
  params_ = Eigen::VectorXd::Zero(total);
}

void Mlp::init_orthogonal(std::mt19937_64& rng, double hidden_gain,
                          double head_gain) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int l = 0; l < layers(); ++l) {
    const int in = sizes_[static_cast<std::size_t>(l)];
    const int out = sizes_[static_cast<std::size_t>(l) + 1];
    const int big = std::max(in, out), small = std::min(in, out);
    Eigen::MatrixXd a(big, small);
    for (int c = 0; c < small; ++c) {
      for (int r = 0; r < big; ++r) a(r, c) = normal(rng);
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(big, small);
    const Eigen::MatrixXd r = qr.matrixQR().topRows(small);
    for (int c = 0; c < small; ++c) {
      if (r(c, c) < 0.0) q.col(c) *= -1.0;
    }
    const double gain = l + 1 == layers() ? head_gain : hidden_gain;
    MapM w(params_.data() + offsets_[static_cast<std::size_t>(l)], out, in);
    w = gain * (out >= in ? q : Eigen::MatrixXd(q.transpose()));
    params_.segment(offsets_[static_cast<std::size_t>(l)] + out * in, out)
        .setZero();
  }
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x, Cache* cache) const {
  if (x.rows() != input_dim()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "network expects " + std::to_string(input_dim()) +
                    " inputs, got " + std::to_string(x.rows()));
  }
  if (cache) {
    cache->activations.clear();
    cache->activations.push_back(x);
  }
  Eigen::MatrixXd h = x;
  for (int l = 0; l < layers(); ++l) {
    const int in = sizes_[static_cast<std::size_t>(l)];
    const int out = sizes_[static_cast<std::size_t>(l) + 1];
    const int off = offsets_[static_cast<std::size_t>(l)];
    CMapM w(params_.data() + off, out, in);
    CMapV b(params_.data() + off + out * in, out);
    Eigen::MatrixXd next = w * h;
    next.colwise() += b;
    if (l + 1 < layers()) next = next.cwiseMax(0.0);
    h = std::move(next);
    if (cache) cache->activations.push_back(h);
  }
  return h;
}

void Mlp::backward(const Cache& cache, const Eigen::MatrixXd& d_out,
                   Eigen::Ref<Eigen::VectorXd> grad) const {
  if (grad.size() != params_.size() ||
      static_cast<int>(cache.activations.size()) != layers() + 1) {
    throw Error(ErrorKind::kDimensionMismatch, "backward called with a stale cache");
  }
  Eigen::MatrixXd delta = d_out;
  for (int l = layers() - 1; l >= 0; --l) {
    const int in = sizes_[static_cast<std::size_t>(l)];
    const int out = sizes_[static_cast<std::size_t>(l) + 1];
    const int off = offsets_[static_cast<std::size_t>(l)];
    if (l + 1 < layers()) {
      delta = delta.cwiseProduct(
          (cache.activations[static_cast<std::size_t>(l) + 1].array() > 0.0)
              .cast<double>()
              .matrix());
    }
    const auto& input = cache.activations[static_cast<std::size_t>(l)];
    MapM gw(grad.data() + off, out, in);
    gw.noalias() += delta * input.transpose();
    grad.segment(off + out * in, out) += delta.rowwise().sum();
    if (l > 0) {
      CMapM w(params_.data() + off, out, in);
      delta = w.transpose() * delta;
    }
  }
}

nlohmann::json to_json(const Mlp& net) {
  const auto& p = net.params();
  return {{"sizes", net.sizes()},
          {"params", std::vector<double>(p.data(), p.data() + p.size())}};
}

Mlp mlp_from_json(const nlohmann::json& j) {
  Mlp net(j.at("sizes").get<std::vector<int>>());
  const auto values = j.at("params").get<std::vector<double>>();
  if (static_cast<int>(values.size()) != net.parameter_count()) {
    throw Error(ErrorKind::kSchema, "network parameter count mismatch");
  }
  net.params() = Eigen::Map<const Eigen::VectorXd>(
      values.data(), static_cast<Eigen::Index>(values.size()));
  return net;
}

Adam::Adam(int size, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps),
      m_(Eigen::VectorXd::Zero(size)), v_(Eigen::VectorXd::Zero(size)) {}

void Adam::step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::VectorXd& grad) {
  if (grad.size() != m_.size() || params.size() != m_.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "optimizer size mismatch");
  }
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  params.array() -=
      lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

}  // namespace hoi
