#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace hoi {

// Fully connected network with ReLU hidden layers and a linear head. All
// weights and biases live in one flat vector; samples are columns.
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<int> sizes);

  const std::vector<int>& sizes() const { return sizes_; }
  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  int parameter_count() const { return static_cast<int>(params_.size()); }

  Eigen::VectorXd& params() { return params_; }
  const Eigen::VectorXd& params() const { return params_; }

  // Orthogonal weights scaled by `hidden_gain` (hidden layers) and
  // `head_gain` (last layer); zero biases.
  void init_orthogonal(std::mt19937_64& rng, double hidden_gain,
                       double head_gain);

  struct Cache {
    std::vector<Eigen::MatrixXd> activations;  // input, then each layer output
  };

  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, Cache* cache = nullptr) const;

  // Adds d(loss)/d(params) to `grad` given d(loss)/d(output).
  void backward(const Cache& cache, const Eigen::MatrixXd& d_out,
                Eigen::Ref<Eigen::VectorXd> grad) const;

 private:
  using MapM = Eigen::Map<Eigen::MatrixXd>;
  using CMapM = Eigen::Map<const Eigen::MatrixXd>;
  using CMapV = Eigen::Map<const Eigen::VectorXd>;

  int layers() const { return static_cast<int>(sizes_.size()) - 1; }

  std::vector<int> sizes_;
  std::vector<int> offsets_;  // start of each layer's weights; bias follows
  Eigen::VectorXd params_;
};

nlohmann::json to_json(const Mlp& net);
Mlp mlp_from_json(const nlohmann::json& j);

class Adam {
 public:
  Adam() = default;
  Adam(int size, double lr, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8);

  void step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::VectorXd& grad);
  double learning_rate() const { return lr_; }

 private:
  double lr_ = 3e-4, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  std::int64_t t_ = 0;
  Eigen::VectorXd m_, v_;
};

}  // namespace hoi
