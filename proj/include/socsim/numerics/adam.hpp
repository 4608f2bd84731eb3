#pragma once

#include <cmath>

#include <Eigen/Core>

#include "socsim/contracts.hpp"

namespace socsim {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction over a flat parameter vector.
class AdamState {
 public:
  AdamState() = default;
  AdamState(int n, AdamConfig cfg)
      : m_(Eigen::VectorXd::Zero(n)), v_(Eigen::VectorXd::Zero(n)), cfg_(cfg) {}

  void step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::VectorXd& grads) {
    require(params.size() == m_.size() && grads.size() == m_.size(),
            "adam: shape mismatch");
    ++t_;
    m_ = cfg_.beta1 * m_ + (1.0 - cfg_.beta1) * grads;
    v_.array() = cfg_.beta2 * v_.array() + (1.0 - cfg_.beta2) * grads.array().square();
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    params.array() -=
        cfg_.lr * (m_.array() / bc1) / ((v_.array() / bc2).sqrt() + cfg_.eps);
  }

  long step_count() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  Eigen::VectorXd m_, v_;
  long t_ = 0;
  AdamConfig cfg_;
};

}  // namespace socsim
