#pragma once

// Test-only oracles. Everything here is deliberately independent of the
// library's computation paths: scalar loops, finite differences, and direct
// density formulas.

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "socsim/numerics/net.hpp"

namespace oracles {

inline Eigen::VectorXd fd_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double h = 1e-5) {
  Eigen::VectorXd g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

// Componentwise agreement within rel_tol, with an absolute floor so that
// near-zero gradients are not judged on relative error alone.
inline bool gradients_match(const Eigen::VectorXd& analytic,
                            const Eigen::VectorXd& fd, double rel_tol = 1e-4,
                            double abs_floor = 1e-7, double* worst = nullptr) {
  if (analytic.size() != fd.size()) return false;
  double worst_rel = 0.0;
  bool ok = true;
  for (int i = 0; i < analytic.size(); ++i) {
    const double diff = std::abs(analytic[i] - fd[i]);
    const double scale = std::max(std::abs(analytic[i]), std::abs(fd[i]));
    const double rel = diff / std::max(scale, 1e-12);
    if (diff > abs_floor && rel > rel_tol) ok = false;
    if (diff > abs_floor) worst_rel = std::max(worst_rel, rel);
  }
  if (worst) *worst = worst_rel;
  return ok;
}

// Straight-line scalar re-evaluation of a feed-forward net.
inline std::vector<double> scalar_net_eval(const socsim::FeedForwardNet& net,
                                           std::vector<double> x) {
  for (const auto& layer : net.layers()) {
    const int out = static_cast<int>(layer.weight.rows());
    const int in = static_cast<int>(layer.weight.cols());
    std::vector<double> y(out);
    for (int r = 0; r < out; ++r) {
      double acc = layer.bias[r];
      for (int c = 0; c < in; ++c) acc += layer.weight(r, c) * x[c];
      y[r] = (layer.act == socsim::Activation::Tanh) ? std::tanh(acc) : acc;
    }
    x = std::move(y);
  }
  return x;
}

// log N(x; mean, diag(var)) evaluated with the textbook formula.
inline double gaussian_logpdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                              const Eigen::VectorXd& var) {
  double acc = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    acc += -0.5 * std::log(2.0 * M_PI * var[i]) -
           0.5 * (x[i] - mean[i]) * (x[i] - mean[i]) / var[i];
  }
  return acc;
}

}  // namespace oracles
