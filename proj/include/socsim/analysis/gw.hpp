#pragma once

#include <cmath>

#include <Eigen/Core>

#include "socsim/contracts.hpp"

namespace socsim {

struct GwOptions {
  double epsilon = 5e-3;     // entropic regularization (on normalized matrices)
  int max_outer = 200;       // alternating projection iterations
  double outer_tol = 1e-9;   // stop when the coupling stops moving
  int max_inner = 2000;      // Sinkhorn iterations per projection
  double inner_tol = 1e-9;   // marginal violation tolerance
};

struct GwResult {
  double value = 0.0;  // unregularized transport cost of the final plan
  bool converged = false;
  int outer_iterations = 0;
  Eigen::MatrixXd coupling;
};

namespace detail {

// One log-domain Sinkhorn solve for cost L with uniform marginals, warm
// started from the potentials f, g (updated in place).
inline void log_sinkhorn(const Eigen::MatrixXd& cost, double epsilon,
                         Eigen::VectorXd& f, Eigen::VectorXd& g,
                         const GwOptions& opt) {
  const int n = static_cast<int>(cost.rows());
  const int m = static_cast<int>(cost.cols());
  const double log_p = -std::log(static_cast<double>(n));
  const double log_q = -std::log(static_cast<double>(m));

  auto lse_rows = [&](const Eigen::MatrixXd& a) {
    const Eigen::VectorXd mx = a.rowwise().maxCoeff();
    return (mx.array() +
            ((a.colwise() - mx).array().exp().rowwise().sum()).log()).matrix();
  };

  for (int it = 0; it < opt.max_inner; ++it) {
    // f update: rows of (g^T - L) / eps
    Eigen::MatrixXd a = ((-cost).rowwise() + g.transpose()) / epsilon;
    f = epsilon * (log_p - lse_rows(a).array()).matrix();
    // g update: rows of (f - L^T) / eps
    Eigen::MatrixXd b = ((-cost.transpose()).rowwise() + f.transpose()) / epsilon;
    g = epsilon * (log_q - lse_rows(b).array()).matrix();

    // Column marginals are exact after the g update; check rows.
    const Eigen::MatrixXd logT =
        (((-cost).colwise() + f).rowwise() + g.transpose()) / epsilon;
    const Eigen::VectorXd row_sums = logT.array().exp().rowwise().sum();
    if ((row_sums.array() - 1.0 / n).abs().maxCoeff() < opt.inner_tol) break;
  }
}

}  // namespace detail

// Entropic Gromov-Wasserstein distance between two metric structures with
// uniform weights and squared loss. Both matrices are normalized by their
// joint maximum entry before solving, so the returned cost is on that
// normalized scale. Follows the alternating Sinkhorn-projection scheme with
// the squared-loss decomposition
//   <L(T), T>,  L(T) = constC - 2 * D1 T D2^T.
inline GwResult gw_distance(const Eigen::MatrixXd& d1, const Eigen::MatrixXd& d2,
                            const GwOptions& opt = {}) {
  require(d1.rows() == d1.cols() && d2.rows() == d2.cols(),
          "gw: matrices must be square");
  require(d1.rows() >= 1 && d2.rows() >= 1, "gw: empty matrix");
  const int n = static_cast<int>(d1.rows());
  const int m = static_cast<int>(d2.rows());

  GwResult out;
  const double scale = std::max(d1.maxCoeff(), d2.maxCoeff());
  if (scale <= 0.0) {
    out.value = 0.0;
    out.converged = true;
    out.coupling = Eigen::MatrixXd::Constant(n, m, 1.0 / (n * m));
    return out;
  }
  const Eigen::MatrixXd a = d1 / scale;
  const Eigen::MatrixXd b = d2 / scale;

  const Eigen::VectorXd c1 =
      a.array().square().matrix() * Eigen::VectorXd::Constant(n, 1.0 / n);
  const Eigen::VectorXd c2 =
      b.array().square().matrix() * Eigen::VectorXd::Constant(m, 1.0 / m);
  const Eigen::MatrixXd const_c = c1 * Eigen::RowVectorXd::Ones(m) +
                                  Eigen::VectorXd::Ones(n) * c2.transpose();

  Eigen::MatrixXd coupling = Eigen::MatrixXd::Constant(n, m, 1.0 / (n * m));
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(m);

  auto plan_cost = [&](const Eigen::MatrixXd& t) {
    const Eigen::MatrixXd l = const_c - 2.0 * a * t * b.transpose();
    return (l.array() * t.array()).sum();
  };

  for (int it = 0; it < opt.max_outer; ++it) {
    ++out.outer_iterations;
    const Eigen::MatrixXd cost = const_c - 2.0 * a * coupling * b.transpose();
    detail::log_sinkhorn(cost, opt.epsilon, f, g, opt);
    const Eigen::MatrixXd next =
        ((((-cost).colwise() + f).rowwise() + g.transpose()) / opt.epsilon)
            .array().exp().matrix();
    const double delta = (next - coupling).cwiseAbs().maxCoeff();
    coupling = next;
    if (delta < opt.outer_tol) {
      out.converged = true;
      break;
    }
  }

  out.value = plan_cost(coupling);
  out.coupling = std::move(coupling);
  return out;
}

}  // namespace socsim
