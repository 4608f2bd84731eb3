#pragma once

#include <cmath>
#include <optional>

#include <Eigen/Core>

#include "socsim/contracts.hpp"

namespace socsim {

// Pairwise Euclidean distances between column points.
inline Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& points) {
  const int n = static_cast<int>(points.cols());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      d(i, j) = d(j, i) = (points.col(i) - points.col(j)).norm();
    }
  }
  return d;
}

// Representational similarity: Pearson correlation over the strict upper
// triangles of two distance matrices. Undefined (nullopt) when either
// triangle has zero variance.
inline std::optional<double> rsa(const Eigen::MatrixXd& d_obs,
                                 const Eigen::MatrixXd& d_rep) {
  require(d_obs.rows() == d_obs.cols() && d_rep.rows() == d_rep.cols(),
          "rsa: distance matrices must be square");
  require(d_obs.rows() == d_rep.rows(), "rsa: dimension mismatch");
  const int n = static_cast<int>(d_obs.rows());
  require(n >= 2, "rsa: need at least two items");

  const long m = static_cast<long>(n) * (n - 1) / 2;
  Eigen::VectorXd u(m), v(m);
  long at = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      u[at] = d_obs(i, j);
      v[at] = d_rep(i, j);
      ++at;
    }
  }
  const double mu = u.mean(), mv = v.mean();
  u.array() -= mu;
  v.array() -= mv;
  const double su = u.norm(), sv = v.norm();
  if (su == 0.0 || sv == 0.0) return std::nullopt;
  return u.dot(v) / (su * sv);
}

}  // namespace socsim
