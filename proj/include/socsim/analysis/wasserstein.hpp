#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Core>

#include "socsim/contracts.hpp"
#include "socsim/genmodel/genmodel.hpp"

namespace socsim {

// 2-Wasserstein distance between diagonal Gaussians (closed form):
// sqrt(|mu1 - mu2|^2 + sum_i (sigma1_i - sigma2_i)^2).
inline double w2_gaussian(const GaussianPosterior& p, const GaussianPosterior& q) {
  const Eigen::Vector4d dmu = p.mean - q.mean;
  const Eigen::Vector4d dsig = (p.log_var.array() / 2.0).exp().matrix() -
                               (q.log_var.array() / 2.0).exp().matrix();
  return std::sqrt(dmu.squaredNorm() + dsig.squaredNorm());
}

// Mean w2 between two batches of posteriors aligned on the same reference
// observations.
inline double mean_w2(const PosteriorBatch& a, const PosteriorBatch& b) {
  require(a.mean.cols() == b.mean.cols() && a.mean.cols() >= 1,
          "mean_w2: batch size mismatch");
  const Eigen::ArrayXXd dmu = (a.mean - b.mean).array();
  const Eigen::ArrayXXd dsig =
      (a.log_var.array() / 2.0).exp() - (b.log_var.array() / 2.0).exp();
  return (dmu.square().colwise().sum() + dsig.square().colwise().sum())
      .sqrt().mean();
}

// Pairwise matrix of mean posterior Wasserstein distances over a shared
// reference set; symmetric with zero diagonal by construction.
inline Eigen::MatrixXd wasserstein_matrix(
    const std::vector<PosteriorBatch>& per_agent) {
  const int n = static_cast<int>(per_agent.size());
  require(n >= 1, "wasserstein_matrix: no posteriors");
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      d(i, j) = d(j, i) = mean_w2(per_agent[i], per_agent[j]);
    }
  }
  return d;
}

// Relational structure of one agent's representations: pairwise Euclidean
// distances between posterior means over the reference observations.
inline Eigen::MatrixXd representation_structure(const GenerativeModel& model,
                                                const Eigen::MatrixXd& reference_obs) {
  const Eigen::MatrixXd means = model.encode(reference_obs).mean;
  const int n = static_cast<int>(means.cols());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      d(i, j) = d(j, i) = (means.col(i) - means.col(j)).norm();
  return d;
}

}  // namespace socsim
