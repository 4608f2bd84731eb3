#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "socsim/contracts.hpp"

namespace socsim {

// Classical (Torgerson) multidimensional scaling: double-center the squared
// distances, take the top eigenpairs, truncate negative eigenvalues at zero.
// Rows of the result are point coordinates. The sign of each axis is fixed by
// making the largest-magnitude coordinate positive.
inline Eigen::MatrixXd classical_mds(const Eigen::MatrixXd& d, int dim = 2) {
  require(d.rows() == d.cols() && d.rows() >= 1, "mds: matrix must be square");
  require(dim >= 1, "mds: dim must be >= 1");
  const int n = static_cast<int>(d.rows());

  const Eigen::MatrixXd d2 = d.array().square().matrix();
  const Eigen::MatrixXd j =
      Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / n);
  const Eigen::MatrixXd b = -0.5 * j * d2 * j;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(b);
  require(solver.info() == Eigen::Success, "mds: eigendecomposition failed");

  Eigen::MatrixXd coords = Eigen::MatrixXd::Zero(n, dim);
  for (int c = 0; c < dim; ++c) {
    const int src = n - 1 - c;  // eigenvalues are ascending
    if (src < 0) break;
    const double ev = solver.eigenvalues()[src];
    if (ev <= 0.0) continue;
    coords.col(c) = solver.eigenvectors().col(src) * std::sqrt(ev);
    int argmax = 0;
    coords.col(c).cwiseAbs().maxCoeff(&argmax);
    if (coords(argmax, c) < 0.0) coords.col(c) = -coords.col(c);
  }
  return coords;
}

// Orthogonal Procrustes alignment (rotations and reflections) of x onto ref;
// both are expected to be centered, as classical_mds output is.
inline Eigen::MatrixXd procrustes_align(const Eigen::MatrixXd& x,
                                        const Eigen::MatrixXd& ref) {
  require(x.rows() == ref.rows() && x.cols() == ref.cols(),
          "procrustes: shape mismatch");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(x.transpose() * ref,
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
  return x * (svd.matrixU() * svd.matrixV().transpose());
}

}  // namespace socsim
