#pragma once

#include <Eigen/Dense>
#include <vector>

namespace mfp {

/// Gauss-Hermite rule for the probabilists' weight: sum_i w_i f(x_i) ~ E[f(X)],
/// X ~ N(0,1).  Nodes/weights from the Golub-Welsch tridiagonal eigenproblem.
struct GaussHermite {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;  // sums to 1
  explicit GaussHermite(int order);
};

/// Gauss-Legendre rule on [0,1]; rescale externally.
struct GaussLegendre {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;  // sums to 1
  explicit GaussLegendre(int order);
};

/// Values of the orthonormal (w.r.t. N(0,1)) Hermite polynomials h_0..h_nmax
/// at a list of points: table(i, n) = h_n(x_i).
Eigen::MatrixXd hermite_values(const Eigen::VectorXd& x, int nmax);

}  // namespace mfp
