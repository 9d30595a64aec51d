#include "mfp/quadrature.hpp"

#include <cmath>

namespace mfp {

namespace {

// Nodes and first-component weights of a symmetric tridiagonal Jacobi matrix.
void golub_welsch(const Eigen::VectorXd& offdiag, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  const int n = static_cast<int>(offdiag.size()) + 1;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) {
    J(i, i + 1) = offdiag[i];
    J(i + 1, i) = offdiag[i];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  nodes = es.eigenvalues();
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    const double v0 = es.eigenvectors()(0, i);
    weights[i] = v0 * v0;
  }
}

}  // namespace

GaussHermite::GaussHermite(int order) {
  Eigen::VectorXd off(order - 1);
  for (int i = 1; i < order; ++i) off[i - 1] = std::sqrt(double(i));
  golub_welsch(off, nodes, weights);
}

GaussLegendre::GaussLegendre(int order) {
  Eigen::VectorXd off(order - 1);
  for (int i = 1; i < order; ++i) off[i - 1] = i / std::sqrt(4.0 * i * i - 1.0);
  golub_welsch(off, nodes, weights);
  // shift from [-1,1] to [0,1]
  for (int i = 0; i < order; ++i) nodes[i] = 0.5 * (nodes[i] + 1.0);
}

Eigen::MatrixXd hermite_values(const Eigen::VectorXd& x, int nmax) {
  const int q = static_cast<int>(x.size());
  Eigen::MatrixXd H(q, nmax + 1);
  H.col(0).setOnes();
  if (nmax >= 1) H.col(1) = x;
  for (int n = 1; n < nmax; ++n) {
    const double a = 1.0 / std::sqrt(n + 1.0);
    const double b = std::sqrt(double(n) / (n + 1.0));
    H.col(n + 1) = a * x.cwiseProduct(H.col(n)) - b * H.col(n - 1);
  }
  return H;
}

}  // namespace mfp
