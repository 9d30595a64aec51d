// Independent brute-force oracles used to freeze expected values.  Everything
// here recomputes from first principles: its own Gauss-Hermite rule (Newton on
// the recurrence, not Golub-Welsch), its own Hermite evaluation, dense tensor
// quadrature, and nodal application of the continuous operators via analytic
// derivative formulas.  Slow and simple on purpose; test grids are small.
#pragma once

#include <array>
#include <functional>
#include <vector>

#include "mfp/field.hpp"
#include "mfp/magnetic.hpp"
#include "mfp/weight.hpp"

namespace oracle {

struct Rule {
  std::vector<double> x, w;  // probabilists' weight, weights sum to 1
};

Rule gauss_hermite(int n);

/// h_0..h_nmax (orthonormal w.r.t. N(0,1)) and first two derivatives at x.
struct HermiteEval {
  std::vector<double> val, d1, d2;
};
HermiteEval hermite_at(double x, int nmax);

/// Pointwise evaluation of the distribution represented by the state:
/// Original-frame F(x,v) (includes the mu factor), Perturbation f(x,v),
/// Flat u(x,v).
double eval_state(const mfp::FieldState& s, const std::array<double, 3>& x,
                  const std::array<double, 3>& v);

/// Dense-quadrature L^p(m) norm of the Original-frame function of the state.
double norm_lp_m(const mfp::FieldState& s, const mfp::Weight& w, double p, int q_order,
                 int x_pts);

/// Dense-quadrature inner product of two Perturbation-frame states in
/// L^2(dx dmu).
double inner_l2_mu(const mfp::FieldState& a, const mfp::FieldState& b, int q_order, int x_pts);

/// Continuous operators applied pointwise via analytic Fourier-Hermite
/// derivative formulas, then projected back onto the coefficient basis by
/// dense quadrature.  `which` selects: "transport", "magnetic", "collision".
Eigen::VectorXcd apply_operator(const mfp::FieldState& f, const mfp::MagneticField& B,
                                const std::string& which, int q_order, int x_pts);

/// Velocity moments by dense quadrature: r(x_j), m_vec(x_j), M2(x_j) sampled
/// on a uniform x grid.
struct MomentSample {
  std::vector<double> r;
  std::array<std::vector<double>, 3> m;
  std::array<std::array<std::vector<double>, 3>, 3> M2;
};
MomentSample moments(const mfp::FieldState& f, int q_order, const std::vector<double>& x1_pts);

}  // namespace oracle
