#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mfp/operators.hpp"

namespace mfp {

struct IntegratorConfig {
  enum class Scheme { ExactSmall, StrangIMEX };
  Scheme scheme = Scheme::StrangIMEX;
  double dt = 1e-3;
  double t_end = 1.0;
  int record_every = 1;
  bool record_states = false;
};

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<double> mass;
  std::vector<FieldState> states;  // populated only when requested
  std::vector<std::string> norm_names;
  std::vector<std::vector<double>> norms;  // norms[k][j]: named quantity k at sample j

  int find_norm(const std::string& name) const;
  const std::vector<double>& series(const std::string& name) const;
};

using NormObserver = std::pair<std::string, std::function<double(const FieldState&)>>;

/// Approximate e^{t op} f0.  ExactSmall propagates with a dense matrix
/// exponential (machine-exact per recorded sample, dimension <= 4000);
/// StrangIMEX composes the exact exponential of the matrix diagonal with an
/// RK4 sweep of the off-diagonal part and is second order.  Throws when the
/// RK4 stability guard dt * rho(off-diagonal) <= 1.5 is violated.
TrajectoryRecord evolve(const LinearOperatorRep& op, const FieldState& f0,
                        const IntegratorConfig& cfg, const std::vector<NormObserver>& observers = {});

/// Power-iteration estimate of the spectral radius of the off-diagonal part,
/// used by the stability guard; exposed for configuration code.
double offdiagonal_radius_estimate(const LinearOperatorRep& op);

/// Pi_{L,0} F = mu <F>: rank-one projection onto the equilibrium direction.
FieldState spectral_projection_pi0(const FieldState& F);

/// Applies e^{t M} v for arbitrary t >= 0.  Dense eigendecomposition backend
/// for small dimensions (verified against the matrix, Pade fallback),
/// StrangIMEX marching otherwise.
class SemigroupSampler {
 public:
  explicit SemigroupSampler(const LinearOperatorRep& op, int dense_threshold = 1200);
  Eigen::VectorXcd apply(double t, const Eigen::VectorXcd& v) const;
  bool dense() const { return dense_; }

 private:
  bool dense_ = false;
  // dense path
  Eigen::MatrixXcd V_, Vinv_;
  Eigen::VectorXcd eig_;
  // sparse path
  Eigen::VectorXcd diag_;
  Eigen::SparseMatrix<Complex> rest_;
  double dt_ = 1e-3;
};

using TimeOp = std::function<Eigen::VectorXcd(double, const Eigen::VectorXcd&)>;

/// (S2 * S1)(t) v = integral_0^t S2(s) S1(t-s) v ds by Gauss-Legendre.
Eigen::VectorXcd convolve(const TimeOp& S2, const TimeOp& S1, double t, int points,
                          const Eigen::VectorXcd& v);

struct AdaptiveConvolution {
  Eigen::VectorXcd value;
  int points = 0;
  double rel_diff = 0.0;
  bool converged = false;
};

/// Doubles the quadrature order until two refinements agree to rel_tol.
AdaptiveConvolution convolve_adaptive(const TimeOp& S2, const TimeOp& S1, double t,
                                      const Eigen::VectorXcd& v, double rel_tol = 1e-6,
                                      int max_points = 256);

/// || S_L0(t) f - S_B(t) f - (S_L0 * (A S_B))(t) f || / || f ||  (coefficient l2).
double duhamel_residual(const SplitBundle& bundle, double t, const FieldState& f0,
                        int quad_points = 32);

/// Ratios || S_B(t) f0 ||_{L^q(m0)} / || f0 ||_{L^p(m0)} at the given times.
std::vector<std::pair<double, double>> smoothing_probe(const SplitBundle& bundle,
                                                       const FieldState& f0, double p, double q,
                                                       const std::vector<double>& t_list);

/// Least-squares slope of log(y) against log(t) restricted to [t_lo, t_hi].
double loglog_slope(const std::vector<std::pair<double, double>>& series, double t_lo, double t_hi);

}  // namespace mfp
