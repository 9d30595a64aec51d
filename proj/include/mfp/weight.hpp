#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace mfp {

/// Radial velocity weight m(v), either polynomial <v>^k = (1+|v|^2)^(k/2) or
/// exponential mu^(-theta).  All evaluators are written in terms of s = |v|^2;
/// the weight is radial in v and independent of x, which is what makes the
/// transport and magnetic operators skew-adjoint in every L^2(m).
struct Weight {
  enum class Kind { Polynomial, ExponentialTheta };

  Kind kind = Kind::Polynomial;
  double param = 0.0;  // k for Polynomial, theta for ExponentialTheta
  int d_v = 3;

  static Weight poly(double k, int d_v) {
    if (!(k > 0)) throw std::invalid_argument("weight: polynomial exponent k must be > 0");
    return Weight{Kind::Polynomial, k, d_v};
  }
  static Weight exp_theta(double theta, int d_v) {
    if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("weight: theta must be in (0,1]");
    return Weight{Kind::ExponentialTheta, theta, d_v};
  }
  /// m0 = mu^{-1/2}, the exponential reference weight.
  static Weight m0(int d_v) { return exp_theta(0.5, d_v); }

  bool polynomial() const { return kind == Kind::Polynomial; }

  /// m evaluated at s = |v|^2 (includes the (2 pi)^{d_v theta/2} constant of
  /// mu^{-theta} so that e.g. m0^2 = 1/mu exactly).
  double value_s(double s) const {
    if (polynomial()) return std::pow(1.0 + s, 0.5 * param);
    return std::pow(2.0 * M_PI, 0.5 * d_v * param) * std::exp(0.5 * param * s);
  }

  /// grad m / m = c(s) v; returns c(s).
  double grad_factor_s(double s) const {
    if (polynomial()) return param / (1.0 + s);
    return param;
  }

  /// Delta m / m at s = |v|^2.
  double laplacian_over_m_s(double s) const {
    if (polynomial()) {
      const double k = param;
      return k * (k - 2.0) * s / ((1.0 + s) * (1.0 + s)) + k * d_v / (1.0 + s);
    }
    return param * d_v + param * param * s;
  }

  /// |grad m|^2 / m^2 at s = |v|^2.
  double grad_sq_over_m2_s(double s) const {
    const double c = grad_factor_s(s);
    return c * c * s;
  }

  std::string describe() const {
    if (polynomial()) return "<v>^" + std::to_string(param);
    return "mu^-" + std::to_string(param);
  }
};

}  // namespace mfp
