#pragma once

#include <Eigen/Dense>
#include <memory>
#include <random>

#include "mfp/grid.hpp"

namespace mfp {

/// Which function the shared coefficient tensor represents.
///
/// With g(x,v) = sum c_{xi,alpha} exp(i xi.x) h_alpha(v), where {h_alpha} is
/// the Hermite family orthonormal in L^2(d mu):
///   Perturbation : f = g,                F = mu + mu f
///   Original     : F = mu * g            (so g = 1 + f)
///   Flat         : u = F / sqrt(mu) = g * sqrt(mu)
/// Conversion between frames is therefore the identity on coefficients except
/// for a +-1 shift of the (xi=0, alpha=0) entry, which is what makes the
/// mu-conjugated operator family P_0, P_1, P_1/2 share one matrix.
enum class Frame { Original, Perturbation, Flat };

const char* frame_name(Frame f);

struct FieldState {
  std::shared_ptr<const Layout> layout;
  Frame frame = Frame::Perturbation;
  Eigen::VectorXcd coeffs;

  const GridConfig& grid() const { return layout->grid(); }

  Complex& at(int xi_rank, int h_rank) { return coeffs[layout->flat(xi_rank, h_rank)]; }
  Complex at(int xi_rank, int h_rank) const { return coeffs[layout->flat(xi_rank, h_rank)]; }

  /// Mass functional: <f> in Perturbation frame, <F> = integral of F in
  /// Original/Flat frame.  Both are the (0,0) coefficient.
  Complex mass() const { return at(layout->fourier().index({0, 0, 0}), 0); }

  /// Max deviation from the Hermitian Fourier symmetry c(-xi,a) = conj(c(xi,a)).
  double hermitian_symmetry_residual() const;
};

FieldState zero_state(const std::shared_ptr<const Layout>& layout, Frame frame);

FieldState convert_frame(const FieldState& state, Frame target);

/// Velocity moments of a Perturbation-frame state, as Fourier coefficient
/// vectors over x: r = integral f dmu, m_vec = integral v f dmu,
/// M2 = integral (v x v) f dmu.
struct Moments {
  Eigen::VectorXcd r;                             // n_fourier
  std::array<Eigen::VectorXcd, 3> m_vec;          // per velocity component
  std::array<std::array<Eigen::VectorXcd, 3>, 3> M2;  // symmetric
  int d_v = 0;
};

Moments moments(const FieldState& state);

/// As above but with the alpha = 0 slice removed from M2 (the micro part h).
Moments moments_micro(const FieldState& state);

/// Presets ------------------------------------------------------------------

struct RandomStateOptions {
  bool mean_zero = false;
  int margin = 0;            // zero the top `margin` Hermite degrees and Fourier bands
  double hermite_decay = 0;  // if > 0: scale by exp(-(|a|/decay)^2)
  double hermite_growth = 0; // if > 0: scale by (1+|a|)^growth   ("rough" data)
  bool normalize = true;     // unit coefficient l2 norm
};

FieldState random_state(const std::shared_ptr<const Layout>& layout, Frame frame,
                        std::uint64_t seed, const RandomStateOptions& opt = {});

FieldState single_mode_state(const std::shared_ptr<const Layout>& layout, Frame frame,
                             const std::array<int, 3>& xi, const std::array<int, 3>& alpha);

/// f such that F = mu(. - u): exact Hermite expansion of the shifted Maxwellian.
FieldState shifted_maxwellian_state(const std::shared_ptr<const Layout>& layout,
                                    const std::array<double, 3>& offset);

}  // namespace mfp
