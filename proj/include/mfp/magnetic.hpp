#pragma once

#include <array>
#include <complex>
#include <vector>

#include "mfp/grid.hpp"

namespace mfp {

/// One Fourier mode of a real torus function: amp * exp(i xi.x) + c.c. is
/// implied unless xi = 0 (then amp must be real).
struct FourierMode {
  std::array<int, 3> xi{0, 0, 0};
  Complex amp{0.0, 0.0};
};

/// Smooth external magnetic field on the torus, stored as finitely many
/// Fourier modes per component.  For d_v = 3 there are three real components
/// (B1,B2,B3); for d_v = 2 a single scalar b with the convention
/// (v ^ b) := b(x) * (v2, -v1).
///
/// Sup norms are evaluated on a refinement grid with >= 4x the Fourier band;
/// for band-limited trigonometric data this oversampling keeps the estimate
/// within ~1e-3 of the exact sup, which only enters the entropy constants as
/// an upper bound direction anyway (larger estimate -> safer constants).
class MagneticField {
 public:
  /// Zero field.
  MagneticField(int d_x, int d_v);

  /// Constant field; vec must have d_v == 3 semantics (bx,by,bz), or for the
  /// scalar case pass {b,0,0} with d_v == 2.
  static MagneticField constant(int d_x, int d_v, const std::array<double, 3>& vec);

  /// General band-limited field from modes per component (component index
  /// 0..2 for d_v=3, component 0 for the scalar d_v=2 case).
  static MagneticField fourier(int d_x, int d_v, const std::array<std::vector<FourierMode>, 3>& modes);

  int d_x() const { return d_x_; }
  int d_v() const { return d_v_; }
  int n_components() const { return d_v_ == 3 ? 3 : 1; }
  bool is_zero() const;
  /// Largest |xi_j| over all stored modes.
  int band() const;

  /// Complex amplitude of component c at frequency xi (0 if absent); the
  /// Hermitian partner at -xi is stored explicitly.
  Complex amplitude(int c, const std::array<int, 3>& xi) const;
  const std::vector<FourierMode>& modes(int c) const { return modes_[c]; }

  /// Component value at a spatial point.
  double eval(int c, const std::array<double, 3>& x) const;

  double sup_norm() const { return sup_norm_; }
  double grad_sup_norm() const { return grad_sup_norm_; }

 private:
  int d_x_, d_v_;
  std::array<std::vector<FourierMode>, 3> modes_;  // hermitian-completed
  double sup_norm_ = 0.0, grad_sup_norm_ = 0.0;

  void complete_and_cache();
};

}  // namespace mfp
