#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <optional>
#include <string>

#include "mfp/field.hpp"
#include "mfp/magnetic.hpp"
#include "mfp/weight.hpp"

namespace mfp {

enum class Symmetry { SelfAdjoint, SkewAdjoint, None };

/// Sparse operator on coefficient space.  All conjugates of one continuous
/// operator by powers of mu share the same coefficient matrix (the frames
/// share one basis up to reinterpretation), so `frame` records which function
/// space the operator is meant to act on, not a different matrix.
struct LinearOperatorRep {
  std::shared_ptr<const Layout> layout;
  Frame frame = Frame::Perturbation;
  Eigen::SparseMatrix<Complex> mat;
  Symmetry symmetry = Symmetry::None;
  std::string label;

  FieldState apply(const FieldState& f) const;
  /// Max-entry residual against the declared symmetry class (0 for None).
  double symmetry_residual() const;
};

/// Elementary coefficient-space operators (Perturbation frame tags).
LinearOperatorRep assemble_dv(const std::shared_ptr<const Layout>&, int j);     // d/dv_j
LinearOperatorRep assemble_vmult(const std::shared_ptr<const Layout>&, int j);  // v_j .
LinearOperatorRep assemble_dx(const std::shared_ptr<const Layout>&, int j);     // d/dx_j

/// L = (-grad_v + v) . grad_v, diagonal with eigenvalue |alpha|.
LinearOperatorRep assemble_collision(const std::shared_ptr<const Layout>&);

/// v . grad_x, exactly skew-adjoint after Galerkin truncation.
LinearOperatorRep assemble_transport(const std::shared_ptr<const Layout>&);

/// (v ^ B_e) . grad_v; for d_v = 2 the scalar convention (v ^ b) = b (v2,-v1).
/// Exactly skew-adjoint; couples Fourier modes through conv with B-hat.
LinearOperatorRep assemble_magnetic(const std::shared_ptr<const Layout>&, const MagneticField& B);

/// The evolution generator: -P_1 (Perturbation) or -P_0 (Original), i.e.
/// -(v.grad_x) + (v ^ B_e).grad_v - L on the shared coefficient basis.
LinearOperatorRep assemble_generator(const std::shared_ptr<const Layout>&, const MagneticField& B,
                                     Frame frame);

/// PQ - QP.
LinearOperatorRep commutator(const LinearOperatorRep& P, const LinearOperatorRep& Q);

/// Closed forms of the four commutator identities, assembled independently:
///  (1) [d_{v_i}, v.grad_x] = d_{x_i}
///  (2) [d_{v_i}, -d_{v_j} + v_j] = delta_ij Id
///  (3) [grad_v, (v^B).grad_v]_i  (component i of B_e ^ grad_v)
///  (4) [d_{x_i}, (v^B).grad_v] = (v ^ d_{x_i} B_e).grad_v
LinearOperatorRep magnetic_commutator_v_rhs(const std::shared_ptr<const Layout>&,
                                            const MagneticField& B, int i);
LinearOperatorRep magnetic_commutator_x_rhs(const std::shared_ptr<const Layout>&,
                                            const MagneticField& B, int i);

/// C^2 quintic cutoff: 1 on [0,1], 0 on [2,inf).
double chi_cutoff(double r);

/// Galerkin projection of multiplication by M chi(|v|/R): I_x (x) A_v.
LinearOperatorRep assemble_cutoff_multiplier(const std::shared_ptr<const Layout>&, double M,
                                             double R);

struct SplitBundle {
  LinearOperatorRep L0;  // full generator
  LinearOperatorRep A;   // M chi_R multiplication (Galerkin)
  LinearOperatorRep B;   // L0 - A
  double M = 0.0, R = 0.0;
  std::string chi = "quintic C2 smoothstep, chi=1 on [0,R], 0 on [2R,inf)";
};

SplitBundle assemble_splitting(const std::shared_ptr<const Layout>&, const MagneticField& B,
                               double M, double R);

/// Lyapunov weight function Psi_{m,p} = (p-1)|grad m|^2/m^2 + Lap m / m
/// + (1 - 1/p) div_v K - K.grad m / m, with K = v + v ^ B_e.  The drift term
/// carries the corrected minus sign; `printed_sign` evaluates the variant
/// with the plus sign as printed, kept for comparison only.
double psi_value(const Weight& w, double p, double s, bool printed_sign = false);

/// Full vector-argument evaluation including the (v ^ B).grad m term, which
/// vanishes identically for radial weights; used to test B-independence.
double psi_value_field(const Weight& w, double p, const std::array<double, 3>& v,
                       const std::array<double, 3>& B_at_x, bool printed_sign = false);

struct LyapunovReport {
  Weight weight;
  double p = 2.0;
  double a_mp = 0.0;         // limsup of Psi_{m,p} (analytic)
  bool wp_holds = false;     // a_mp < 0
  double psi_sup = 0.0;      // sup of Psi over the quadrature nodes
  double psi_sup_outside = 0.0;  // sup of Psi - M chi_R over quadrature nodes
  double M = 0.0, R = 0.0;       // filled by the splitting search
  bool corrected_sign = true;    // drift-term sign convention in use
};

LyapunovReport psi_lyapunov(const Weight& w, double p, const GridConfig& grid,
                            bool printed_sign = false);

struct SplitParams {
  double M = 0.0, R = 0.0;
  double sup_certified = 0.0;  // dense-grid + tail bound on Psi - M chi_R
  bool ok = false;
  std::string note;
};

/// Automated choice of M, R with sup(Psi_{m,p} - M chi_R) <= a, certified on a
/// dense radial grid plus an analytic tail bound.  Fails when a <= a_{m,p}.
SplitParams split_search(const Weight& w, double p, double a_target);

struct ALedger {
  std::array<double, 3> a_m1{0, 0, 0};  // -k-1, -k+7/2+|B|, -k+1/2
  std::array<double, 3> a_m2{0, 0, 0};  // 3/2-k-1+|gradB|/2, 3/2-k+7/2+|B|, 3/2-k+1
  bool hyp5 = false;                    // k > 7/2 + |B|
  bool hyp6 = false;                    // k > 5 + max(|B|, |gradB|/2)
  bool hyp2 = false;                    // k > 3(1-1/p) + 7/2 + max(...)
  double max_all() const;
};

ALedger a_ledger(const Weight& w, const MagneticField& B, double p);

/// Quadrature value of integral (Lap_v g) |g|^{p-2} g dx dv for the
/// Flat-frame function g represented by the state; must be <= 0 up to
/// quadrature tolerance for any smooth g and p >= 1.
double nonpositivity_check(const FieldState& g, double p);

/// Velocity Gram matrix int h_a h_b mu^2 m^2 <v>^{2 extra} dv (gamma-scaled
/// Gauss-Hermite, exact for polynomial weights at adequate quad_order).
Eigen::MatrixXd velocity_gram(const GridConfig& grid, const Weight& w, int extra_bracket = 0);

/// <A m-weighted, B> for Original-frame states: integral A B m^2 dv dx.
double weighted_inner_original(const FieldState& a, const FieldState& b, const Weight& w);

/// Export in coordinate text format with a JSON header (io helpers live in io.hpp).

}  // namespace mfp
