#pragma once

#include "mfp/evolution.hpp"
#include "mfp/norms.hpp"

namespace mfp {

/// Constants of the two modified entropies.  kappa_l2 certifies the L^2
/// entropy decay with the measured discrete Op1 bound c_op (the epsilon
/// provenance travels with the struct); the H^1 block follows the explicit
/// recipe eta = eta' = eta'' = 1, E = 2, D = (E^2 + eta'/2)/2, C = A.
struct EntropyConstants {
  double eps = 0.5;
  double C = 0, D = 0, E = 0;
  double eta = 1, eta1 = 1, eta2 = 1;  // eta, eta', eta''
  double kappa_l2 = 0, kappa_h1 = 0;
  double c_P = 1;
  double c_op = 0, c_r = 0, c_m = 0;  // measured Op1 bound and its two parts

  void validate() const;  // throws on violated structural conditions
};

/// F_eps(f) = ||f||^2 + eps <Lambda_x^{-2} grad_x r, m>, Perturbation frame.
double entropy_f_eps(const FieldState& f, double eps);

/// E(u) = C ||u||^2 + D ||grad_v u||^2 + E <grad_x u, grad_v u> + ||grad_x u||^2.
double entropy_h1(const FieldState& u, const EntropyConstants& c);

/// H^1 norm squared of a Perturbation-frame state (coefficient arithmetic).
double h1_norm_sq(const FieldState& u);

/// Spectral gap of -Delta_x on the torus: min over nonzero grid frequencies
/// of |xi|^2 (= 1 for every admissible grid).
double poincare_gap(const GridConfig& grid);

/// Entropy constants from the field's cached sup norms plus the exact
/// discrete operator-norm bounds of the Op1 pieces.
EntropyConstants choose_constants(const MagneticField& B, const GridConfig& grid);

struct ModifiedPoincareReport {
  double ritz = 0;       // min Rayleigh of the truncated problem (estimate of 2 lambda_p)
  double min_probe = 0;  // min ratio over the random probe set
  bool positive = false;
};

/// Rayleigh ratios ||grad_v f||^2_mu / integral h^2 (1+|v|^2) dmu dx with
/// h = f - r the micro part.
ModifiedPoincareReport modified_poincare_probe(const GridConfig& grid, int n_trials,
                                               std::uint64_t seed);

struct MacroResiduals {
  std::vector<double> times;
  std::vector<double> r_resid;  // || d_t r + div_x m ||
  std::vector<double> m_resid;  // || d_t m + grad_x r + m ^ B + m + div_x M2[h] ||
  double max_r = 0, max_m = 0;
};

/// Discrete moment-equation residuals along a recorded trajectory; the time
/// derivative is the generator applied to the recorded states (exact for the
/// coefficient ODE), so this cross-checks moment extraction, generator rows
/// and the Fourier-side cross product against each other.
MacroResiduals macro_residual(const TrajectoryRecord& traj, const MagneticField& B,
                              const LinearOperatorRep& op);

struct DecayFit {
  double t_lo = 0, t_hi = 0;
  double rate = 0;  // decay rate (positive when the quantity decays)
  double r2 = 0;
  double monotone_after = 0;
  int n_samples = 0;
};

DecayFit fit_decay(const TrajectoryRecord& traj, const std::string& quantity, double t_lo,
                   double t_hi);

struct StepwiseResult {
  bool pass = false;
  double worst_margin = 0;  // max over steps of F_{j+1} e^{rate dt} / F_j
  int worst_index = -1;
};

/// Checks F(t_{j+1}) <= exp(-rate dt) F(t_j) (1 + tol) sample by sample.
StepwiseResult stepwise_entropy_dissipation(const TrajectoryRecord& traj,
                                            const std::string& quantity, double rate, double tol);

struct DissipativityReport {
  double rayleigh_max = 0;  // max m-weighted symmetrized Rayleigh quotient of B
  double a = 0;
  bool rayleigh_pass = false;
  double fd_worst = 0;  // max over trials of ||F(dt)|| / (e^{a dt} ||F0||)
  bool fd_pass = false;
  int fd_trials = 0;
};

/// Lemma-10 style probe: (p = 2) generalized eigenvalue bound of the
/// m-weighted symmetrized true action of B = L0 - M chi_R on the velocity
/// band, plus finite-difference decay probes of ||S_B(t) F||_{L^p(m)} on
/// random states of the full grid.
DissipativityReport lp_m_dissipativity_probe(const GridConfig& grid, const MagneticField& B,
                                             const Weight& w, double p, double a, double M,
                                             double R, int n_trials, std::uint64_t seed);

}  // namespace mfp
