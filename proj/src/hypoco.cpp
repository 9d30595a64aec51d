#include "mfp/hypoco.hpp"

#include <cmath>
#include <stdexcept>

#include "mfp/quadrature.hpp"

namespace mfp {

void EntropyConstants::validate() const {
  if (!(eps > 0 && eps <= 0.5)) throw std::invalid_argument("entropy constants: eps must be in (0, 1/2]");
  if (!(E * E < D)) throw std::invalid_argument("entropy constants: require E^2 < D");
  if (!(E >= 2.0)) throw std::invalid_argument("entropy constants: require E >= 2");
  if (!(D >= 0.5 * (E * E + 0.5 * eta1))) throw std::invalid_argument("entropy constants: D too small");
  if (!(eta <= 1.0 && eta2 <= 1.0)) throw std::invalid_argument("entropy constants: eta, eta'' must be <= 1");
}

namespace {

// dissect a Perturbation-frame state into the Fourier slices of r and m_vec
struct MacroSlices {
  Eigen::VectorXcd r;
  std::array<Eigen::VectorXcd, 3> m;
};

MacroSlices macro_slices(const FieldState& f) {
  const auto& L = *f.layout;
  const auto& hb = L.hermite();
  MacroSlices s;
  s.r.resize(L.n_fourier());
  for (int j = 0; j < hb.d_v(); ++j) s.m[j].resize(L.n_fourier());
  std::array<int, 3> e{0, 0, 0};
  for (int xi = 0; xi < L.n_fourier(); ++xi) {
    s.r[xi] = f.at(xi, 0);
    for (int j = 0; j < hb.d_v(); ++j) {
      e = {0, 0, 0};
      e[j] = 1;
      s.m[j][xi] = f.at(xi, hb.index(e));
    }
  }
  return s;
}

}  // namespace

double entropy_f_eps(const FieldState& f, double eps) {
  if (f.frame != Frame::Perturbation)
    throw std::invalid_argument("entropy_f_eps: Perturbation frame required");
  if (!(eps >= 0 && eps <= 0.5)) throw std::invalid_argument("entropy_f_eps: eps out of range (0,1/2]");
  const auto& fr = f.layout->fourier();
  const MacroSlices s = macro_slices(f);
  double coupling = 0;
  for (int xi = 0; xi < fr.size(); ++xi) {
    const auto k = fr.freq(xi);
    const double lam = 1.0 + fr.freq_norm2(xi);
    Complex dot(0, 0);
    for (int j = 0; j < std::min(f.grid().d_v, fr.d_x()); ++j)
      dot += Complex(0, k[j]) * s.r[xi] * std::conj(s.m[j][xi]);
    coupling += dot.real() / lam;
  }
  const double n2 = f.coeffs.squaredNorm();
  return n2 + eps * coupling;
}

double h1_norm_sq(const FieldState& u) {
  const auto& L = *u.layout;
  const auto& hb = L.hermite();
  const auto& fr = L.fourier();
  double nv = 0, nx = 0;
  for (int xi = 0; xi < fr.size(); ++xi) {
    const double k2 = fr.freq_norm2(xi);
    for (int h = 0; h < hb.size(); ++h) {
      const double c2 = std::norm(u.at(xi, h));
      nv += hb.degree(h) * c2;
      nx += k2 * c2;
    }
  }
  return u.coeffs.squaredNorm() + nv + nx;
}

double entropy_h1(const FieldState& u, const EntropyConstants& c) {
  if (u.frame != Frame::Perturbation)
    throw std::invalid_argument("entropy_h1: Perturbation frame required");
  c.validate();
  const auto& L = *u.layout;
  const auto& hb = L.hermite();
  const auto& fr = L.fourier();
  double nv = 0, nx = 0, cross = 0;
  for (int xi = 0; xi < fr.size(); ++xi) {
    const auto k = fr.freq(xi);
    const double k2 = fr.freq_norm2(xi);
    for (int h = 0; h < hb.size(); ++h) {
      const Complex cv = u.at(xi, h);
      const double c2 = std::norm(cv);
      nv += hb.degree(h) * c2;
      nx += k2 * c2;
    }
    // <grad_x u, grad_v u> = sum_j <i xi_j u, d_{v_j} u>
    for (int j = 0; j < std::min(L.grid().d_v, fr.d_x()); ++j) {
      if (k[j] == 0) continue;
      for (int h = 0; h < hb.size(); ++h) {
        auto up = hb.multi(h);
        up[j] += 1;
        const int iu = hb.index(up);
        if (iu < 0) continue;
        // (d_{v_j} u)_alpha = sqrt(alpha_j + 1) c_{alpha + e_j}
        const Complex dx = Complex(0, k[j]) * u.at(xi, h);
        const Complex dv = std::sqrt(double(up[j])) * u.at(xi, iu);
        cross += (dx * std::conj(dv)).real();
      }
    }
  }
  return c.C * u.coeffs.squaredNorm() + c.D * nv + c.E * cross + nx;
}

double poincare_gap(const GridConfig& grid) {
  // integer frequencies: the minimum of |xi|^2 over nonzero xi is 1
  FourierGrid fr(grid.d_x, grid.n_x);
  double gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < fr.size(); ++i) {
    const double k2 = fr.freq_norm2(i);
    if (k2 > 0) gap = std::min(gap, k2);
  }
  return gap;
}

EntropyConstants choose_constants(const MagneticField& B, const GridConfig& grid) {
  EntropyConstants c;
  c.c_P = poincare_gap(grid);

  // Exact discrete operator norms of the Op1 pieces:
  //   c_xi   = max |xi| / sqrt(1+|xi|^2) over grid frequencies
  //   c_r    = bound of ||Lambda^{-1} div_x m(h)|| / ||h||
  //   c_m    = bound of ||Lambda^{-1} (m^B + m + div_x M2[h])|| / ||h||
  FourierGrid fr(grid.d_x, grid.n_x);
  double c_xi = 0;
  for (int i = 0; i < fr.size(); ++i) {
    const double k2 = fr.freq_norm2(i);
    c_xi = std::max(c_xi, std::sqrt(k2 / (1.0 + k2)));
  }
  c.c_r = c_xi;
  c.c_m = B.sup_norm() + 1.0 + c_xi * std::sqrt(2.0);
  c.c_op = c_xi * c_xi + 0.5 * c.c_m * c.c_m;
  c.eps = std::min(0.5, 1.0 / (2.0 * c.c_op));
  c.kappa_l2 = 0.25 * c.eps * c.c_P / (c.c_P + 1.0);

  c.eta = c.eta1 = c.eta2 = 1.0;
  c.E = 2.0;
  c.D = 0.5 * (c.E * c.E + 0.5 * c.eta1);
  const double nb = B.sup_norm(), ng = B.grad_sup_norm();
  const double A = 0.5 * (2.0 * c.D + c.E) * (2.0 * c.D + c.E) + 2.0 * c.D * nb +
                   (c.E / (2.0 * c.eta)) * nb * nb + (c.E * c.E / (2.0 * c.eta1)) * ng * ng +
                   0.5 * c.eta1 + (1.0 / c.eta2) * ng * ng;
  c.C = A;
  c.kappa_h1 = (c.E / 8.0) * c.c_P / (2.0 * c.C);
  c.validate();
  return c;
}

ModifiedPoincareReport modified_poincare_probe(const GridConfig& grid, int n_trials,
                                               std::uint64_t seed) {
  ModifiedPoincareReport rep;
  // velocity-only problem: x plays no role in either side
  HermiteBasis hb(grid.d_v, grid.n_v);
  const int nh = hb.size();

  // Gram of (1 + |v|^2) in the orthonormal Hermite basis, exact recurrences
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(nh, nh);
  for (int a = 0; a < nh; ++a) {
    const auto& al = hb.multi(a);
    double diag = 1.0;
    for (int j = 0; j < grid.d_v; ++j) diag += 2.0 * al[j] + 1.0;
    W(a, a) += diag;
    for (int j = 0; j < grid.d_v; ++j) {
      auto up = al;
      up[j] += 2;
      const int iu = hb.index(up);
      if (iu >= 0) {
        const double c = std::sqrt(double((al[j] + 1) * (al[j] + 2)));
        W(iu, a) += c;
        W(a, iu) += c;
      }
    }
  }
  W = 0.5 * (W + W.transpose());

  // restrict to the micro subspace alpha != 0
  Eigen::MatrixXd Wm = W.bottomRightCorner(nh - 1, nh - 1);
  Eigen::VectorXd deg(nh - 1);
  for (int a = 1; a < nh; ++a) deg[a - 1] = hb.degree(a);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(
      Eigen::MatrixXd(deg.asDiagonal()), Wm);
  rep.ritz = es.eigenvalues().minCoeff();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0, 1);
  double mn = std::numeric_limits<double>::infinity();
  for (int t = 0; t < n_trials; ++t) {
    Eigen::VectorXd h(nh - 1);
    for (int i = 0; i < nh - 1; ++i) h[i] = g(rng);
    const double num = (deg.asDiagonal() * h).dot(h);
    const double den = (Wm * h).dot(h);
    mn = std::min(mn, num / den);
  }
  rep.min_probe = mn;
  rep.positive = rep.ritz > 0;
  return rep;
}

MacroResiduals macro_residual(const TrajectoryRecord& traj, const MagneticField& B,
                              const LinearOperatorRep& op) {
  if (traj.states.empty())
    throw std::invalid_argument("macro_residual: trajectory has no recorded states");
  MacroResiduals out;
  const auto& L = *traj.states.front().layout;
  const auto& fr = L.fourier();
  const auto& hb = L.hermite();
  const int dv = hb.d_v();

  for (size_t j = 0; j < traj.states.size(); ++j) {
    const FieldState& f = traj.states[j];
    FieldState df = f;
    df.coeffs = op.mat * f.coeffs;

    const MacroSlices slice = macro_slices(f);
    const MacroSlices dslice = macro_slices(df);
    const Moments mo = moments_micro(f);

    double r2 = 0, m2 = 0;
    for (int xi = 0; xi < fr.size(); ++xi) {
      const auto k = fr.freq(xi);
      // d_t r + div_x m
      Complex rr = dslice.r[xi];
      for (int jj = 0; jj < std::min(dv, fr.d_x()); ++jj)
        rr += Complex(0, k[jj]) * slice.m[jj][xi];
      r2 += std::norm(rr);

      // (m ^ B)(xi): convolution with the field modes
      std::array<Complex, 3> mxB{Complex(0, 0), Complex(0, 0), Complex(0, 0)};
      auto mslice = [&](int comp, const std::array<int, 3>& q) -> Complex {
        const int r = fr.index(q);
        return r < 0 ? Complex(0, 0) : slice.m[comp][r];
      };
      if (dv == 3) {
        for (int c = 0; c < 3; ++c) {
          for (const auto& md : B.modes(c)) {
            std::array<int, 3> q = k;
            for (int jj = 0; jj < fr.d_x(); ++jj) q[jj] -= md.xi[jj];
            // (m ^ B)_i = eps_{icl} m_c? no: (m ^ B)_1 = m2 B3 - m3 B2, etc.
            if (c == 0) {
              mxB[1] += mslice(2, q) * md.amp;
              mxB[2] -= mslice(1, q) * md.amp;
            } else if (c == 1) {
              mxB[0] -= mslice(2, q) * md.amp;
              mxB[2] += mslice(0, q) * md.amp;
            } else {
              mxB[0] += mslice(1, q) * md.amp;
              mxB[1] -= mslice(0, q) * md.amp;
            }
          }
        }
      } else {
        for (const auto& md : B.modes(0)) {
          std::array<int, 3> q = k;
          for (int jj = 0; jj < fr.d_x(); ++jj) q[jj] -= md.xi[jj];
          mxB[0] += md.amp * mslice(1, q);
          mxB[1] -= md.amp * mslice(0, q);
        }
      }

      for (int jj = 0; jj < dv; ++jj) {
        Complex rm = dslice.m[jj][xi] + mxB[jj] + slice.m[jj][xi];
        if (jj < fr.d_x()) rm += Complex(0, k[jj]) * slice.r[xi];
        for (int l = 0; l < std::min(dv, fr.d_x()); ++l)
          rm += Complex(0, k[l]) * mo.M2[l][jj][xi];
        m2 += std::norm(rm);
      }
    }
    out.times.push_back(traj.times[j]);
    out.r_resid.push_back(std::sqrt(r2));
    out.m_resid.push_back(std::sqrt(m2));
    out.max_r = std::max(out.max_r, out.r_resid.back());
    out.max_m = std::max(out.max_m, out.m_resid.back());
  }
  return out;
}

DecayFit fit_decay(const TrajectoryRecord& traj, const std::string& quantity, double t_lo,
                   double t_hi) {
  const auto& y = traj.series(quantity);
  DecayFit fit;
  fit.t_lo = t_lo;
  fit.t_hi = t_hi;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  int n = 0;
  for (size_t j = 0; j < traj.times.size(); ++j) {
    const double t = traj.times[j];
    if (t < t_lo || t > t_hi) continue;
    if (!(y[j] > 0)) throw std::invalid_argument("fit_decay: nonpositive sample in window");
    const double ly = std::log(y[j]);
    sx += t;
    sy += ly;
    sxx += t * t;
    sxy += t * ly;
    syy += ly * ly;
    ++n;
  }
  if (n < 3) throw std::invalid_argument("fit_decay: fewer than three samples in window");
  const double denom = n * sxx - sx * sx;
  const double slope = (n * sxy - sx * sy) / denom;
  fit.rate = -slope;
  const double ss_tot = syy - sy * sy / n;
  const double intercept = (sy - slope * sx) / n;
  double ss_res = 0;
  for (size_t j = 0; j < traj.times.size(); ++j) {
    const double t = traj.times[j];
    if (t < t_lo || t > t_hi) continue;
    const double e = std::log(y[j]) - (intercept + slope * t);
    ss_res += e * e;
  }
  fit.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  fit.n_samples = n;

  fit.monotone_after = traj.times.back();
  for (size_t j0 = 0; j0 < traj.times.size(); ++j0) {
    bool mono = true;
    for (size_t j = j0; j + 1 < traj.times.size() && mono; ++j)
      mono = y[j + 1] <= y[j] * (1.0 + 1e-12);
    if (mono) {
      fit.monotone_after = traj.times[j0];
      break;
    }
  }
  return fit;
}

StepwiseResult stepwise_entropy_dissipation(const TrajectoryRecord& traj,
                                            const std::string& quantity, double rate, double tol) {
  const auto& y = traj.series(quantity);
  StepwiseResult res;
  res.pass = true;
  for (size_t j = 0; j + 1 < traj.times.size(); ++j) {
    const double dt = traj.times[j + 1] - traj.times[j];
    const double bound = std::exp(-rate * dt) * y[j];
    if (y[j] < 1e-300) {
      if (y[j + 1] > 1e-300) {
        res.pass = false;
        res.worst_index = static_cast<int>(j);
      }
      continue;
    }
    const double margin = y[j + 1] / bound;
    if (margin > res.worst_margin) {
      res.worst_margin = margin;
      res.worst_index = static_cast<int>(j);
    }
    if (margin > 1.0 + tol) res.pass = false;
  }
  return res;
}

DissipativityReport lp_m_dissipativity_probe(const GridConfig& grid, const MagneticField& B,
                                             const Weight& w, double p, double a, double M,
                                             double R, int n_trials, std::uint64_t seed) {
  DissipativityReport rep;
  rep.a = a;

  // --- (p = 2) m-weighted symmetrized Rayleigh bound on the velocity band.
  // Transport and the x-varying part of the magnetic rotation are skew in
  // every L^2(m) with radial m, so the symmetric part of B lives entirely in
  // the xi-constant velocity block; the true (extended-band) action of
  // L0 - M chi_R is paired against band states under the m^2 mu^2 measure.
  {
    GridConfig gv = grid;
    gv.d_x = 1;
    gv.n_x = 1;  // velocity-only block (internal layout; xi = 0)
    GridConfig ge = gv;
    ge.n_v += 1;
    const auto Lv = std::make_shared<Layout>(gv);
    const auto Le = std::make_shared<Layout>(ge);

    std::array<double, 3> b0{0, 0, 0};
    for (int c = 0; c < B.n_components(); ++c) b0[c] = B.amplitude(c, {0, 0, 0}).real();
    const MagneticField Bmean = MagneticField::constant(1, grid.d_v, b0);
    const LinearOperatorRep L0e = assemble_generator(Le, Bmean, Frame::Original);

    const auto& hb = Lv->hermite();
    const auto& ehb = Le->hermite();
    const int nh = hb.size(), nhe = ehb.size();
    Eigen::MatrixXcd inj = Eigen::MatrixXcd::Zero(nhe, nh);
    for (int h = 0; h < nh; ++h) inj(ehb.index(hb.multi(h)), h) = 1.0;
    const Eigen::MatrixXcd Mcols = Eigen::MatrixXcd(L0e.mat) * inj;

    // gamma-scaled nodes for the mu^2 m^2 measure
    const int dv = grid.d_v;
    double gamma, prefac, rho_pow;
    if (w.polynomial()) {
      gamma = 2.0;
      prefac = std::pow(2.0 * M_PI, -double(dv));
      rho_pow = 2.0 * w.param;
    } else {
      gamma = 2.0 * (1.0 - w.param);
      prefac = std::pow(2.0 * M_PI, -double(dv) * (1.0 - w.param));
      rho_pow = 0.0;
    }
    const int q = grid.quad_order;
    GaussHermite gh(q);
    const Eigen::VectorXd scaled = gh.nodes / std::sqrt(gamma);
    const Eigen::MatrixXd H = hermite_values(scaled, ge.n_v);
    int V = 1;
    for (int j = 0; j < dv; ++j) V *= q;
    Eigen::MatrixXd Be(V, nhe);
    Eigen::VectorXd vw(V), chiv(V);
    const double jac = std::pow(gamma, -0.5 * dv) * std::pow(2.0 * M_PI, 0.5 * dv);
    std::array<int, 3> idx{0, 0, 0};
    for (int n = 0; n < V; ++n) {
      int rem = n;
      double wgt = 1.0, s = 0.0;
      for (int j = dv - 1; j >= 0; --j) {
        idx[j] = rem % q;
        rem /= q;
        wgt *= gh.weights[idx[j]];
        s += scaled[idx[j]] * scaled[idx[j]];
      }
      vw[n] = prefac * jac * wgt * std::pow(1.0 + s, 0.5 * rho_pow);
      chiv[n] = chi_cutoff(std::sqrt(s) / R);
      for (int h = 0; h < nhe; ++h) {
        const auto& al = ehb.multi(h);
        double bb = 1.0;
        for (int j = 0; j < dv; ++j) bb *= H(idx[j], al[j]);
        Be(n, h) = bb;
      }
    }
    const Eigen::MatrixXd Bband = Be * inj.real();
    const Eigen::MatrixXd F_L0 =
        (Bband.transpose() * vw.asDiagonal() * Be * Mcols.real()).eval();
    const Eigen::MatrixXd F_A =
        M * (Bband.transpose() * (vw.cwiseProduct(chiv)).asDiagonal() * Bband).eval();
    Eigen::MatrixXd S = F_L0 - F_A;
    S = 0.5 * (S + S.transpose()).eval();
    const Eigen::MatrixXd W = velocity_gram(gv, w);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(S, W);
    rep.rayleigh_max = es.eigenvalues().maxCoeff();
    rep.rayleigh_pass = rep.rayleigh_max <= a + 1e-8;
  }

  // --- finite-difference decay probe in L^p(m) on the full grid.
  {
    const auto L = std::make_shared<Layout>(grid);
    const SplitBundle sb = assemble_splitting(L, B, M, R);
    const double rho = offdiagonal_radius_estimate(sb.B);
    const double delta = std::min(1e-3, 0.5 / std::max(rho, 1.0));
    const int steps = 4;
    rep.fd_trials = n_trials;
    rep.fd_pass = true;
    RandomStateOptions opt;
    opt.margin = 2;
    opt.hermite_decay = grid.n_v / 3.0;
    for (int t = 0; t < n_trials; ++t) {
      FieldState F0 = random_state(L, Frame::Original, seed + 977 * t, opt);
      const double n0 = norm_lp_m(F0, w, p);
      IntegratorConfig cfg;
      cfg.scheme = IntegratorConfig::Scheme::StrangIMEX;
      cfg.dt = delta / steps;
      cfg.t_end = delta;
      cfg.record_every = steps;
      cfg.record_states = true;
      const TrajectoryRecord tr = evolve(sb.B, F0, cfg, {});
      const double nd = norm_lp_m(tr.states.back(), w, p);
      const double ratio = nd / (std::exp(a * delta) * n0);
      rep.fd_worst = std::max(rep.fd_worst, ratio);
      if (ratio > 1.0 + 1e-6) rep.fd_pass = false;
    }
  }
  return rep;
}

}  // namespace mfp
