#include "mfp/operators.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "mfp/quadrature.hpp"

namespace mfp {

namespace {

using Triplets = std::vector<Eigen::Triplet<Complex>>;

Eigen::SparseMatrix<Complex> from_triplets(std::int64_t dim, Triplets& t) {
  Eigen::SparseMatrix<Complex> m(dim, dim);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

// Velocity-space triplet emitter for v_j d/dv_i (i may equal j only in tests;
// the magnetic assembly uses i != j, which maps the degree band into itself).
void emit_vj_di(const HermiteBasis& hb, int j, int i, Complex scale,
                std::vector<Eigen::Triplet<Complex>>& out) {
  for (int a = 0; a < hb.size(); ++a) {
    const auto& al = hb.multi(a);
    if (al[i] == 0) continue;
    const double low = std::sqrt(double(al[i]));
    auto g = al;
    g[i] -= 1;
    // v_j on h_g: up and down
    auto up = g;
    up[j] += 1;
    const int iu = hb.index(up);
    if (iu >= 0) out.emplace_back(iu, a, scale * (low * std::sqrt(double(g[j] + 1))));
    if (g[j] >= 1) {
      auto dn = g;
      dn[j] -= 1;
      out.emplace_back(hb.index(dn), a, scale * (low * std::sqrt(double(g[j]))));
    }
  }
}

// Tensor a velocity-space triplet list with the identity in x.
void tensor_identity_x(const Layout& L, const Triplets& vel, Triplets& out) {
  const int nh = L.n_hermite();
  for (int xi = 0; xi < L.n_fourier(); ++xi) {
    const std::int64_t off = L.flat(xi, 0);
    for (const auto& t : vel) out.emplace_back(off + t.row(), off + t.col(), t.value());
  }
  (void)nh;
}

// Tensor a velocity-space triplet list with convolution by the given Fourier
// modes in x: block (xi, xi') gets amp for xi - xi' = mode frequency.
void tensor_convolution_x(const Layout& L, const std::vector<FourierMode>& modes,
                          const Triplets& vel, Triplets& out) {
  const auto& fr = L.fourier();
  const int nh = L.n_hermite();
  for (const auto& m : modes) {
    if (std::abs(m.amp) == 0.0) continue;
    for (int xic = 0; xic < fr.size(); ++xic) {
      auto f = fr.freq(xic);
      for (int j = 0; j < fr.d_x(); ++j) f[j] += m.xi[j];
      const int xir = fr.index(f);
      if (xir < 0) continue;  // Galerkin truncation in x (Hermitian-symmetric)
      const std::int64_t ro = std::int64_t(xir) * nh, co = std::int64_t(xic) * nh;
      for (const auto& t : vel) out.emplace_back(ro + t.row(), co + t.col(), m.amp * t.value());
    }
  }
}

LinearOperatorRep make_rep(const std::shared_ptr<const Layout>& L, Triplets& t, Frame frame,
                           Symmetry sym, std::string label) {
  LinearOperatorRep r;
  r.layout = L;
  r.frame = frame;
  r.mat = from_triplets(L->dim(), t);
  r.symmetry = sym;
  r.label = std::move(label);
  return r;
}

// Velocity rotation generator sum_{ij} eps_{ijk} v_j d_i for component k
// (d_v = 3), or v_2 d_1 - v_1 d_2 for the scalar d_v = 2 case.
Triplets rotation_velocity_triplets(const HermiteBasis& hb, int k) {
  Triplets vel;
  if (hb.d_v() == 2) {
    emit_vj_di(hb, 1, 0, Complex(1, 0), vel);
    emit_vj_di(hb, 0, 1, Complex(-1, 0), vel);
    return vel;
  }
  static const int eps[3][3][3] = {{{0, 0, 0}, {0, 0, 1}, {0, -1, 0}},
                                   {{0, 0, -1}, {0, 0, 0}, {1, 0, 0}},
                                   {{0, 1, 0}, {-1, 0, 0}, {0, 0, 0}}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (eps[i][j][k] != 0) emit_vj_di(hb, j, i, Complex(eps[i][j][k], 0), vel);
  return vel;
}

LinearOperatorRep assemble_magnetic_from_modes(const std::shared_ptr<const Layout>& L,
                                               const std::array<std::vector<FourierMode>, 3>& modes,
                                               int n_comp, const std::string& label) {
  Triplets out;
  for (int k = 0; k < n_comp; ++k) {
    Triplets vel = rotation_velocity_triplets(L->hermite(), k);
    tensor_convolution_x(*L, modes[k], vel, out);
  }
  return make_rep(L, out, Frame::Perturbation, Symmetry::SkewAdjoint, label);
}

}  // namespace

FieldState LinearOperatorRep::apply(const FieldState& f) const {
  if (!(f.grid() == layout->grid()))
    throw std::invalid_argument("operator " + label + ": grid mismatch");
  if (f.frame != frame)
    throw std::invalid_argument("operator " + label + ": frame mismatch (state is " +
                                frame_name(f.frame) + ", operator acts on " + frame_name(frame) +
                                ")");
  FieldState out = f;
  out.coeffs = mat * f.coeffs;
  return out;
}

double LinearOperatorRep::symmetry_residual() const {
  if (symmetry == Symmetry::None) return 0.0;
  const double sign = symmetry == Symmetry::SkewAdjoint ? 1.0 : -1.0;
  Eigen::SparseMatrix<Complex> r = mat + sign * Eigen::SparseMatrix<Complex>(mat.adjoint());
  double worst = 0;
  for (int k = 0; k < r.outerSize(); ++k)
    for (Eigen::SparseMatrix<Complex>::InnerIterator it(r, k); it; ++it)
      worst = std::max(worst, std::abs(it.value()));
  return worst;
}

LinearOperatorRep assemble_dv(const std::shared_ptr<const Layout>& L, int j) {
  const auto& hb = L->hermite();
  Triplets vel;
  for (int a = 0; a < hb.size(); ++a) {
    const auto& al = hb.multi(a);
    if (al[j] == 0) continue;
    auto g = al;
    g[j] -= 1;
    vel.emplace_back(hb.index(g), a, Complex(std::sqrt(double(al[j])), 0));
  }
  Triplets out;
  tensor_identity_x(*L, vel, out);
  return make_rep(L, out, Frame::Perturbation, Symmetry::None, "d/dv_" + std::to_string(j + 1));
}

LinearOperatorRep assemble_vmult(const std::shared_ptr<const Layout>& L, int j) {
  const auto& hb = L->hermite();
  Triplets vel;
  for (int a = 0; a < hb.size(); ++a) {
    const auto& al = hb.multi(a);
    auto up = al;
    up[j] += 1;
    const int iu = hb.index(up);
    if (iu >= 0) vel.emplace_back(iu, a, Complex(std::sqrt(double(al[j] + 1)), 0));
    if (al[j] >= 1) {
      auto dn = al;
      dn[j] -= 1;
      vel.emplace_back(hb.index(dn), a, Complex(std::sqrt(double(al[j])), 0));
    }
  }
  Triplets out;
  tensor_identity_x(*L, vel, out);
  return make_rep(L, out, Frame::Perturbation, Symmetry::SelfAdjoint, "v_" + std::to_string(j + 1));
}

LinearOperatorRep assemble_dx(const std::shared_ptr<const Layout>& L, int j) {
  Triplets out;
  const auto& fr = L->fourier();
  for (int xi = 0; xi < fr.size(); ++xi) {
    const auto f = fr.freq(xi);
    if (f[j] == 0) continue;
    const Complex v(0, f[j]);
    for (int h = 0; h < L->n_hermite(); ++h) {
      const auto idx = L->flat(xi, h);
      out.emplace_back(idx, idx, v);
    }
  }
  return make_rep(L, out, Frame::Perturbation, Symmetry::SkewAdjoint, "d/dx_" + std::to_string(j + 1));
}

LinearOperatorRep assemble_collision(const std::shared_ptr<const Layout>& L) {
  Triplets out;
  const auto& hb = L->hermite();
  for (int xi = 0; xi < L->n_fourier(); ++xi)
    for (int h = 0; h < hb.size(); ++h) {
      if (hb.degree(h) == 0) continue;
      const auto idx = L->flat(xi, h);
      out.emplace_back(idx, idx, Complex(hb.degree(h), 0));
    }
  return make_rep(L, out, Frame::Perturbation, Symmetry::SelfAdjoint, "L");
}

LinearOperatorRep assemble_transport(const std::shared_ptr<const Layout>& L) {
  const auto& hb = L->hermite();
  const auto& fr = L->fourier();
  const int dv = hb.d_v();
  const int dx = fr.d_x();
  Triplets out;
  // v . grad_x couples only axes present in both spaces
  for (int j = 0; j < std::min(dv, dx); ++j) {
    Triplets vel;  // v_j multiplication
    for (int a = 0; a < hb.size(); ++a) {
      const auto& al = hb.multi(a);
      auto up = al;
      up[j] += 1;
      const int iu = hb.index(up);
      if (iu >= 0) vel.emplace_back(iu, a, Complex(std::sqrt(double(al[j] + 1)), 0));
      if (al[j] >= 1) {
        auto dn = al;
        dn[j] -= 1;
        vel.emplace_back(hb.index(dn), a, Complex(std::sqrt(double(al[j])), 0));
      }
    }
    for (int xi = 0; xi < fr.size(); ++xi) {
      const auto f = fr.freq(xi);
      if (f[j] == 0) continue;
      const Complex scale(0, f[j]);
      const std::int64_t off = L->flat(xi, 0);
      for (const auto& t : vel) out.emplace_back(off + t.row(), off + t.col(), scale * t.value());
    }
  }
  return make_rep(L, out, Frame::Perturbation, Symmetry::SkewAdjoint, "v.grad_x");
}

LinearOperatorRep assemble_magnetic(const std::shared_ptr<const Layout>& L,
                                    const MagneticField& B) {
  if (B.d_v() != L->grid().d_v)
    throw std::invalid_argument("magnetic: field d_v does not match grid d_v");
  if (B.band() > L->fourier().half())
    throw std::domain_error("magnetic: field has Fourier modes outside the grid band");
  std::array<std::vector<FourierMode>, 3> modes;
  for (int c = 0; c < B.n_components(); ++c) modes[c] = B.modes(c);
  return assemble_magnetic_from_modes(L, modes, B.n_components(), "(v^B).grad_v");
}

LinearOperatorRep assemble_generator(const std::shared_ptr<const Layout>& L,
                                     const MagneticField& B, Frame frame) {
  LinearOperatorRep T = assemble_transport(L);
  LinearOperatorRep G = assemble_magnetic(L, B);
  LinearOperatorRep C = assemble_collision(L);
  LinearOperatorRep r;
  r.layout = L;
  r.frame = frame;
  r.mat = -T.mat + G.mat - C.mat;
  r.mat.makeCompressed();
  r.symmetry = Symmetry::None;
  r.label = frame == Frame::Original ? "-P0" : (frame == Frame::Flat ? "-P1/2" : "-P1");
  return r;
}

LinearOperatorRep commutator(const LinearOperatorRep& P, const LinearOperatorRep& Q) {
  if (!(P.layout->grid() == Q.layout->grid()))
    throw std::invalid_argument("commutator: grid mismatch");
  if (P.frame != Q.frame) throw std::invalid_argument("commutator: frame mismatch");
  LinearOperatorRep r;
  r.layout = P.layout;
  r.frame = P.frame;
  r.mat = (P.mat * Q.mat - Q.mat * P.mat).pruned();
  r.symmetry = Symmetry::None;
  r.label = "[" + P.label + ", " + Q.label + "]";
  return r;
}

LinearOperatorRep magnetic_commutator_v_rhs(const std::shared_ptr<const Layout>& L,
                                            const MagneticField& B, int i) {
  Triplets out;
  const auto& hb = L->hermite();
  if (L->grid().d_v == 3) {
    // (B ^ grad_v)_i = sum_{jk} eps_{ijk} B_j d_k
    static const int eps[3][3][3] = {{{0, 0, 0}, {0, 0, 1}, {0, -1, 0}},
                                     {{0, 0, -1}, {0, 0, 0}, {1, 0, 0}},
                                     {{0, 1, 0}, {-1, 0, 0}, {0, 0, 0}}};
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) {
        if (eps[i][j][k] == 0) continue;
        Triplets vel;
        for (int a = 0; a < hb.size(); ++a) {
          const auto& al = hb.multi(a);
          if (al[k] == 0) continue;
          auto g = al;
          g[k] -= 1;
          vel.emplace_back(hb.index(g), a, Complex(eps[i][j][k] * std::sqrt(double(al[k])), 0));
        }
        tensor_convolution_x(*L, B.modes(j), vel, out);
      }
  } else {
    // [d_{v_1}, G] = -b d_{v_2} ; [d_{v_2}, G] = +b d_{v_1}
    const int k = i == 0 ? 1 : 0;
    const double sign = i == 0 ? -1.0 : 1.0;
    Triplets vel;
    for (int a = 0; a < hb.size(); ++a) {
      const auto& al = hb.multi(a);
      if (al[k] == 0) continue;
      auto g = al;
      g[k] -= 1;
      vel.emplace_back(hb.index(g), a, Complex(sign * std::sqrt(double(al[k])), 0));
    }
    tensor_convolution_x(*L, B.modes(0), vel, out);
  }
  return make_rep(L, out, Frame::Perturbation, Symmetry::None, "(B^grad_v)_" + std::to_string(i + 1));
}

LinearOperatorRep magnetic_commutator_x_rhs(const std::shared_ptr<const Layout>& L,
                                            const MagneticField& B, int i) {
  // (v ^ d_{x_i} B).grad_v : same rotation structure with differentiated modes
  std::array<std::vector<FourierMode>, 3> dmodes;
  for (int c = 0; c < B.n_components(); ++c) {
    for (const auto& m : B.modes(c)) {
      dmodes[c].push_back({m.xi, Complex(0, m.xi[i]) * m.amp});
    }
  }
  return assemble_magnetic_from_modes(L, dmodes, B.n_components(),
                                      "(v^dB/dx_" + std::to_string(i + 1) + ").grad_v");
}

double chi_cutoff(double r) {
  if (r <= 1.0) return 1.0;
  if (r >= 2.0) return 0.0;
  const double t = r - 1.0;
  return 1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

LinearOperatorRep assemble_cutoff_multiplier(const std::shared_ptr<const Layout>& L, double M,
                                             double R) {
  const auto& hb = L->hermite();
  const int dv = hb.d_v();
  const int q = std::max(L->grid().quad_order, hb.n_v() + 8);
  GaussHermite gh(q);
  const Eigen::MatrixXd H = hermite_values(gh.nodes, hb.n_v());

  int V = 1;
  for (int j = 0; j < dv; ++j) V *= q;
  Eigen::MatrixXd Bv(V, hb.size());
  Eigen::VectorXd w(V);
  std::array<int, 3> idx{0, 0, 0};
  for (int n = 0; n < V; ++n) {
    int rem = n;
    double wgt = 1.0, s = 0.0;
    for (int j = dv - 1; j >= 0; --j) {
      idx[j] = rem % q;
      rem /= q;
      wgt *= gh.weights[idx[j]];
      s += gh.nodes[idx[j]] * gh.nodes[idx[j]];
    }
    w[n] = wgt * M * chi_cutoff(std::sqrt(s) / R);
    for (int h = 0; h < hb.size(); ++h) {
      const auto& a = hb.multi(h);
      double b = 1.0;
      for (int j = 0; j < dv; ++j) b *= H(idx[j], a[j]);
      Bv(n, h) = b;
    }
  }
  Eigen::MatrixXd Av = Bv.transpose() * w.asDiagonal() * Bv;
  Av = 0.5 * (Av + Av.transpose());

  Triplets vel;
  for (int r = 0; r < Av.rows(); ++r)
    for (int c = 0; c < Av.cols(); ++c)
      if (std::abs(Av(r, c)) > 1e-15) vel.emplace_back(r, c, Complex(Av(r, c), 0));
  Triplets out;
  tensor_identity_x(*L, vel, out);
  return make_rep(L, out, Frame::Original, Symmetry::SelfAdjoint, "M chi_R");
}

SplitBundle assemble_splitting(const std::shared_ptr<const Layout>& L, const MagneticField& B,
                               double M, double R) {
  // M = 0 is the degenerate splitting (A = 0, B = L0), used by diagnostics
  if (!(M >= 0.0) || !(R > 1.0))
    throw std::invalid_argument("splitting: require M >= 0 and R > 1");
  SplitBundle sb;
  sb.L0 = assemble_generator(L, B, Frame::Original);
  sb.A = assemble_cutoff_multiplier(L, M, R);
  sb.B = sb.L0;
  sb.B.mat = (sb.L0.mat - sb.A.mat).pruned();
  sb.B.symmetry = Symmetry::None;
  sb.B.label = "B = L0 - M chi_R";
  sb.M = M;
  sb.R = R;
  return sb;
}

double psi_value(const Weight& w, double p, double s, bool printed_sign) {
  const double drift = w.grad_factor_s(s) * s;  // v.grad m / m
  const double div_term = (1.0 - 1.0 / p) * w.d_v;
  const double base = (p - 1.0) * w.grad_sq_over_m2_s(s) + w.laplacian_over_m_s(s) + div_term;
  return printed_sign ? base + drift : base - drift;
}

double psi_value_field(const Weight& w, double p, const std::array<double, 3>& v,
                       const std::array<double, 3>& B_at_x, bool printed_sign) {
  double s = 0;
  for (int j = 0; j < w.d_v; ++j) s += v[j] * v[j];
  // K = v + v ^ B, evaluated explicitly so the B-independence is a real check
  std::array<double, 3> K{0, 0, 0};
  if (w.d_v == 3) {
    K = {v[0] + v[1] * B_at_x[2] - v[2] * B_at_x[1], v[1] + v[2] * B_at_x[0] - v[0] * B_at_x[2],
         v[2] + v[0] * B_at_x[1] - v[1] * B_at_x[0]};
  } else {
    K = {v[0] + B_at_x[0] * v[1], v[1] - B_at_x[0] * v[0], 0};
  }
  const double c = w.grad_factor_s(s);
  double drift = 0;
  for (int j = 0; j < w.d_v; ++j) drift += K[j] * c * v[j];
  const double div_term = (1.0 - 1.0 / p) * w.d_v;  // div_v (v ^ B) = 0
  const double base = (p - 1.0) * w.grad_sq_over_m2_s(s) + w.laplacian_over_m_s(s) + div_term;
  return printed_sign ? base + drift : base - drift;
}

namespace {

double psi_limsup(const Weight& w, double p) {
  if (w.polynomial()) return w.d_v * (1.0 - 1.0 / p) - w.param;
  const double coef = w.param * (p * w.param - 1.0);
  if (coef > 0) return std::numeric_limits<double>::infinity();
  if (coef < 0) return -std::numeric_limits<double>::infinity();
  return w.d_v * (w.param + 1.0 - 1.0 / p);
}

// Psi(s) <= a_mp + c_tail / (1 + s) for polynomial weights.
double psi_tail_coefficient(const Weight& w, double p) {
  const double k = w.param;
  return k * k * (p - 1.0) + std::max(k * (k - 2.0), 0.0) + k * (w.d_v + 1.0);
}

}  // namespace

LyapunovReport psi_lyapunov(const Weight& w, double p, const GridConfig& grid, bool printed_sign) {
  if (w.d_v != grid.d_v) throw std::invalid_argument("psi: weight d_v mismatch");
  LyapunovReport rep;
  rep.weight = w;
  rep.p = p;
  rep.corrected_sign = !printed_sign;
  rep.a_mp = psi_limsup(w, p);
  rep.wp_holds = rep.a_mp < 0.0;

  GaussHermite gh(grid.quad_order);
  double sup = -std::numeric_limits<double>::infinity();
  // radial values attained on the tensor quadrature grid: all node-radius
  // combinations per axis
  std::vector<double> axis2(grid.quad_order);
  for (int i = 0; i < grid.quad_order; ++i) axis2[i] = gh.nodes[i] * gh.nodes[i];
  std::function<void(int, double)> rec = [&](int axis, double s) {
    if (axis == grid.d_v) {
      sup = std::max(sup, psi_value(w, p, s, printed_sign));
      return;
    }
    for (double a2 : axis2) rec(axis + 1, s + a2);
  };
  rec(0, 0.0);
  rep.psi_sup = sup;
  rep.psi_sup_outside = sup;  // no cutoff applied yet
  return rep;
}

SplitParams split_search(const Weight& w, double p, double a_target) {
  SplitParams sp;
  const double a_mp = psi_limsup(w, p);
  if (!(a_target > a_mp)) {
    sp.ok = false;
    sp.note = "target a <= a_{m,p}: the drift limit cannot be dominated at infinity";
    return sp;
  }

  // doubling search for R such that Psi <= a on |v| >= R, confirmed on a
  // dense scan of [R, 4R] plus the analytic tail bound beyond
  double Racc = 2.0;
  for (;; Racc *= 2.0) {
    bool ok = true;
    if (w.polynomial())
      ok = a_mp + psi_tail_coefficient(w, p) / (1.0 + Racc * Racc) <= a_target;
    else
      ok = psi_value(w, p, Racc * Racc) <= a_target &&
           psi_value(w, p, 4.0 * Racc * Racc) <= psi_value(w, p, Racc * Racc);
    for (int i = 0; ok && i <= 2000; ++i) {
      const double r = Racc + 3.0 * Racc * i / 2000.0;
      ok = psi_value(w, p, r * r) <= a_target;
    }
    if (ok) break;
    if (Racc > 1e6) {
      sp.ok = false;
      sp.note = "R search diverged (tail of Psi does not settle below a)";
      return sp;
    }
  }

  double sup_inside = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 4000; ++i) {
    const double r = Racc * i / 4000.0;
    sup_inside = std::max(sup_inside, psi_value(w, p, r * r));
  }
  double M = 1.1 * std::max(sup_inside - a_target, 0.0) + 1e-6;
  M = std::max(M, 1.0 + 1e-6);

  // certify on a dense grid over [0, 3R] plus the analytic tail
  double cert = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 12000; ++i) {
    const double r = 3.0 * Racc * i / 12000.0;
    cert = std::max(cert, psi_value(w, p, r * r) - M * chi_cutoff(r / Racc));
  }
  if (w.polynomial())
    cert = std::max(cert, a_mp + psi_tail_coefficient(w, p) / (1.0 + 9.0 * Racc * Racc));
  sp.M = M;
  sp.R = Racc;
  sp.sup_certified = cert;
  sp.ok = cert <= a_target + 1e-12;
  if (!sp.ok) sp.note = "certificate failed after M,R selection";
  return sp;
}

double ALedger::max_all() const {
  double m = a_m1[0];
  for (double v : a_m1) m = std::max(m, v);
  for (double v : a_m2) m = std::max(m, v);
  return m;
}

ALedger a_ledger(const Weight& w, const MagneticField& B, double p) {
  if (!w.polynomial()) throw std::invalid_argument("a_ledger: polynomial weight required");
  const double k = w.param;
  const double nb = B.sup_norm();
  const double ng = B.grad_sup_norm();
  ALedger l;
  l.a_m1 = {-k - 1.0, -k + 3.5 + nb, -k + 0.5};
  l.a_m2 = {1.5 - k - 1.0 + 0.5 * ng, 1.5 - k + 3.5 + nb, 1.5 - k + 1.0};
  l.hyp5 = k > 3.5 + nb;
  l.hyp6 = k > 5.0 + std::max(nb, 0.5 * ng);
  l.hyp2 = k > 3.0 * (1.0 - 1.0 / p) + 3.5 + std::max(nb, 0.5 * ng);
  return l;
}

double nonpositivity_check(const FieldState& g, double p) {
  if (p < 1.0) throw std::invalid_argument("nonpositivity_check: p must be >= 1");
  const FieldState flat = convert_frame(g, Frame::Flat);
  const Layout& L = *flat.layout;
  GridConfig eg = L.grid();
  eg.n_v += 2;
  const auto ext = std::make_shared<Layout>(eg);
  const auto& ehb = ext->hermite();
  const int dv = eg.d_v;

  // inject coefficients into the extended band
  Eigen::VectorXcd gc = Eigen::VectorXcd::Zero(ext->dim());
  for (int xi = 0; xi < L.n_fourier(); ++xi)
    for (int h = 0; h < L.n_hermite(); ++h)
      gc[ext->flat(xi, ehb.index(L.hermite().multi(h)))] = flat.at(xi, h);

  // flat-frame d/dv_j = (b_j - b_j^+)/2 on the Hermite-function basis
  std::vector<Eigen::SparseMatrix<Complex>> Dj(dv);
  for (int j = 0; j < dv; ++j) {
    Triplets vel;
    for (int a = 0; a < ehb.size(); ++a) {
      const auto& al = ehb.multi(a);
      if (al[j] >= 1) {
        auto dn = al;
        dn[j] -= 1;
        vel.emplace_back(ehb.index(dn), a, Complex(0.5 * std::sqrt(double(al[j])), 0));
      }
      auto up = al;
      up[j] += 1;
      const int iu = ehb.index(up);
      if (iu >= 0) vel.emplace_back(iu, a, Complex(-0.5 * std::sqrt(double(al[j] + 1)), 0));
    }
    Triplets out;
    tensor_identity_x(*ext, vel, out);
    Dj[j] = from_triplets(ext->dim(), out);
  }
  Eigen::VectorXcd lap = Eigen::VectorXcd::Zero(ext->dim());
  for (int j = 0; j < dv; ++j) lap += Dj[j] * (Dj[j] * gc);

  // quadrature of mu^{p/2} |P|^{p-2} P Q over x and v, P = g/sqrt(mu)
  const double gamma = 0.5 * p;
  const int q = eg.quad_order;
  GaussHermite gh(q);
  const Eigen::VectorXd scaled = gh.nodes / std::sqrt(gamma);
  const Eigen::MatrixXd H = hermite_values(scaled, ehb.n_v());
  int V = 1;
  for (int j = 0; j < dv; ++j) V *= q;
  Eigen::MatrixXd Bv(V, ehb.size());
  Eigen::VectorXd vw(V);
  const double jac = std::pow(gamma, -0.5 * dv) * std::pow(2.0 * M_PI, 0.5 * dv) *
                     std::pow(2.0 * M_PI, -0.25 * dv * p);
  std::array<int, 3> idx{0, 0, 0};
  for (int n = 0; n < V; ++n) {
    int rem = n;
    double wgt = 1.0;
    for (int j = dv - 1; j >= 0; --j) {
      idx[j] = rem % q;
      rem /= q;
      wgt *= gh.weights[idx[j]];
    }
    vw[n] = jac * wgt;
    for (int h = 0; h < ehb.size(); ++h) {
      const auto& a = ehb.multi(h);
      double b = 1.0;
      for (int j = 0; j < dv; ++j) b *= H(idx[j], a[j]);
      Bv(n, h) = b;
    }
  }
  const int nx = ext->n_fourier();
  Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> Gc(
      gc.data(), nx, ehb.size());
  Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> Qc(
      lap.data(), nx, ehb.size());
  const Eigen::MatrixXcd Gn = Gc * Bv.transpose().cast<Complex>();  // n_x x V
  const Eigen::MatrixXcd Qn = Qc * Bv.transpose().cast<Complex>();

  const auto& fr = ext->fourier();
  const int d_x = fr.d_x();
  const int nqx = 2 * fr.n_x() + 1;
  int NX = 1;
  for (int j = 0; j < d_x; ++j) NX *= nqx;
  double total = 0.0;
  std::array<int, 3> mi{0, 0, 0};
  for (int mflat = 0; mflat < NX; ++mflat) {
    int rem = mflat;
    for (int j = d_x - 1; j >= 0; --j) {
      mi[j] = rem % nqx;
      rem /= nqx;
    }
    Eigen::VectorXcd phase(nx);
    for (int xi = 0; xi < nx; ++xi) {
      const auto f = fr.freq(xi);
      double ph = 0;
      for (int j = 0; j < d_x; ++j) ph += 2.0 * M_PI * mi[j] * f[j] / nqx;
      phase[xi] = std::polar(1.0, ph);
    }
    for (int n = 0; n < V; ++n) {
      const double P = (phase.transpose() * Gn.col(n))(0, 0).real();
      const double Q = (phase.transpose() * Qn.col(n))(0, 0).real();
      if (P == 0.0) continue;
      const double mag = std::abs(P);
      total += vw[n] / NX * (P > 0 ? 1.0 : -1.0) * std::pow(mag, p - 1.0) * Q;
    }
  }
  return total;
}

Eigen::MatrixXd velocity_gram(const GridConfig& grid, const Weight& w, int extra_bracket) {
  HermiteBasis hb(grid.d_v, grid.n_v);
  const int dv = grid.d_v;
  double gamma, prefac, rho;
  if (w.polynomial()) {
    gamma = 2.0;
    prefac = std::pow(2.0 * M_PI, -double(dv));
    rho = 2.0 * (w.param + extra_bracket);
  } else {
    gamma = 2.0 * (1.0 - w.param);
    prefac = std::pow(2.0 * M_PI, -double(dv) * (1.0 - w.param));
    rho = 2.0 * extra_bracket;
  }
  if (!(gamma > 1e-12)) throw std::overflow_error("velocity_gram: non-integrable weight");
  const int q = grid.quad_order;
  GaussHermite gh(q);
  const Eigen::VectorXd scaled = gh.nodes / std::sqrt(gamma);
  const Eigen::MatrixXd H = hermite_values(scaled, grid.n_v);
  int V = 1;
  for (int j = 0; j < dv; ++j) V *= q;
  Eigen::MatrixXd Bv(V, hb.size());
  Eigen::VectorXd vw(V);
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
    vw[n] = prefac * jac * wgt * std::pow(1.0 + s, 0.5 * rho);
    for (int h = 0; h < hb.size(); ++h) {
      const auto& a = hb.multi(h);
      double b = 1.0;
      for (int j = 0; j < dv; ++j) b *= H(idx[j], a[j]);
      Bv(n, h) = b;
    }
  }
  Eigen::MatrixXd G = Bv.transpose() * vw.asDiagonal() * Bv;
  return 0.5 * (G + G.transpose());
}

double weighted_inner_original(const FieldState& a, const FieldState& b, const Weight& w) {
  const FieldState A = convert_frame(a, Frame::Original);
  const FieldState B = convert_frame(b, Frame::Original);
  const Layout& L = *A.layout;
  const Eigen::MatrixXd W = velocity_gram(L.grid(), w);
  const int nh = L.n_hermite();
  double total = 0;
  for (int xi = 0; xi < L.n_fourier(); ++xi) {
    Eigen::VectorXcd av(nh), bv(nh);
    for (int h = 0; h < nh; ++h) {
      av[h] = A.at(xi, h);
      bv[h] = B.at(xi, h);
    }
    total += (av.transpose() * W.cast<Complex>() * bv.conjugate())(0, 0).real();
  }
  return total;
}

}  // namespace mfp
