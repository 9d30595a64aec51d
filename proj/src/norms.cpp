#include "mfp/norms.hpp"

#include <cmath>
#include <stdexcept>

#include "mfp/quadrature.hpp"

namespace mfp {

namespace {

// Tensor-product Hermite basis values at the scaled velocity nodes:
// B(node, h) = prod_j h_{alpha_j}(v_node_j), node ranging over q^{d_v} points,
// v = u / sqrt(gamma) with u the standard Gauss-Hermite nodes.
struct VelocityNodes {
  Eigen::MatrixXd basis;    // V x n_hermite
  Eigen::VectorXd weight;   // V, products of GH weights (sums to 1)
  Eigen::VectorXd s;        // V, |v|^2 at the scaled nodes
  int V = 0;
};

VelocityNodes velocity_nodes(const Layout& L, double gamma) {
  const auto& hb = L.hermite();
  const int q = L.grid().quad_order;
  const int dv = hb.d_v();
  GaussHermite gh(q);
  const Eigen::VectorXd scaled = gh.nodes / std::sqrt(gamma);
  const Eigen::MatrixXd H = hermite_values(scaled, hb.n_v());

  VelocityNodes vn;
  vn.V = 1;
  for (int j = 0; j < dv; ++j) vn.V *= q;
  vn.basis.resize(vn.V, hb.size());
  vn.weight.resize(vn.V);
  vn.s.resize(vn.V);
  std::array<int, 3> idx{0, 0, 0};
  for (int n = 0; n < vn.V; ++n) {
    int rem = n;
    double wgt = 1.0, s = 0.0;
    for (int j = dv - 1; j >= 0; --j) {
      idx[j] = rem % q;
      rem /= q;
      wgt *= gh.weights[idx[j]];
      s += scaled[idx[j]] * scaled[idx[j]];
    }
    vn.weight[n] = wgt;
    vn.s[n] = s;
    for (int h = 0; h < hb.size(); ++h) {
      const auto& a = hb.multi(h);
      double b = 1.0;
      for (int j = 0; j < dv; ++j) b *= H(idx[j], a[j]);
      vn.basis(n, h) = b;
    }
  }
  return vn;
}

struct WeightSplit {
  double gamma;    // e^{-gamma |v|^2 / 2} factor of mu^p m^p
  double prefac;   // constant in front
  double rho_pow;  // <v>^rho_pow residual weight (k p + extra p, or extra p)
};

WeightSplit split_weight(const Weight& w, double p, int extra_bracket, int d_v) {
  WeightSplit ws;
  if (w.polynomial()) {
    ws.gamma = p;
    ws.prefac = std::pow(2.0 * M_PI, -0.5 * d_v * p);
    ws.rho_pow = (w.param + extra_bracket) * p;
  } else {
    ws.gamma = p * (1.0 - w.param);
    ws.prefac = std::pow(2.0 * M_PI, -0.5 * d_v * p * (1.0 - w.param));
    ws.rho_pow = double(extra_bracket) * p;
  }
  return ws;
}

void check_quadrature(const Layout& L, const Weight& w, double p, int extra_bracket) {
  const auto& g = L.grid();
  if (w.polynomial()) {
    // p = 2 with integer k: integrand is a polynomial of degree
    // 2 n_v + p (k + extra); Gauss-Hermite with q nodes is exact to 2q - 1.
    const double deg = 2.0 * g.n_v + p * (w.param + extra_bracket);
    if (2.0 * g.quad_order - 1.0 < deg)
      throw std::domain_error("norm_lp_m: quad_order " + std::to_string(g.quad_order) +
                              " insufficient for weight " + w.describe());
  }
}

}  // namespace

double weighted_lp_channels(const std::shared_ptr<const Layout>& layout,
                            const std::vector<Eigen::VectorXcd>& channels,
                            const Weight& w, double p, int extra_bracket) {
  const Layout& L = *layout;
  if (p < 1.0 || p > 2.0) throw std::invalid_argument("norm: p must be in [1,2]");
  check_quadrature(L, w, p, extra_bracket);
  const WeightSplit ws = split_weight(w, p, extra_bracket, L.grid().d_v);
  if (!(ws.gamma > 1e-12))
    throw std::overflow_error("norm: |F|^p m^p has non-decaying Gaussian tail (gamma <= 0)");

  const VelocityNodes vn = velocity_nodes(L, ws.gamma);
  const int n_x = L.n_fourier();
  const int n_h = L.n_hermite();

  // per-xi nodal values of each channel: G[c] is n_x x V
  std::vector<Eigen::MatrixXcd> G(channels.size());
  for (size_t c = 0; c < channels.size(); ++c) {
    Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> C(
        channels[c].data(), n_x, n_h);
    G[c] = C * vn.basis.transpose().cast<Complex>();
  }

  // velocity measure per node, including the change of variables
  Eigen::VectorXd vw(vn.V);
  const double jac = std::pow(ws.gamma, -0.5 * L.grid().d_v) *
                     std::pow(2.0 * M_PI, 0.5 * L.grid().d_v);
  for (int n = 0; n < vn.V; ++n) {
    vw[n] = ws.prefac * jac * vn.weight[n] * std::pow(1.0 + vn.s[n], 0.5 * ws.rho_pow);
  }

  double total = 0.0;
  if (p == 2.0) {
    // Parseval in x: integral over x of |g|^2 = sum_xi |g_xi|^2
    for (int n = 0; n < vn.V; ++n) {
      double acc = 0.0;
      for (const auto& Gc : G) acc += Gc.col(n).squaredNorm();
      total += vw[n] * acc;
    }
  } else {
    // uniform torus grid, spectrally accurate for smooth periodic integrands
    const auto& fr = L.fourier();
    const int d_x = fr.d_x();
    const int nq = 2 * fr.n_x() + 1;
    int NX = 1;
    for (int j = 0; j < d_x; ++j) NX *= nq;
    const double xw = 1.0 / NX;
    // per-axis Fourier phase table
    Eigen::MatrixXcd E(nq, fr.n_x());
    for (int m = 0; m < nq; ++m)
      for (int k = 0; k < fr.n_x(); ++k)
        E(m, k) = std::polar(1.0, 2.0 * M_PI * m * (k - fr.half()) / nq);

    std::vector<int> xi_axis(n_x * d_x);
    for (int xi = 0; xi < n_x; ++xi) {
      const auto f = fr.freq(xi);
      for (int j = 0; j < d_x; ++j) xi_axis[xi * d_x + j] = f[j] + fr.half();
    }
    std::array<int, 3> mi{0, 0, 0};
    for (int mflat = 0; mflat < NX; ++mflat) {
      int rem = mflat;
      for (int j = d_x - 1; j >= 0; --j) {
        mi[j] = rem % nq;
        rem /= nq;
      }
      Eigen::VectorXcd phase(n_x);
      for (int xi = 0; xi < n_x; ++xi) {
        Complex ph(1.0, 0.0);
        for (int j = 0; j < d_x; ++j) ph *= E(mi[j], xi_axis[xi * d_x + j]);
        phase[xi] = ph;
      }
      for (int n = 0; n < vn.V; ++n) {
        double mag2 = 0.0;
        for (const auto& Gc : G) {
          const Complex val = (phase.transpose() * Gc.col(n))(0, 0);
          mag2 += std::norm(val);
        }
        total += xw * vw[n] * std::pow(mag2, 0.5 * p);
      }
    }
  }
  return std::pow(total, 1.0 / p);
}

double norm_lp_m(const FieldState& state, const Weight& w, double p) {
  FieldState orig = convert_frame(state, Frame::Original);
  return weighted_lp_channels(orig.layout, {orig.coeffs}, w, p, 0);
}

namespace {

// Extended-band Original-frame coefficient tensors of F, grad_v F / mu and
// grad_x F / mu.  grad_v(mu g) = mu (grad - v) g and (d_j - v_j) h_a =
// -sqrt(a_j + 1) h_{a + e_j}, so the image lives in band n_v + 1.
struct DerivativeTensors {
  std::shared_ptr<const Layout> ext;
  Eigen::VectorXcd F;
  std::vector<Eigen::VectorXcd> grad_v, grad_x;
};

DerivativeTensors derivative_tensors(const FieldState& state) {
  const FieldState orig = convert_frame(state, Frame::Original);
  const Layout& L = *orig.layout;
  GridConfig eg = L.grid();
  eg.n_v += 1;
  DerivativeTensors d;
  d.ext = std::make_shared<Layout>(eg);
  const auto& hb = L.hermite();
  const auto& ehb = d.ext->hermite();
  const int dv = hb.d_v();
  const int nx = L.n_fourier();

  d.F = Eigen::VectorXcd::Zero(d.ext->dim());
  d.grad_v.assign(dv, Eigen::VectorXcd::Zero(d.ext->dim()));
  d.grad_x.assign(L.grid().d_x, Eigen::VectorXcd::Zero(d.ext->dim()));

  for (int xi = 0; xi < nx; ++xi) {
    const auto f = L.fourier().freq(xi);
    for (int h = 0; h < hb.size(); ++h) {
      const Complex c = orig.at(xi, h);
      if (c == Complex(0, 0)) continue;
      const auto& a = hb.multi(h);
      const int eh = ehb.index(a);
      d.F[d.ext->flat(xi, eh)] += c;
      for (int j = 0; j < L.grid().d_x; ++j)
        d.grad_x[j][d.ext->flat(xi, eh)] += Complex(0, f[j]) * c;
      for (int j = 0; j < dv; ++j) {
        auto up = a;
        up[j] += 1;
        d.grad_v[j][d.ext->flat(xi, ehb.index(up))] -= std::sqrt(double(a[j] + 1)) * c;
      }
    }
  }
  return d;
}

}  // namespace

double norm_w1p_m(const FieldState& state, const Weight& w, double p) {
  const DerivativeTensors d = derivative_tensors(state);
  const double a = weighted_lp_channels(d.ext, {d.F}, w, p, 1);
  const double b = weighted_lp_channels(d.ext, d.grad_v, w, p, 0);
  const double c = weighted_lp_channels(d.ext, d.grad_x, w, p, 0);
  return std::pow(std::pow(a, p) + std::pow(b, p) + std::pow(c, p), 1.0 / p);
}

double inner_l2_mu(const FieldState& a, const FieldState& b) {
  if (a.frame != Frame::Perturbation || b.frame != Frame::Perturbation)
    throw std::invalid_argument("inner_l2_mu: states must be in Perturbation frame");
  if (!(a.grid() == b.grid())) throw std::invalid_argument("inner_l2_mu: grid mismatch");
  return a.coeffs.dot(b.coeffs).real();
}

double norm_l2_mu(const FieldState& state) {
  if (state.frame != Frame::Perturbation)
    throw std::invalid_argument("norm_l2_mu: state must be in Perturbation frame");
  return state.coeffs.norm();
}

}  // namespace mfp
