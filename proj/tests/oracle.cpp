#include "oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace oracle {

namespace {

double orthonormal_hermite(int n, double x, double* deriv = nullptr) {
  double pm1 = 0.0, p = 1.0;  // h_{-1}, h_0
  for (int k = 0; k < n; ++k) {
    const double next = (x * p - std::sqrt(double(k)) * pm1) / std::sqrt(double(k + 1));
    pm1 = p;
    p = next;
  }
  if (deriv) *deriv = n > 0 ? std::sqrt(double(n)) * pm1 : 0.0;
  return p;
}

}  // namespace

Rule gauss_hermite(int n) {
  // sign-change bracketing on a dense grid, then bisection + Newton polish
  Rule r;
  const double lim = 2.0 * std::sqrt(double(n)) + 6.0;
  const int grid = 40000;
  double prev_x = -lim, prev_f = orthonormal_hermite(n, -lim);
  for (int i = 1; i <= grid; ++i) {
    const double x = -lim + 2.0 * lim * i / grid;
    const double f = orthonormal_hermite(n, x);
    if (prev_f == 0.0) {
      r.x.push_back(prev_x);
    } else if (prev_f * f < 0.0) {
      double a = prev_x, b = x;
      for (int it = 0; it < 80; ++it) {
        const double m = 0.5 * (a + b);
        const double fm = orthonormal_hermite(n, m);
        if (prev_f * fm <= 0.0) b = m;
        else a = m;
      }
      double root = 0.5 * (a + b);
      for (int it = 0; it < 4; ++it) {
        double d;
        const double f0 = orthonormal_hermite(n, root, &d);
        if (d != 0.0) root -= f0 / d;
      }
      r.x.push_back(root);
    }
    prev_x = x;
    prev_f = f;
  }
  if (static_cast<int>(r.x.size()) != n) throw std::runtime_error("oracle: root count mismatch");
  r.w.resize(n);
  for (int i = 0; i < n; ++i) {
    double s = 0;
    for (int k = 0; k < n; ++k) {
      const double hk = orthonormal_hermite(k, r.x[i]);
      s += hk * hk;
    }
    r.w[i] = 1.0 / s;
  }
  return r;
}

HermiteEval hermite_at(double x, int nmax) {
  HermiteEval e;
  e.val.resize(nmax + 1);
  e.d1.resize(nmax + 1);
  e.d2.resize(nmax + 1);
  for (int n = 0; n <= nmax; ++n) {
    e.val[n] = orthonormal_hermite(n, x);
    e.d1[n] = n > 0 ? std::sqrt(double(n)) * orthonormal_hermite(n - 1, x) : 0.0;
    e.d2[n] = n > 1 ? std::sqrt(double(n) * (n - 1)) * orthonormal_hermite(n - 2, x) : 0.0;
  }
  return e;
}

namespace {

double maxwellian(const std::array<double, 3>& v, int d_v) {
  double s = 0;
  for (int j = 0; j < d_v; ++j) s += v[j] * v[j];
  return std::pow(2.0 * M_PI, -0.5 * d_v) * std::exp(-0.5 * s);
}

mfp::Complex eval_g(const mfp::FieldState& s, const std::array<double, 3>& x,
                    const std::array<double, 3>& v) {
  const auto& L = *s.layout;
  const auto& g = s.grid();
  std::array<HermiteEval, 3> he;
  for (int j = 0; j < g.d_v; ++j) he[j] = hermite_at(v[j], g.n_v);
  mfp::Complex total(0, 0);
  for (int xi = 0; xi < L.n_fourier(); ++xi) {
    const auto f = L.fourier().freq(xi);
    double phase = 0;
    for (int j = 0; j < g.d_x; ++j) phase += f[j] * x[j];
    const mfp::Complex ph = std::polar(1.0, phase);
    mfp::Complex acc(0, 0);
    for (int h = 0; h < L.n_hermite(); ++h) {
      const auto& a = L.hermite().multi(h);
      double b = 1.0;
      for (int j = 0; j < g.d_v; ++j) b *= he[j].val[a[j]];
      acc += s.at(xi, h) * b;
    }
    total += ph * acc;
  }
  return total;
}

}  // namespace

double eval_state(const mfp::FieldState& s, const std::array<double, 3>& x,
                  const std::array<double, 3>& v) {
  const double g = eval_g(s, x, v).real();
  const int dv = s.grid().d_v;
  switch (s.frame) {
    case mfp::Frame::Original: return g * maxwellian(v, dv);
    case mfp::Frame::Flat: return g * std::sqrt(maxwellian(v, dv));
    case mfp::Frame::Perturbation: return g;
  }
  return g;
}

double norm_lp_m(const mfp::FieldState& s, const mfp::Weight& w, double p, int q_order,
                 int x_pts) {
  const mfp::FieldState orig = mfp::convert_frame(s, mfp::Frame::Original);
  const auto& g = orig.grid();
  const Rule gh = gauss_hermite(q_order);
  // quadrature for integral |mu g|^p m^p dv: total Gaussian factor gamma
  const double gamma = w.polynomial() ? p : p * (1.0 - w.param);
  if (!(gamma > 0)) throw std::runtime_error("oracle: non-integrable weight");
  const double pref =
      (w.polynomial() ? std::pow(2.0 * M_PI, -0.5 * g.d_v * p)
                      : std::pow(2.0 * M_PI, -0.5 * g.d_v * p * (1.0 - w.param))) *
      std::pow(gamma, -0.5 * g.d_v) * std::pow(2.0 * M_PI, 0.5 * g.d_v);

  int NV = 1;
  for (int j = 0; j < g.d_v; ++j) NV *= q_order;
  int NX = 1;
  for (int j = 0; j < g.d_x; ++j) NX *= x_pts;

  double total = 0;
  std::array<int, 3> vi{0, 0, 0}, xi{0, 0, 0};
  for (int nv = 0; nv < NV; ++nv) {
    int rem = nv;
    std::array<double, 3> v{0, 0, 0};
    double wv = 1.0, s2 = 0.0;
    for (int j = g.d_v - 1; j >= 0; --j) {
      vi[j] = rem % q_order;
      rem /= q_order;
      v[j] = gh.x[vi[j]] / std::sqrt(gamma);
      wv *= gh.w[vi[j]];
      s2 += v[j] * v[j];
    }
    const double rho = w.polynomial() ? std::pow(1.0 + s2, 0.5 * w.param * p) : 1.0;
    for (int nx = 0; nx < NX; ++nx) {
      int remx = nx;
      std::array<double, 3> x{0, 0, 0};
      for (int j = g.d_x - 1; j >= 0; --j) {
        xi[j] = remx % x_pts;
        remx /= x_pts;
        x[j] = 2.0 * M_PI * xi[j] / x_pts;
      }
      const double gval = eval_g(orig, x, v).real();
      total += pref * wv / NX * std::pow(std::abs(gval), p) * rho;
    }
  }
  return std::pow(total, 1.0 / p);
}

double inner_l2_mu(const mfp::FieldState& a, const mfp::FieldState& b, int q_order, int x_pts) {
  const auto& g = a.grid();
  const Rule gh = gauss_hermite(q_order);
  int NV = 1;
  for (int j = 0; j < g.d_v; ++j) NV *= q_order;
  int NX = 1;
  for (int j = 0; j < g.d_x; ++j) NX *= x_pts;
  double total = 0;
  std::array<int, 3> vi{0, 0, 0}, xidx{0, 0, 0};
  for (int nv = 0; nv < NV; ++nv) {
    int rem = nv;
    std::array<double, 3> v{0, 0, 0};
    double wv = 1.0;
    for (int j = g.d_v - 1; j >= 0; --j) {
      vi[j] = rem % q_order;
      rem /= q_order;
      v[j] = gh.x[vi[j]];
      wv *= gh.w[vi[j]];
    }
    for (int nx = 0; nx < NX; ++nx) {
      int remx = nx;
      std::array<double, 3> x{0, 0, 0};
      for (int j = g.d_x - 1; j >= 0; --j) {
        xidx[j] = remx % x_pts;
        remx /= x_pts;
        x[j] = 2.0 * M_PI * xidx[j] / x_pts;
      }
      total += wv / NX * eval_g(a, x, v).real() * eval_g(b, x, v).real();
    }
  }
  return total;
}

Eigen::VectorXcd apply_operator(const mfp::FieldState& f, const mfp::MagneticField& B,
                                const std::string& which, int q_order, int x_pts) {
  const auto& L = *f.layout;
  const auto& g = f.grid();
  const Rule gh = gauss_hermite(q_order);
  int NV = 1;
  for (int j = 0; j < g.d_v; ++j) NV *= q_order;
  int NX = 1;
  for (int j = 0; j < g.d_x; ++j) NX *= x_pts;

  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(L.dim());
  std::array<int, 3> vi{0, 0, 0}, xidx{0, 0, 0};
  for (int nx = 0; nx < NX; ++nx) {
    int remx = nx;
    std::array<double, 3> x{0, 0, 0};
    for (int j = g.d_x - 1; j >= 0; --j) {
      xidx[j] = remx % x_pts;
      remx /= x_pts;
      x[j] = 2.0 * M_PI * xidx[j] / x_pts;
    }
    std::array<double, 3> Bx{0, 0, 0};
    for (int c = 0; c < B.n_components(); ++c) Bx[c] = B.eval(c, x);

    for (int nv = 0; nv < NV; ++nv) {
      int rem = nv;
      std::array<double, 3> v{0, 0, 0};
      double wv = 1.0;
      for (int j = g.d_v - 1; j >= 0; --j) {
        vi[j] = rem % q_order;
        rem /= q_order;
        v[j] = gh.x[vi[j]];
        wv *= gh.w[vi[j]];
      }
      std::array<HermiteEval, 3> he;
      for (int j = 0; j < g.d_v; ++j) he[j] = hermite_at(v[j], g.n_v);

      // (Op f)(x, v) from analytic formulas
      mfp::Complex val(0, 0);
      for (int xi = 0; xi < L.n_fourier(); ++xi) {
        const auto fq = L.fourier().freq(xi);
        double phase = 0;
        for (int j = 0; j < g.d_x; ++j) phase += fq[j] * x[j];
        const mfp::Complex ph = std::polar(1.0, phase);
        for (int h = 0; h < L.n_hermite(); ++h) {
          const mfp::Complex c = f.at(xi, h);
          if (c == mfp::Complex(0, 0)) continue;
          const auto& a = L.hermite().multi(h);
          double base = 1.0;
          std::array<double, 3> d1{0, 0, 0}, d2{0, 0, 0};
          for (int j = 0; j < g.d_v; ++j) base *= he[j].val[a[j]];
          for (int j = 0; j < g.d_v; ++j) {
            double prod1 = 1.0, prod2 = 1.0;
            for (int l = 0; l < g.d_v; ++l) {
              prod1 *= l == j ? he[l].d1[a[l]] : he[l].val[a[l]];
              prod2 *= l == j ? he[l].d2[a[l]] : he[l].val[a[l]];
            }
            d1[j] = prod1;
            d2[j] = prod2;
          }
          mfp::Complex term(0, 0);
          if (which == "transport") {
            for (int j = 0; j < std::min(g.d_v, g.d_x); ++j)
              term += mfp::Complex(0, fq[j]) * v[j] * base;
          } else if (which == "magnetic") {
            std::array<double, 3> vb{0, 0, 0};
            if (g.d_v == 3) {
              vb = {v[1] * Bx[2] - v[2] * Bx[1], v[2] * Bx[0] - v[0] * Bx[2],
                    v[0] * Bx[1] - v[1] * Bx[0]};
            } else {
              vb = {Bx[0] * v[1], -Bx[0] * v[0], 0};
            }
            for (int j = 0; j < g.d_v; ++j) term += vb[j] * d1[j];
          } else if (which == "collision") {
            // L = -Delta_v + v . grad_v
            for (int j = 0; j < g.d_v; ++j) term += -d2[j] + v[j] * d1[j];
          } else {
            throw std::runtime_error("oracle: unknown operator " + which);
          }
          val += c * ph * term;
        }
      }

      // project back: coefficient (xi, beta) += conj(e_xi) h_beta val weights
      for (int xi = 0; xi < L.n_fourier(); ++xi) {
        const auto fq = L.fourier().freq(xi);
        double phase = 0;
        for (int j = 0; j < g.d_x; ++j) phase += fq[j] * x[j];
        const mfp::Complex ph = std::polar(1.0, -phase);
        for (int h = 0; h < L.n_hermite(); ++h) {
          const auto& a = L.hermite().multi(h);
          double b = 1.0;
          for (int j = 0; j < g.d_v; ++j) b *= he[j].val[a[j]];
          out[L.flat(xi, h)] += wv / NX * ph * b * val;
        }
      }
    }
  }
  return out;
}

MomentSample moments(const mfp::FieldState& f, int q_order, const std::vector<double>& x1_pts) {
  const auto& g = f.grid();
  const Rule gh = gauss_hermite(q_order);
  int NV = 1;
  for (int j = 0; j < g.d_v; ++j) NV *= q_order;
  MomentSample ms;
  ms.r.assign(x1_pts.size(), 0.0);
  for (int j = 0; j < 3; ++j) ms.m[j].assign(x1_pts.size(), 0.0);
  for (int j = 0; j < 3; ++j)
    for (int l = 0; l < 3; ++l) ms.M2[j][l].assign(x1_pts.size(), 0.0);

  std::array<int, 3> vi{0, 0, 0};
  for (size_t ix = 0; ix < x1_pts.size(); ++ix) {
    const std::array<double, 3> x{x1_pts[ix], 0, 0};
    for (int nv = 0; nv < NV; ++nv) {
      int rem = nv;
      std::array<double, 3> v{0, 0, 0};
      double wv = 1.0;
      for (int j = g.d_v - 1; j >= 0; --j) {
        vi[j] = rem % q_order;
        rem /= q_order;
        v[j] = gh.x[vi[j]];
        wv *= gh.w[vi[j]];
      }
      const double fx = eval_g(f, x, v).real();
      ms.r[ix] += wv * fx;
      for (int j = 0; j < g.d_v; ++j) ms.m[j][ix] += wv * v[j] * fx;
      for (int j = 0; j < g.d_v; ++j)
        for (int l = 0; l < g.d_v; ++l) ms.M2[j][l][ix] += wv * v[j] * v[l] * fx;
    }
  }
  return ms;
}

}  // namespace oracle
