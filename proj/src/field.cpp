#include "mfp/field.hpp"

#include <cmath>
#include <stdexcept>

namespace mfp {

const char* frame_name(Frame f) {
  switch (f) {
    case Frame::Original: return "original";
    case Frame::Perturbation: return "perturbation";
    case Frame::Flat: return "flat";
  }
  return "?";
}

FieldState zero_state(const std::shared_ptr<const Layout>& layout, Frame frame) {
  FieldState s;
  s.layout = layout;
  s.frame = frame;
  s.coeffs = Eigen::VectorXcd::Zero(layout->dim());
  return s;
}

double FieldState::hermitian_symmetry_residual() const {
  const auto& fr = layout->fourier();
  double worst = 0;
  for (int i = 0; i < fr.size(); ++i) {
    const int ni = fr.index_of_negation(i);
    for (int h = 0; h < layout->n_hermite(); ++h) {
      worst = std::max(worst, std::abs(at(ni, h) - std::conj(at(i, h))));
    }
  }
  return worst;
}

FieldState convert_frame(const FieldState& state, Frame target) {
  if (!state.coeffs.allFinite())
    throw std::overflow_error("convert_frame: non-finite coefficients");
  FieldState out = state;
  out.frame = target;
  if (state.frame == target) return out;
  // Perturbation differs from Original/Flat by the constant: g = 1 + f.
  const auto i00 = state.layout->flat(state.layout->fourier().index({0, 0, 0}), 0);
  const bool from_pert = state.frame == Frame::Perturbation;
  const bool to_pert = target == Frame::Perturbation;
  if (from_pert && !to_pert) out.coeffs[i00] += 1.0;
  if (!from_pert && to_pert) out.coeffs[i00] -= 1.0;
  return out;
}

Moments moments(const FieldState& state) {
  if (state.frame != Frame::Perturbation)
    throw std::invalid_argument("moments: state must be in Perturbation frame");
  const auto& L = *state.layout;
  const auto& hb = L.hermite();
  const int nx = L.n_fourier();
  const int dv = L.grid().d_v;

  Moments mo;
  mo.d_v = dv;
  mo.r.resize(nx);
  for (int c = 0; c < dv; ++c) mo.m_vec[c].resize(nx);
  for (int a = 0; a < dv; ++a)
    for (int b = 0; b < dv; ++b) mo.M2[a][b].resize(nx);

  std::array<int, 3> e{0, 0, 0};
  for (int xi = 0; xi < nx; ++xi) {
    mo.r[xi] = state.at(xi, 0);
    for (int j = 0; j < dv; ++j) {
      e = {0, 0, 0};
      e[j] = 1;
      mo.m_vec[j][xi] = state.at(xi, hb.index(e));
    }
    for (int j = 0; j < dv; ++j) {
      for (int l = j; l < dv; ++l) {
        Complex val;
        if (j == l) {
          e = {0, 0, 0};
          e[j] = 2;
          // v_j^2 = sqrt(2) h_{2e_j} + h_0
          val = std::sqrt(2.0) * state.at(xi, hb.index(e)) + state.at(xi, 0);
        } else {
          e = {0, 0, 0};
          e[j] = 1;
          e[l] = 1;
          val = state.at(xi, hb.index(e));
        }
        mo.M2[j][l][xi] = val;
        mo.M2[l][j][xi] = val;
      }
    }
  }
  return mo;
}

Moments moments_micro(const FieldState& state) {
  Moments mo = moments(state);
  // remove the r * Id contribution: M2[f] = r Id + M2[h]
  for (int j = 0; j < mo.d_v; ++j) mo.M2[j][j] -= mo.r;
  return mo;
}

FieldState random_state(const std::shared_ptr<const Layout>& layout, Frame frame,
                        std::uint64_t seed, const RandomStateOptions& opt) {
  FieldState s = zero_state(layout, frame);
  const auto& fr = layout->fourier();
  const auto& hb = layout->hermite();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const int K = fr.half();
  const int deg_max = hb.n_v() - opt.margin;
  for (int xi = 0; xi < fr.size(); ++xi) {
    const auto f = fr.freq(xi);
    bool in_band = true;
    for (int j = 0; j < fr.d_x(); ++j) in_band = in_band && std::abs(f[j]) <= K - opt.margin;
    // fill only the canonical half-space; mirror below
    bool canonical = false;
    for (int j = 0; j < fr.d_x(); ++j) {
      if (f[j] > 0) { canonical = true; break; }
      if (f[j] < 0) { canonical = false; break; }
    }
    const bool zero_freq = fr.freq_norm2(xi) == 0.0;
    if (!in_band || (!canonical && !zero_freq)) continue;
    for (int h = 0; h < hb.size(); ++h) {
      if (hb.degree(h) > deg_max) continue;
      double scale = 1.0;
      if (opt.hermite_decay > 0) {
        const double t = hb.degree(h) / opt.hermite_decay;
        scale *= std::exp(-t * t);
      }
      if (opt.hermite_growth > 0) scale *= std::pow(1.0 + hb.degree(h), opt.hermite_growth);
      const double re = gauss(rng), im = gauss(rng);
      s.at(xi, h) = zero_freq ? Complex(scale * re, 0.0) : scale * Complex(re, im);
    }
  }
  // Hermitian mirror
  for (int xi = 0; xi < fr.size(); ++xi) {
    const auto f = fr.freq(xi);
    bool canonical = false;
    for (int j = 0; j < fr.d_x(); ++j) {
      if (f[j] > 0) { canonical = true; break; }
      if (f[j] < 0) break;
    }
    if (!canonical) continue;
    const int ni = fr.index_of_negation(xi);
    for (int h = 0; h < hb.size(); ++h) s.at(ni, h) = std::conj(s.at(xi, h));
  }
  if (opt.mean_zero) s.at(fr.index({0, 0, 0}), 0) = 0.0;
  if (opt.normalize) {
    const double n = s.coeffs.norm();
    if (n > 0) s.coeffs /= n;
  }
  return s;
}

FieldState single_mode_state(const std::shared_ptr<const Layout>& layout, Frame frame,
                             const std::array<int, 3>& xi, const std::array<int, 3>& alpha) {
  FieldState s = zero_state(layout, frame);
  const auto& fr = layout->fourier();
  const int xr = fr.index(xi), hr = layout->hermite().index(alpha);
  if (xr < 0 || hr < 0) throw std::invalid_argument("single_mode: index out of band");
  s.at(xr, hr) = 1.0;
  const int ni = fr.index_of_negation(xr);
  if (ni != xr) s.at(ni, hr) = 1.0;  // real field
  const double n = s.coeffs.norm();
  s.coeffs /= n;
  return s;
}

FieldState shifted_maxwellian_state(const std::shared_ptr<const Layout>& layout,
                                    const std::array<double, 3>& offset) {
  // mu(v-u)/mu(v) = exp(u.v - |u|^2/2) = prod_j sum_n u_j^n / sqrt(n!) h_n(v_j)
  FieldState s = zero_state(layout, Frame::Perturbation);
  const auto& hb = layout->hermite();
  const int x0 = layout->fourier().index({0, 0, 0});
  for (int h = 0; h < hb.size(); ++h) {
    const auto& a = hb.multi(h);
    double c = 1.0;
    for (int j = 0; j < hb.d_v(); ++j) {
      for (int n = 1; n <= a[j]; ++n) c *= offset[j] / std::sqrt(double(n));
    }
    s.at(x0, h) = c;
  }
  s.at(x0, 0) -= 1.0;  // f = F/mu - 1
  return s;
}

}  // namespace mfp
