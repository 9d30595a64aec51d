#include "mfp/magnetic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mfp {

MagneticField::MagneticField(int d_x, int d_v) : d_x_(d_x), d_v_(d_v) {
  if (d_v != 2 && d_v != 3) throw std::invalid_argument("magnetic: d_v must be 2 or 3");
  complete_and_cache();
}

MagneticField MagneticField::constant(int d_x, int d_v, const std::array<double, 3>& vec) {
  MagneticField B(d_x, d_v);
  const int nc = B.n_components();
  for (int c = 0; c < nc; ++c) {
    if (vec[c] != 0.0) B.modes_[c].push_back({{0, 0, 0}, Complex(vec[c], 0.0)});
  }
  B.complete_and_cache();
  return B;
}

MagneticField MagneticField::fourier(int d_x, int d_v,
                                     const std::array<std::vector<FourierMode>, 3>& modes) {
  MagneticField B(d_x, d_v);
  B.modes_ = modes;
  for (int c = B.n_components(); c < 3; ++c) B.modes_[c].clear();
  B.complete_and_cache();
  return B;
}

void MagneticField::complete_and_cache() {
  // Hermitian completion: for every xi != 0 mode, ensure conj at -xi.
  for (int c = 0; c < 3; ++c) {
    std::vector<FourierMode> full;
    for (const auto& m : modes_[c]) {
      bool zero_freq = true;
      for (int j = 0; j < d_x_; ++j) zero_freq = zero_freq && m.xi[j] == 0;
      if (zero_freq) {
        if (std::abs(m.amp.imag()) > 1e-14)
          throw std::invalid_argument("magnetic: zero-frequency amplitude must be real");
        full.push_back({m.xi, Complex(m.amp.real(), 0.0)});
      } else {
        full.push_back(m);
        auto neg = m.xi;
        for (int j = 0; j < d_x_; ++j) neg[j] = -neg[j];
        full.push_back({neg, std::conj(m.amp)});
      }
    }
    modes_[c] = std::move(full);
  }

  // sup norms on a refinement grid (>= 4x band, at least 32 points per axis)
  const int bw = std::max(band(), 1);
  const int n = std::max(32, 8 * bw + 1);
  const double h = 2.0 * M_PI / n;
  sup_norm_ = 0.0;
  grad_sup_norm_ = 0.0;
  std::array<int, 3> idx{0, 0, 0};
  const int total = [&] {
    int t = 1;
    for (int j = 0; j < d_x_; ++j) t *= n;
    return t;
  }();
  const int nc = n_components();
  for (int flat = 0; flat < total; ++flat) {
    int rem = flat;
    std::array<double, 3> x{0, 0, 0};
    for (int j = d_x_ - 1; j >= 0; --j) {
      idx[j] = rem % n;
      rem /= n;
      x[j] = idx[j] * h;
    }
    double b2 = 0.0, g2 = 0.0;
    for (int c = 0; c < nc; ++c) {
      Complex val(0, 0);
      std::array<Complex, 3> grad{Complex(0, 0), Complex(0, 0), Complex(0, 0)};
      for (const auto& m : modes_[c]) {
        double phase = 0;
        for (int j = 0; j < d_x_; ++j) phase += m.xi[j] * x[j];
        const Complex e = m.amp * std::polar(1.0, phase);
        val += e;
        for (int j = 0; j < d_x_; ++j) grad[j] += Complex(0, m.xi[j]) * e;
      }
      b2 += val.real() * val.real();
      for (int j = 0; j < d_x_; ++j) g2 += grad[j].real() * grad[j].real();
    }
    sup_norm_ = std::max(sup_norm_, std::sqrt(b2));
    grad_sup_norm_ = std::max(grad_sup_norm_, std::sqrt(g2));
  }
}

bool MagneticField::is_zero() const {
  for (const auto& ms : modes_)
    for (const auto& m : ms)
      if (std::abs(m.amp) > 0) return false;
  return true;
}

int MagneticField::band() const {
  int b = 0;
  for (const auto& ms : modes_)
    for (const auto& m : ms)
      for (int j = 0; j < d_x_; ++j) b = std::max(b, std::abs(m.xi[j]));
  return b;
}

Complex MagneticField::amplitude(int c, const std::array<int, 3>& xi) const {
  Complex a(0, 0);
  for (const auto& m : modes_[c]) {
    bool match = true;
    for (int j = 0; j < d_x_; ++j) match = match && m.xi[j] == xi[j];
    if (match) a += m.amp;
  }
  return a;
}

double MagneticField::eval(int c, const std::array<double, 3>& x) const {
  Complex val(0, 0);
  for (const auto& m : modes_[c]) {
    double phase = 0;
    for (int j = 0; j < d_x_; ++j) phase += m.xi[j] * x[j];
    val += m.amp * std::polar(1.0, phase);
  }
  return val.real();
}

}  // namespace mfp
