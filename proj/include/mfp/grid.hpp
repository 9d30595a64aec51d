#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace mfp {

using Complex = std::complex<double>;

/// Discretization parameters: Fourier modes per spatial axis, maximal total
/// Hermite degree in velocity, and the Gauss-Hermite order used for the
/// non-quadratic (weighted) norms.
///
/// Conventions fixed here once and for all:
///  * torus measure is normalized, dx/(2*pi)^d_x, so exp(i xi.x) is an
///    orthonormal family and the Maxwellian mu has unit mass;
///  * velocity basis is the Hermite family orthonormal in L^2(d mu).
struct GridConfig {
  int d_x = 1;          // spatial dimension, 1..3
  int d_v = 2;          // velocity dimension, 2 or 3
  int n_x = 17;         // Fourier modes per axis (odd); frequencies -K..K
  int n_v = 24;         // max total Hermite degree |alpha| <= n_v
  int quad_order = 40;  // Gauss-Hermite order per velocity axis

  int fourier_half() const { return (n_x - 1) / 2; }

  void validate() const {
    if (d_x < 1 || d_x > 3) throw std::invalid_argument("grid: d_x must be 1, 2 or 3");
    if (d_v < 2 || d_v > 3) throw std::invalid_argument("grid: d_v must be 2 or 3");
    if (n_x < 3 || n_x % 2 == 0) throw std::invalid_argument("grid: n_x must be odd and >= 3");
    if (n_v < 2) throw std::invalid_argument("grid: n_v must be >= 2");
    if (quad_order < n_v + 2) throw std::invalid_argument("grid: quad_order must be >= n_v + 2");
  }

  bool operator==(const GridConfig&) const = default;
};

/// Enumeration of Hermite multi-indices alpha with |alpha| <= n_v, plus a
/// dense rank lookup.  Index 0 is always alpha = 0.
class HermiteBasis {
 public:
  HermiteBasis(int d_v, int n_v);

  int size() const { return static_cast<int>(multi_.size()); }
  int degree(int i) const { return degree_[i]; }
  const std::array<int, 3>& multi(int i) const { return multi_[i]; }

  /// Rank of a multi-index, or -1 if outside the band.
  int index(const std::array<int, 3>& alpha) const;

  int d_v() const { return d_v_; }
  int n_v() const { return n_v_; }

 private:
  int d_v_, n_v_;
  std::vector<std::array<int, 3>> multi_;
  std::vector<int> degree_;
  std::vector<int> rank_;  // dense table over (n_v+1)^d_v
  int pack(const std::array<int, 3>& a) const;
};

/// Flattened tensor grid of Fourier frequencies, one axis index in [0, n_x)
/// per spatial dimension; frequency = index - K.
class FourierGrid {
 public:
  FourierGrid(int d_x, int n_x);

  int size() const { return size_; }
  std::array<int, 3> freq(int i) const;
  int index(const std::array<int, 3>& xi) const;  // -1 if out of band
  int index_of_negation(int i) const;             // rank of -xi
  double freq_norm2(int i) const;                 // |xi|^2

  int d_x() const { return d_x_; }
  int n_x() const { return n_x_; }
  int half() const { return (n_x_ - 1) / 2; }

 private:
  int d_x_, n_x_, size_;
};

/// Shared per-grid index machinery: coefficient rank = xi_rank * n_hermite + alpha_rank.
class Layout {
 public:
  explicit Layout(const GridConfig& g) : grid_(g), herm_(g.d_v, g.n_v), four_(g.d_x, g.n_x) {}

  const GridConfig& grid() const { return grid_; }
  const HermiteBasis& hermite() const { return herm_; }
  const FourierGrid& fourier() const { return four_; }

  int n_hermite() const { return herm_.size(); }
  int n_fourier() const { return four_.size(); }
  std::int64_t dim() const { return std::int64_t(herm_.size()) * four_.size(); }

  std::int64_t flat(int xi_rank, int h_rank) const {
    return std::int64_t(xi_rank) * herm_.size() + h_rank;
  }

 private:
  GridConfig grid_;
  HermiteBasis herm_;
  FourierGrid four_;
};

}  // namespace mfp
