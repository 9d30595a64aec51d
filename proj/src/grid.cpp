#include "mfp/grid.hpp"

#include <cmath>
#include <functional>

namespace mfp {

HermiteBasis::HermiteBasis(int d_v, int n_v) : d_v_(d_v), n_v_(n_v) {
  std::array<int, 3> a{0, 0, 0};
  // enumerate by total degree so index 0 is alpha = 0 and ranks group by |alpha|
  for (int deg = 0; deg <= n_v; ++deg) {
    std::function<void(int, int)> rec = [&](int axis, int rem) {
      if (axis == d_v - 1) {
        a[axis] = rem;
        multi_.push_back(a);
        degree_.push_back(deg);
        return;
      }
      for (int k = 0; k <= rem; ++k) {
        a[axis] = k;
        rec(axis + 1, rem - k);
      }
    };
    rec(0, deg);
  }
  int table = 1;
  for (int j = 0; j < d_v; ++j) table *= (n_v + 1);
  rank_.assign(table, -1);
  for (int i = 0; i < size(); ++i) rank_[pack(multi_[i])] = i;
}

int HermiteBasis::pack(const std::array<int, 3>& a) const {
  int p = 0;
  for (int j = 0; j < d_v_; ++j) p = p * (n_v_ + 1) + a[j];
  return p;
}

int HermiteBasis::index(const std::array<int, 3>& alpha) const {
  int deg = 0;
  for (int j = 0; j < d_v_; ++j) {
    if (alpha[j] < 0 || alpha[j] > n_v_) return -1;
    deg += alpha[j];
  }
  if (deg > n_v_) return -1;
  return rank_[pack(alpha)];
}

FourierGrid::FourierGrid(int d_x, int n_x) : d_x_(d_x), n_x_(n_x) {
  size_ = 1;
  for (int j = 0; j < d_x; ++j) size_ *= n_x;
}

std::array<int, 3> FourierGrid::freq(int i) const {
  std::array<int, 3> xi{0, 0, 0};
  for (int j = d_x_ - 1; j >= 0; --j) {
    xi[j] = i % n_x_ - half();
    i /= n_x_;
  }
  return xi;
}

int FourierGrid::index(const std::array<int, 3>& xi) const {
  int idx = 0;
  for (int j = 0; j < d_x_; ++j) {
    int k = xi[j] + half();
    if (k < 0 || k >= n_x_) return -1;
    idx = idx * n_x_ + k;
  }
  return idx;
}

int FourierGrid::index_of_negation(int i) const {
  auto xi = freq(i);
  for (int j = 0; j < d_x_; ++j) xi[j] = -xi[j];
  return index(xi);
}

double FourierGrid::freq_norm2(int i) const {
  auto xi = freq(i);
  double s = 0;
  for (int j = 0; j < d_x_; ++j) s += double(xi[j]) * xi[j];
  return s;
}

}  // namespace mfp
