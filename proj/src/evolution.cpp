#include "mfp/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

#include "mfp/norms.hpp"
#include "mfp/quadrature.hpp"

namespace mfp {

int TrajectoryRecord::find_norm(const std::string& name) const {
  for (size_t k = 0; k < norm_names.size(); ++k)
    if (norm_names[k] == name) return static_cast<int>(k);
  return -1;
}

const std::vector<double>& TrajectoryRecord::series(const std::string& name) const {
  const int k = find_norm(name);
  if (k < 0) throw std::invalid_argument("trajectory: no recorded quantity named " + name);
  return norms[k];
}

namespace {

struct SplitParts {
  Eigen::VectorXcd diag;
  Eigen::SparseMatrix<Complex> rest;
};

SplitParts split_diag(const Eigen::SparseMatrix<Complex>& m) {
  SplitParts s;
  s.diag = m.diagonal();
  Eigen::SparseMatrix<Complex> d(m.rows(), m.cols());
  std::vector<Eigen::Triplet<Complex>> t;
  for (int i = 0; i < m.rows(); ++i)
    if (s.diag[i] != Complex(0, 0)) t.emplace_back(i, i, s.diag[i]);
  d.setFromTriplets(t.begin(), t.end());
  s.rest = m - d;
  s.rest.makeCompressed();
  return s;
}

double radius_estimate(const Eigen::SparseMatrix<Complex>& m) {
  if (m.rows() == 0) return 0.0;
  std::mt19937_64 rng(1234567);
  std::normal_distribution<double> g(0, 1);
  Eigen::VectorXcd v(m.rows());
  for (int i = 0; i < v.size(); ++i) v[i] = Complex(g(rng), g(rng));
  v /= v.norm();
  double rho = 0;
  for (int it = 0; it < 30; ++it) {
    Eigen::VectorXcd w = m * v;
    const double n = w.norm();
    if (n == 0) return 0.0;
    rho = n;
    v = w / n;
  }
  return rho;
}

void rk4_step(const Eigen::SparseMatrix<Complex>& A, Eigen::VectorXcd& c, double dt) {
  const Eigen::VectorXcd k1 = A * c;
  const Eigen::VectorXcd k2 = A * (c + 0.5 * dt * k1);
  const Eigen::VectorXcd k3 = A * (c + 0.5 * dt * k2);
  const Eigen::VectorXcd k4 = A * (c + dt * k3);
  c += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void strang_step(const SplitParts& sp, Eigen::VectorXcd& c, double dt) {
  const Eigen::VectorXcd e = (0.5 * dt * sp.diag).array().exp();
  c = e.cwiseProduct(c);
  rk4_step(sp.rest, c, dt);
  c = e.cwiseProduct(c);
}

}  // namespace

double offdiagonal_radius_estimate(const LinearOperatorRep& op) {
  return radius_estimate(split_diag(op.mat).rest);
}

TrajectoryRecord evolve(const LinearOperatorRep& op, const FieldState& f0,
                        const IntegratorConfig& cfg, const std::vector<NormObserver>& observers) {
  if (!(f0.grid() == op.layout->grid())) throw std::invalid_argument("evolve: grid mismatch");
  if (f0.frame != op.frame) throw std::invalid_argument("evolve: frame mismatch");
  if (!(cfg.dt > 0)) throw std::invalid_argument("evolve: dt must be positive");

  TrajectoryRecord rec;
  for (const auto& o : observers) rec.norm_names.push_back(o.first);
  rec.norms.resize(observers.size());

  FieldState state = f0;
  auto record = [&](double t) {
    rec.times.push_back(t);
    rec.mass.push_back(state.mass().real());
    if (cfg.record_states) rec.states.push_back(state);
    for (size_t k = 0; k < observers.size(); ++k) rec.norms[k].push_back(observers[k].second(state));
  };

  const double dt_rec = cfg.dt * cfg.record_every;
  const int n_rec = std::max(1, int(std::llround(cfg.t_end / dt_rec)));

  if (cfg.scheme == IntegratorConfig::Scheme::ExactSmall) {
    if (op.layout->dim() > 4000)
      throw std::runtime_error("evolve/ExactSmall: dimension overflow (> 4000), use StrangIMEX");
    const Eigen::MatrixXcd dense = Eigen::MatrixXcd(op.mat);
    const Eigen::MatrixXcd prop = (dt_rec * dense).exp();
    record(0.0);
    for (int j = 1; j <= n_rec; ++j) {
      state.coeffs = prop * state.coeffs;
      record(j * dt_rec);
    }
    return rec;
  }

  const SplitParts sp = split_diag(op.mat);
  const double rho = radius_estimate(sp.rest);
  if (cfg.dt * rho > 1.5)
    throw std::runtime_error("evolve/StrangIMEX: stability guard violated, dt * rho = " +
                             std::to_string(cfg.dt * rho) + " > 1.5");
  record(0.0);
  for (int j = 1; j <= n_rec; ++j) {
    for (int s = 0; s < cfg.record_every; ++s) strang_step(sp, state.coeffs, cfg.dt);
    record(j * dt_rec);
  }
  return rec;
}

FieldState spectral_projection_pi0(const FieldState& F) {
  const FieldState orig = convert_frame(F, Frame::Original);
  FieldState out = zero_state(orig.layout, Frame::Original);
  const auto i0 = orig.layout->fourier().index({0, 0, 0});
  out.at(i0, 0) = orig.at(i0, 0);  // mu <F>
  return out;
}

SemigroupSampler::SemigroupSampler(const LinearOperatorRep& op, int dense_threshold) {
  if (op.layout->dim() <= dense_threshold) {
    const Eigen::MatrixXcd dense = Eigen::MatrixXcd(op.mat);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(dense);
    V_ = es.eigenvectors();
    eig_ = es.eigenvalues();
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(V_);
    Vinv_ = lu.inverse();
    const double resid = (V_ * eig_.asDiagonal() * Vinv_ - dense).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, dense.cwiseAbs().maxCoeff());
    dense_ = resid / scale < 1e-9;
  }
  if (!dense_) {
    const SplitParts sp = split_diag(op.mat);
    diag_ = sp.diag;
    rest_ = sp.rest;
    const double rho = radius_estimate(rest_);
    dt_ = rho > 0 ? 0.1 / rho : 1e-2;
  }
}

Eigen::VectorXcd SemigroupSampler::apply(double t, const Eigen::VectorXcd& v) const {
  if (t == 0.0) return v;
  if (dense_) {
    const Eigen::VectorXcd phases = (t * eig_).array().exp();
    return V_ * phases.cwiseProduct(Vinv_ * v);
  }
  // march with Strang steps; resolve short horizons with at least 16 steps
  const int n = std::max(16, int(std::ceil(t / dt_)));
  const double dt = t / n;
  Eigen::VectorXcd c = v;
  SplitParts sp{diag_, rest_};
  for (int j = 0; j < n; ++j) strang_step(sp, c, dt);
  return c;
}

Eigen::VectorXcd convolve(const TimeOp& S2, const TimeOp& S1, double t, int points,
                          const Eigen::VectorXcd& v) {
  if (!(t > 0)) throw std::invalid_argument("convolve: t must be positive");
  GaussLegendre gl(points);
  Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(v.size());
  for (int i = 0; i < points; ++i) {
    const double s = gl.nodes[i] * t;
    acc += (t * gl.weights[i]) * S2(s, S1(t - s, v));
  }
  return acc;
}

AdaptiveConvolution convolve_adaptive(const TimeOp& S2, const TimeOp& S1, double t,
                                      const Eigen::VectorXcd& v, double rel_tol, int max_points) {
  AdaptiveConvolution out;
  Eigen::VectorXcd prev = convolve(S2, S1, t, 8, v);
  for (int q = 16; q <= max_points; q *= 2) {
    Eigen::VectorXcd cur = convolve(S2, S1, t, q, v);
    const double scale = std::max(cur.norm(), 1e-300);
    out.rel_diff = (cur - prev).norm() / scale;
    out.value = cur;
    out.points = q;
    if (out.rel_diff <= rel_tol) {
      out.converged = true;
      return out;
    }
    prev = cur;
  }
  out.converged = false;
  return out;
}

double duhamel_residual(const SplitBundle& bundle, double t, const FieldState& f0,
                        int quad_points) {
  if (!(t > 0)) throw std::invalid_argument("duhamel_residual: t must be positive");
  const FieldState F = convert_frame(f0, Frame::Original);
  SemigroupSampler SL(bundle.L0), SB(bundle.B);
  const auto& A = bundle.A.mat;

  const TimeOp sl = [&](double s, const Eigen::VectorXcd& x) { return SL.apply(s, x); };
  const TimeOp asb = [&](double s, const Eigen::VectorXcd& x) {
    return Eigen::VectorXcd(A * SB.apply(s, x));
  };
  const Eigen::VectorXcd lhs = SL.apply(t, F.coeffs);
  const Eigen::VectorXcd rhs = SB.apply(t, F.coeffs) + convolve(sl, asb, t, quad_points, F.coeffs);
  return (lhs - rhs).norm() / F.coeffs.norm();
}

std::vector<std::pair<double, double>> smoothing_probe(const SplitBundle& bundle,
                                                       const FieldState& f0, double p, double q,
                                                       const std::vector<double>& t_list) {
  if (!(1.0 <= p && p <= q && q <= 2.0))
    throw std::invalid_argument("smoothing_probe: require 1 <= p <= q <= 2");
  const FieldState F0 = convert_frame(f0, Frame::Original);
  const Weight m0 = Weight::m0(F0.grid().d_v);
  const double denom = norm_lp_m(F0, m0, p);

  std::vector<double> ts = t_list;
  std::sort(ts.begin(), ts.end());
  const SplitParts sp = split_diag(bundle.B.mat);
  const double rho = radius_estimate(sp.rest);
  std::vector<std::pair<double, double>> out;
  FieldState state = F0;
  double t_cur = 0.0;
  for (double t : ts) {
    const double span = t - t_cur;
    if (span > 0) {
      const double dt_max = std::min(1.0 / std::max(rho, 1e-12), span);
      const int n = std::max(4, int(std::ceil(span / dt_max)));
      const double dt = span / n;
      for (int j = 0; j < n; ++j) strang_step(sp, state.coeffs, dt);
      t_cur = t;
    }
    out.emplace_back(t, norm_lp_m(state, m0, q) / denom);
  }
  return out;
}

double loglog_slope(const std::vector<std::pair<double, double>>& series, double t_lo,
                    double t_hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& [t, y] : series) {
    if (t < t_lo || t > t_hi || y <= 0) continue;
    const double x = std::log(t), ly = std::log(y);
    sx += x;
    sy += ly;
    sxx += x * x;
    sxy += x * ly;
    ++n;
  }
  if (n < 2) throw std::invalid_argument("loglog_slope: fewer than two usable samples");
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace mfp
