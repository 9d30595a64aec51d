#include "mfp/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace mfp {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("io: cannot write " + path);
  out << content;
}

void write_trajectory_csv(const TrajectoryRecord& traj, const std::string& path) {
  std::ostringstream os;
  os << "t,mass";
  for (const auto& n : traj.norm_names) os << ',' << n;
  os << '\n';
  for (size_t j = 0; j < traj.times.size(); ++j) {
    os << fmt(traj.times[j]) << ',' << fmt(traj.mass[j]);
    for (size_t k = 0; k < traj.norm_names.size(); ++k) os << ',' << fmt(traj.norms[k][j]);
    os << '\n';
  }
  write_text_file(path, os.str());
}

void save_field(const FieldState& state, const std::string& prefix) {
  nlohmann::json hdr;
  const auto& g = state.grid();
  hdr["grid"] = {{"d_x", g.d_x}, {"d_v", g.d_v}, {"n_x", g.n_x}, {"n_v", g.n_v},
                 {"quad_order", g.quad_order}};
  hdr["frame"] = frame_name(state.frame);
  write_text_file(prefix + ".json", hdr.dump(2) + "\n");

  std::ostringstream os;
  const auto& L = *state.layout;
  for (int j = 0; j < g.d_x; ++j) os << "xi_" << j + 1 << ',';
  for (int j = 0; j < g.d_v; ++j) os << "alpha_" << j + 1 << ',';
  os << "re,im\n";
  for (int xi = 0; xi < L.n_fourier(); ++xi) {
    const auto f = L.fourier().freq(xi);
    for (int h = 0; h < L.n_hermite(); ++h) {
      const Complex c = state.at(xi, h);
      const auto& a = L.hermite().multi(h);
      for (int j = 0; j < g.d_x; ++j) os << f[j] << ',';
      for (int j = 0; j < g.d_v; ++j) os << a[j] << ',';
      os << fmt(c.real()) << ',' << fmt(c.imag()) << '\n';
    }
  }
  write_text_file(prefix + ".csv", os.str());
}

FieldState load_field(const std::string& prefix) {
  std::ifstream jh(prefix + ".json");
  if (!jh) throw std::runtime_error("io: cannot open " + prefix + ".json");
  nlohmann::json hdr = nlohmann::json::parse(jh);
  GridConfig g;
  g.d_x = hdr["grid"]["d_x"];
  g.d_v = hdr["grid"]["d_v"];
  g.n_x = hdr["grid"]["n_x"];
  g.n_v = hdr["grid"]["n_v"];
  g.quad_order = hdr["grid"]["quad_order"];
  const std::string fname = hdr["frame"];
  Frame fr = Frame::Perturbation;
  if (fname == "original") fr = Frame::Original;
  else if (fname == "flat") fr = Frame::Flat;

  auto layout = std::make_shared<Layout>(g);
  FieldState s = zero_state(layout, fr);
  std::ifstream in(prefix + ".csv");
  if (!in) throw std::runtime_error("io: cannot open " + prefix + ".csv");
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    std::array<int, 3> xi{0, 0, 0}, al{0, 0, 0};
    for (int j = 0; j < g.d_x; ++j) {
      std::getline(ss, tok, ',');
      xi[j] = std::stoi(tok);
    }
    for (int j = 0; j < g.d_v; ++j) {
      std::getline(ss, tok, ',');
      al[j] = std::stoi(tok);
    }
    std::getline(ss, tok, ',');
    const double re = std::stod(tok);
    std::getline(ss, tok, ',');
    const double im = std::stod(tok);
    s.at(layout->fourier().index(xi), layout->hermite().index(al)) = Complex(re, im);
  }
  return s;
}

void export_operator(const LinearOperatorRep& op, const std::string& prefix) {
  nlohmann::json hdr;
  hdr["label"] = op.label;
  hdr["frame"] = frame_name(op.frame);
  hdr["symmetry"] = op.symmetry == Symmetry::SelfAdjoint
                        ? "self-adjoint"
                        : (op.symmetry == Symmetry::SkewAdjoint ? "skew-adjoint" : "none");
  hdr["dim"] = op.mat.rows();
  hdr["nnz"] = op.mat.nonZeros();
  write_text_file(prefix + ".json", hdr.dump(2) + "\n");

  std::ostringstream os;
  os << "row col re im\n";
  for (int k = 0; k < op.mat.outerSize(); ++k)
    for (Eigen::SparseMatrix<Complex>::InnerIterator it(op.mat, k); it; ++it)
      os << it.row() << ' ' << it.col() << ' ' << fmt(it.value().real()) << ' '
         << fmt(it.value().imag()) << '\n';
  write_text_file(prefix + ".coords", os.str());
}

std::string fnv1a64_hex(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

std::string file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("io: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return fnv1a64_hex(ss.str());
}

}  // namespace mfp
