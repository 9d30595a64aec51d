#include "mfp/config.hpp"

#include <fstream>
#include <sstream>

namespace mfp {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& v, int line) {
  try {
    size_t pos;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return d;
  } catch (...) {
    throw ConfigError("not a number: '" + v + "'", line);
  }
}

long to_int(const std::string& v, int line) {
  try {
    size_t pos;
    const long d = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return d;
  } catch (...) {
    throw ConfigError("not an integer: '" + v + "'", line);
  }
}

bool to_bool(const std::string& v, int line) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("not a boolean: '" + v + "'", line);
}

}  // namespace

void apply_config_key(ExperimentConfig& c, const std::string& key, const std::string& value,
                      int ln) {
  if (key == "grid.d_x") c.grid.d_x = int(to_int(value, ln));
  else if (key == "grid.d_v") c.grid.d_v = int(to_int(value, ln));
  else if (key == "grid.n_x") c.grid.n_x = int(to_int(value, ln));
  else if (key == "grid.n_v") c.grid.n_v = int(to_int(value, ln));
  else if (key == "grid.quad_order") c.grid.quad_order = int(to_int(value, ln));
  else if (key == "field.kind") c.field_kind = value;
  else if (key == "field.b" || key == "field.bx") c.field_const[0] = to_double(value, ln);
  else if (key == "field.by") c.field_const[1] = to_double(value, ln);
  else if (key == "field.bz") c.field_const[2] = to_double(value, ln);
  else if (key.rfind("field.mode.", 0) == 0) c.field_mode_specs.push_back(value);
  else if (key == "weight.kind") c.weight_kind = value;
  else if (key == "weight.k") c.weight_k = to_double(value, ln);
  else if (key == "weight.theta") c.weight_theta = to_double(value, ln);
  else if (key == "suite.p" || key == "p") c.p = to_double(value, ln);
  else if (key == "suites") c.suites = split_list(value, ',');
  else if (key == "initial.kind") c.initial_kind = value;
  else if (key == "initial.seed" || key == "seed") {
    c.seed = std::uint64_t(to_int(value, ln));
    c.seed_set = true;
  } else if (key == "initial.xi") {
    const auto v = split_list(value, ',');
    for (size_t j = 0; j < v.size() && j < 3; ++j) c.initial_xi[j] = int(to_int(v[j], ln));
  } else if (key == "initial.alpha") {
    const auto v = split_list(value, ',');
    for (size_t j = 0; j < v.size() && j < 3; ++j) c.initial_alpha[j] = int(to_int(v[j], ln));
  } else if (key == "initial.offset") {
    const auto v = split_list(value, ',');
    for (size_t j = 0; j < v.size() && j < 3; ++j) c.initial_offset[j] = to_double(v[j], ln);
  } else if (key == "initial.margin") c.initial_margin = int(to_int(value, ln));
  else if (key == "initial.decay") c.initial_decay = to_double(value, ln);
  else if (key == "initial.growth") c.initial_growth = to_double(value, ln);
  else if (key == "initial.mean_zero") c.initial_mean_zero = to_bool(value, ln);
  else if (key == "integrator.scheme") {
    if (value == "exact_small") c.integrator.scheme = IntegratorConfig::Scheme::ExactSmall;
    else if (value == "strang") c.integrator.scheme = IntegratorConfig::Scheme::StrangIMEX;
    else throw ConfigError("unknown integrator.scheme '" + value + "'", ln);
  } else if (key == "integrator.dt") c.integrator.dt = to_double(value, ln);
  else if (key == "integrator.t_end") c.integrator.t_end = to_double(value, ln);
  else if (key == "integrator.record_every") c.integrator.record_every = int(to_int(value, ln));
  else if (key == "split.auto") c.split_auto = to_bool(value, ln);
  else if (key == "split.a") c.split_a = to_double(value, ln);
  else if (key == "split.M") c.split_M = to_double(value, ln);
  else if (key == "split.R") c.split_R = to_double(value, ln);
  else if (key == "out.dir") c.out_dir = value;
  else if (key == "out.formats") c.out_formats = split_list(value, ',');
  else if (key == "tol.algebraic") c.tol_algebraic = to_double(value, ln);
  else if (key == "tol.conservation") c.tol_conservation = to_double(value, ln);
  else if (key == "tol.integration") c.tol_integration = to_double(value, ln);
  else throw ConfigError("unknown key '" + key + "'", ln);
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig c;
  std::stringstream ss(text);
  std::string line;
  int ln = 0;
  while (std::getline(ss, line)) {
    ++ln;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", ln);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) throw ConfigError("empty key or value", ln);
    apply_config_key(c, key, value, ln);
  }
  c.grid.validate();
  if (c.initial_kind == "random" && !c.seed_set)
    throw ConfigError("initial.kind = random requires an explicit seed", ln);
  return c;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

MagneticField ExperimentConfig::make_field() const {
  if (field_kind == "zero") return MagneticField(grid.d_x, grid.d_v);
  if (field_kind == "constant") return MagneticField::constant(grid.d_x, grid.d_v, field_const);
  if (field_kind == "fourier") {
    std::array<std::vector<FourierMode>, 3> modes;
    for (const auto& spec : field_mode_specs) {
      std::stringstream ss(spec);
      std::string comp;
      ss >> comp;
      FourierMode m;
      for (int j = 0; j < grid.d_x; ++j) ss >> m.xi[j];
      double re = 0, im = 0;
      ss >> re >> im;
      if (ss.fail()) throw std::runtime_error("config: bad field.mode spec '" + spec + "'");
      m.amp = Complex(re, im);
      int ci = 0;
      if (comp == "x" || comp == "s" || comp == "1") ci = 0;
      else if (comp == "y" || comp == "2") ci = 1;
      else if (comp == "z" || comp == "3") ci = 2;
      else throw std::runtime_error("config: bad field.mode component '" + comp + "'");
      modes[ci].push_back(m);
    }
    return MagneticField::fourier(grid.d_x, grid.d_v, modes);
  }
  throw std::runtime_error("config: unknown field.kind '" + field_kind + "'");
}

Weight ExperimentConfig::make_weight() const {
  if (weight_kind == "poly") return Weight::poly(weight_k, grid.d_v);
  if (weight_kind == "exp") return Weight::exp_theta(weight_theta, grid.d_v);
  throw std::runtime_error("config: unknown weight.kind '" + weight_kind + "'");
}

FieldState ExperimentConfig::make_initial(const std::shared_ptr<const Layout>& layout) const {
  if (initial_kind == "random") {
    RandomStateOptions opt;
    opt.mean_zero = initial_mean_zero;
    opt.margin = initial_margin;
    opt.hermite_decay = initial_decay > 0 ? initial_decay : grid.n_v / 3.0;
    opt.hermite_growth = initial_growth;
    if (initial_growth > 0) opt.hermite_decay = 0;
    return random_state(layout, Frame::Perturbation, seed, opt);
  }
  if (initial_kind == "single_mode")
    return single_mode_state(layout, Frame::Perturbation, initial_xi, initial_alpha);
  if (initial_kind == "shifted_maxwellian") return shifted_maxwellian_state(layout, initial_offset);
  throw std::runtime_error("config: unknown initial.kind '" + initial_kind + "'");
}

bool ExperimentConfig::has_suite(const std::string& s) const {
  for (const auto& x : suites)
    if (x == s) return true;
  return false;
}

}  // namespace mfp
