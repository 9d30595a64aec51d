#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfp/evolution.hpp"
#include "mfp/magnetic.hpp"
#include "mfp/weight.hpp"

namespace mfp {

struct ConfigError : std::runtime_error {
  int line;
  ConfigError(const std::string& msg, int line_no)
      : std::runtime_error("config:" + std::to_string(line_no) + ": " + msg), line(line_no) {}
};

/// Flat key-value experiment description (dotted sections, '#' comments,
/// unknown keys rejected with their line number).
struct ExperimentConfig {
  GridConfig grid;

  std::string field_kind = "zero";  // zero | constant | fourier
  std::array<double, 3> field_const{0, 0, 0};
  std::vector<std::string> field_mode_specs;  // "comp k1 [k2 k3] re im"

  std::string weight_kind = "poly";  // poly | exp
  double weight_k = 8.0;
  double weight_theta = 0.5;
  double p = 2.0;

  std::string initial_kind = "random";  // random | single_mode | shifted_maxwellian
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::array<int, 3> initial_xi{1, 0, 0};
  std::array<int, 3> initial_alpha{0, 0, 0};
  std::array<double, 3> initial_offset{0.1, 0, 0};
  int initial_margin = 2;
  double initial_decay = 0;   // Hermite-degree decay scale, 0 = n_v / 3
  double initial_growth = 0;  // growing-coefficient (rough) profile
  bool initial_mean_zero = true;

  IntegratorConfig integrator;

  bool split_auto = true;
  double split_a = -1.0;
  double split_M = 0.0;
  double split_R = 0.0;

  std::vector<std::string> suites{"l2", "h1"};  // l2 | h1 | lpm | w1pm

  std::string out_dir = "out";
  std::vector<std::string> out_formats{"csv", "json"};

  double tol_algebraic = 1e-12;
  double tol_conservation = 1e-10;
  double tol_integration = 1e-6;

  MagneticField make_field() const;
  Weight make_weight() const;
  FieldState make_initial(const std::shared_ptr<const Layout>& layout) const;
  bool has_suite(const std::string& s) const;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

/// Apply a single "key = value" override (used by --tol.KEY=V and --seed).
void apply_config_key(ExperimentConfig& cfg, const std::string& key, const std::string& value,
                      int line_no);

}  // namespace mfp
