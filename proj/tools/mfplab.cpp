// mfplab: spectral laboratory for the kinetic Fokker-Planck equation with an
// external magnetic field on the torus.
//
// Subcommands:
//   verify   algebraic operator suite (skew-adjointness, commutators,
//            accretivity, non-positivity, Psi diagnostics)
//   decay    time-decay studies: entropies, weighted norms, fitted rates
//   enlarge  semigroup-enlargement evidence: splitting, dissipativity,
//            smoothing, Duhamel residuals
//   report   merge run directories into one machine-readable summary
//
// Exit codes: 0 all selected suites pass, 1 tolerance failure, 2 config error.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mfp/harness.hpp"
#include "mfp/io.hpp"

namespace {

void print_checks(const mfp::RunReport& rep) {
  for (const auto& c : rep.checks) {
    std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << "  (measured " << c.measured
              << ", bound " << c.bound << ")\n";
  }
  std::cout << (rep.all_pass() ? "all checks passed" : "FAILURES present") << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  // accept the documented --tol.KEY=V spelling by rewriting it to "--tol KEY=V"
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a.rfind("--tol.", 0) == 0) {
      const auto eq = a.find('=');
      if (eq != std::string::npos) {
        args.push_back("--tol");
        args.push_back(a.substr(6, eq - 6) + "=" + a.substr(eq + 1));
        continue;
      }
    }
    args.push_back(a);
  }

  CLI::App app{"kinetic Fokker-Planck spectral verification laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_dir, report_dir = ".";
  long long seed = -1;
  std::vector<std::string> tol_overrides;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment config file")->required();
    sub->add_option("--out", out_dir, "output directory override");
    sub->add_option("--seed", seed, "seed override");
    sub->add_option("--tol", tol_overrides, "tolerance override KEY=V (e.g. algebraic=1e-12)");
  };

  CLI::App* cmd_verify = app.add_subcommand("verify", "algebraic invariant suite");
  add_common(cmd_verify);
  CLI::App* cmd_decay = app.add_subcommand("decay", "decay studies and rate fits");
  add_common(cmd_decay);
  CLI::App* cmd_enlarge = app.add_subcommand("enlarge", "enlargement machinery evidence");
  add_common(cmd_enlarge);
  CLI::App* cmd_report = app.add_subcommand("report", "merge run reports");
  cmd_report->add_option("dir", report_dir, "directory of runs")->required();
  std::string report_out = "summary.json";
  cmd_report->add_option("--out", report_out, "summary output path");

  std::vector<char*> cargs;
  cargs.push_back(argv[0]);
  for (auto& s : args) cargs.push_back(s.data());
  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? 2 : 0;
  }

  try {
    if (cmd_report->parsed()) {
      const nlohmann::json summary = mfp::merge_reports(report_dir);
      mfp::write_text_file(report_out, summary.dump(2) + "\n");
      std::cout << "merged " << summary["runs"].size() << " run(s) into " << report_out << "\n";
      return 0;
    }

    mfp::ExperimentConfig cfg = mfp::parse_config_file(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (seed >= 0) {
      cfg.seed = static_cast<std::uint64_t>(seed);
      cfg.seed_set = true;
    }
    for (const auto& ov : tol_overrides) {
      const auto eq = ov.find('=');
      if (eq == std::string::npos) throw mfp::ConfigError("--tol expects KEY=V", 0);
      mfp::apply_config_key(cfg, "tol." + ov.substr(0, eq), ov.substr(eq + 1), 0);
    }

    mfp::RunReport rep;
    if (cmd_verify->parsed()) rep = mfp::run_verify(cfg);
    else if (cmd_decay->parsed()) rep = mfp::run_decay(cfg);
    else rep = mfp::run_enlarge(cfg);
    print_checks(rep);
    return rep.all_pass() ? 0 : 1;
  } catch (const mfp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
