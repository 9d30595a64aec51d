#pragma once

#include "json.hpp"
#include "mfp/config.hpp"
#include "mfp/hypoco.hpp"

namespace mfp {

struct CheckResult {
  std::string name;
  bool pass = false;
  double measured = 0;
  double bound = 0;
  std::string provenance;  // which constant / decision the bound comes from
};

struct RunReport {
  std::string command;
  nlohmann::json config_echo;
  std::vector<CheckResult> checks;
  nlohmann::json extra;
  std::vector<std::string> files;

  bool all_pass() const;
  nlohmann::json to_json() const;
};

nlohmann::json config_to_json(const ExperimentConfig& c);

RunReport run_verify(const ExperimentConfig& cfg);
RunReport run_decay(const ExperimentConfig& cfg);
RunReport run_enlarge(const ExperimentConfig& cfg);

/// Merge every report.json found below `dir` into a single summary, listing
/// missing/partial runs without failing.
nlohmann::json merge_reports(const std::string& dir);

}  // namespace mfp
