#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "chks/cli/config.hpp"

namespace chks::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitFailed = 2;

const char* version();

struct RunOutcome {
  int exit_code = kExitOk;
  bool completed = false;
  std::string failure_reason;
  double t_final = 0.0;
  double E_final = 0.0;
  double min_sigma = 0.0;
  std::size_t steps = 0;
};

// Runs one simulation into `dir` (created if needed): manifest.json,
// timeseries.csv and optional snapshots/. Config errors are reported as
// kExitConfig outcomes, never thrown.
RunOutcome execute_run(const RunConfig& config, const std::filesystem::path& dir, std::ostream& log);

int cmd_run(const std::string& config_path, std::ostream& out, std::ostream& err);
int cmd_wsu(const std::string& config_path, std::ostream& out, std::ostream& err);

// `sets` entries look like "model.chi=0,1,2". jobs <= 0 uses the hardware concurrency.
int cmd_sweep(const std::string& config_path, const std::vector<std::string>& sets, int jobs,
              std::ostream& out, std::ostream& err);

// Parses "section.key=v1,v2" into the key and its value list. Throws ConfigError.
std::pair<std::string, std::vector<std::string>> parse_set(const std::string& spec);

// Cartesian product in row-major order (last key varies fastest).
std::vector<std::map<std::string, std::string>> sweep_cells(
    const std::vector<std::pair<std::string, std::vector<std::string>>>& axes);

}  // namespace chks::cli
