#pragma once

// INI run configuration. Sections and keys are documented in README.md;
// unknown sections or keys are rejected with ConfigError.

#include <cstdint>
#include <map>
#include <string>
#include <utility>

#include "chks/grid.hpp"
#include "chks/model.hpp"
#include "chks/solver.hpp"
#include "chks/wsu.hpp"

namespace chks::cli {

struct PhiIc {
  std::string type = "cosine";  // constant | cosine | random_perturbation | tanh_interface
  double value = 0.0;           // constant
  double mean = 0.0;            // cosine, random_perturbation
  double amplitude = 0.3;       // cosine, random_perturbation, tanh_interface
  int mode = 1;                 // cosine
  std::uint64_t seed = 1;       // random_perturbation
  double center = 0.5;          // tanh_interface, fraction of Lx
  double width = 0.05;          // tanh_interface, fraction of Lx
};

struct SigmaIc {
  std::string type = "cosine";  // constant | cosine | gaussian_bump | random_positive
  double value = 1.0;           // constant
  double mean = 1.0;            // cosine
  double amplitude = 0.5;       // cosine, random_positive
  int mode = 1;                 // cosine
  double center = 0.5;          // gaussian_bump, fraction of each length
  double width = 0.1;           // gaussian_bump, fraction of Lx
  double mass = 1.0;            // gaussian_bump, integral of the bump
  double background = 0.01;     // gaussian_bump
  std::uint64_t seed = 1;       // random_positive
  double floor = 0.1;           // random_positive
};

struct OutputSpec {
  std::string dir = "runs/default";
  std::string snapshots = "none";  // none | text | binary
};

struct WsuSpec {
  int space_refinement = 4;
  int time_refinement = 4;
  double compare_every = 0.05;
  double M = 0.0;
  double C_max = 1.0;
  double coarse_sigma_scale = 1.0;  // != 1 gives the coarse run different data
  double coarse_phi_shift = 0.0;
};

struct RunConfig {
  GridSpec grid = GridSpec::line(64, 6.283185307179586);
  double t_end = 1.0;
  double report_every = 0.01;
  ModelParams model{};
  SolverConfig solver{};
  PhiIc phi{};
  SigmaIc sigma{};
  OutputSpec output{};
  WsuSpec wsu{};

  // Checks every module precondition. Throws ConfigError.
  void validate() const;
};

// Parses INI text. Throws ConfigError naming the offending key.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// Canonical INI text containing every key; parse_config(to_ini(c)) == c.
std::string to_ini(const RunConfig& config);

// Applies "section.key=value" style overrides by re-parsing the canonical text.
RunConfig with_overrides(const RunConfig& config,
                         const std::map<std::string, std::string>& overrides);

// Initial fields on `grid`. Throws ConfigError for inadmissible data.
Field initial_phi(const PhiIc& ic, const GridSpec& grid);
Field initial_sigma(const SigmaIc& ic, const GridSpec& grid);

PairedRunConfig paired_config(const RunConfig& config);

}  // namespace chks::cli
