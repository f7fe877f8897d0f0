#pragma once

// Run directory artifacts: timeseries.csv, field snapshots, path resolution.

#include <filesystem>
#include <string>
#include <vector>

#include "chks/functionals.hpp"
#include "chks/grid.hpp"

namespace chks::cli {

inline constexpr int kTimeseriesSchema = 1;
inline constexpr const char* kOutputRootEnv = "CHKS_OUTPUT_ROOT";

const std::vector<std::string>& timeseries_columns();

struct TimeseriesRow {
  EnergyReport report{};
  double energy_law_residual = 0.0;
  double entropy_identity_residual = 0.0;
  double grad_ln_sigma_sq_cum = 0.0;
  int newton_iters = 0;
  double dt_used = 0.0;
};

// "#schema=1" line followed by the column header, newline terminated.
std::string timeseries_header();
std::string format_row(const TimeseriesRow& row);

// Relative paths resolve against $CHKS_OUTPUT_ROOT when set, else the cwd.
std::filesystem::path resolve_output_dir(const std::string& dir);

// Text: "# key value" header lines then one %.17g value per line.
// Binary: "CHKSSNP1", u32 dim, nx, ny, 0, f64 Lx, Ly, t, then values; all little endian.
void write_snapshot(const std::filesystem::path& path, const Field& field, double t, bool binary);

struct Snapshot {
  Field field;
  double t = 0.0;
};
Snapshot read_snapshot(const std::filesystem::path& path);

std::string csv_escape(const std::string& s);
std::string format_double(double v);

}  // namespace chks::cli
