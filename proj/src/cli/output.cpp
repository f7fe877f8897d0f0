#include "chks/cli/output.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include "chks/error.hpp"

namespace chks::cli {

namespace {

constexpr char kMagic[8] = {'C', 'H', 'K', 'S', 'S', 'N', 'P', '1'};

template <typename T>
void put_le(std::ostream& out, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
  }
  out.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  unsigned char b[sizeof(T)];
  in.read(reinterpret_cast<char*>(b), sizeof(T));
  if (!in) throw Error(ErrorCode::InvalidArgument, "truncated snapshot");
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
  }
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

const std::vector<std::string>& timeseries_columns() {
  static const std::vector<std::string> cols{
      "t",         "mass_phi",        "mass_sigma",          "min_sigma",
      "max_sigma", "min_phi",         "max_phi",             "E_total",
      "E_dirichlet", "E_potential",   "E_coupling",          "E_sigma_entropy",
      "E_eps",     "D",               "energy_law_residual", "entropy_identity_residual",
      "grad_ln_sigma_sq_cum", "llogl_beta", "ln_sigma_L1",   "newton_iters",
      "dt_used"};
  return cols;
}

std::string timeseries_header() {
  std::string out = "#schema=" + std::to_string(kTimeseriesSchema) + "\n";
  const auto& cols = timeseries_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
  return out + "\n";
}

std::string format_row(const TimeseriesRow& row) {
  const EnergyReport& r = row.report;
  const double vals[] = {r.t,
                         r.mass_phi,
                         r.mass_sigma,
                         r.min_sigma,
                         r.max_sigma,
                         r.min_phi,
                         r.max_phi,
                         r.E_total,
                         r.parts.dirichlet,
                         r.parts.potential,
                         r.parts.coupling,
                         r.parts.sigma_entropy,
                         r.parts.eps_term,
                         r.dissipation,
                         row.energy_law_residual,
                         row.entropy_identity_residual,
                         row.grad_ln_sigma_sq_cum,
                         r.llogl_beta,
                         r.ln_sigma_L1};
  std::string out;
  for (double v : vals) out += format_double(v) + ",";
  out += std::to_string(row.newton_iters) + "," + format_double(row.dt_used) + "\n";
  return out;
}

std::filesystem::path resolve_output_dir(const std::string& dir) {
  std::filesystem::path p(dir);
  if (p.is_absolute()) return p;
  if (const char* root = std::getenv(kOutputRootEnv); root && *root) return std::filesystem::path(root) / p;
  return std::filesystem::current_path() / p;
}

void write_snapshot(const std::filesystem::path& path, const Field& field, double t, bool binary) {
  const GridSpec& g = field.grid();
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
  if (binary) {
    out.write(kMagic, sizeof kMagic);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.dim));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.nx()));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.ny()));
    put_le<std::uint32_t>(out, 0);
    put_le<double>(out, g.lengths[0]);
    put_le<double>(out, g.dim == 2 ? g.lengths[1] : 1.0);
    put_le<double>(out, t);
    for (std::size_t c = 0; c < field.size(); ++c) put_le<double>(out, field[c]);
  } else {
    out << "# chks-snapshot 1\n";
    out << "# dim " << g.dim << "\n";
    out << "# cells " << g.nx() << " " << g.ny() << "\n";
    out << "# lengths " << format_double(g.lengths[0]) << " "
        << format_double(g.dim == 2 ? g.lengths[1] : 1.0) << "\n";
    out << "# t " << format_double(t) << "\n";
    for (std::size_t c = 0; c < field.size(); ++c) out << format_double(field[c]) << "\n";
  }
  if (!out) throw Error(ErrorCode::InvalidArgument, "failed writing " + path.string());
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot read " + path.string());
  char magic[8] = {};
  in.read(magic, sizeof magic);
  GridSpec g;
  Snapshot snap;
  if (in && std::memcmp(magic, kMagic, sizeof kMagic) == 0) {
    g.dim = static_cast<int>(get_le<std::uint32_t>(in));
    g.cells[0] = static_cast<int>(get_le<std::uint32_t>(in));
    g.cells[1] = static_cast<int>(get_le<std::uint32_t>(in));
    get_le<std::uint32_t>(in);
    g.lengths[0] = get_le<double>(in);
    g.lengths[1] = get_le<double>(in);
    snap.t = get_le<double>(in);
    g.validate();
    snap.field = Field(g);
    for (std::size_t c = 0; c < snap.field.size(); ++c) snap.field[c] = get_le<double>(in);
    return snap;
  }
  in.clear();
  in.seekg(0);
  std::string line;
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line.substr(1));
      std::string key;
      ls >> key;
      if (key == "dim") ls >> g.dim;
      else if (key == "cells") ls >> g.cells[0] >> g.cells[1];
      else if (key == "lengths") ls >> g.lengths[0] >> g.lengths[1];
      else if (key == "t") ls >> snap.t;
      continue;
    }
    values.push_back(std::strtod(line.c_str(), nullptr));
  }
  g.validate();
  if (values.size() != g.size()) throw Error(ErrorCode::InvalidArgument, "snapshot size mismatch");
  snap.field = Field(g, std::move(values));
  return snap;
}

}  // namespace chks::cli
