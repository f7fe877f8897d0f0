#include "chks/cli/commands.hpp"

#include <atomic>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "chks/cli/output.hpp"
#include "chks/diagnostics.hpp"
#include "chks/simd/kernels.hpp"
#include "chks/solver.hpp"
#include "chks/wsu.hpp"

#ifndef CHKS_VERSION
#define CHKS_VERSION "0.0.0"
#endif

namespace chks::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

json config_json(const RunConfig& c) {
  json j = json::object();
  std::istringstream in(to_ini(c));
  std::string line, section;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.front() == '[') {
      section = line.substr(1, line.find(']') - 1);
      j[section] = json::object();
    } else if (const auto eq = line.find('='); eq != std::string::npos) {
      std::string key = line.substr(0, eq);
      std::string value = line.substr(eq + 1);
      key.erase(key.find_last_not_of(' ') + 1);
      value.erase(0, value.find_first_not_of(' '));
      j[section][key] = value;
    }
  }
  return j;
}

json manifest_base(const RunConfig& c, const std::string& command) {
  json m;
  m["tool"] = "chks";
  m["version"] = version();
  m["command"] = command;
  m["config"] = config_json(c);
  m["seeds"] = {{"phi", c.phi.seed}, {"sigma", c.sigma.seed}};
  m["simd"] = std::string(simd::active_kernels().name);
  m["start_time"] = utc_now();
  return m;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
}

void finish_manifest(json& m, const fs::path& dir, int exit_code, bool completed,
                     const std::string& reason) {
  m["end_time"] = utc_now();
  m["exit_status"] = exit_code;
  m["completed"] = completed;
  m["failure_reason"] = reason;
  write_text(dir / "manifest.json", m.dump(2) + "\n");
}

}  // namespace

const char* version() { return CHKS_VERSION; }

RunOutcome execute_run(const RunConfig& config, const fs::path& dir, std::ostream& log) {
  RunOutcome outcome;
  Field phi0, sigma0;
  std::string ic_error;
  try {
    config.validate();
    phi0 = initial_phi(config.phi, config.grid);
    sigma0 = initial_sigma(config.sigma, config.grid);
    validate_initial_data(phi0, sigma0, config.model);
  } catch (const Error& e) {
    ic_error = e.what();
  }

  fs::create_directories(dir);
  json manifest = manifest_base(config, "run");
  if (!ic_error.empty()) {
    outcome.exit_code = kExitConfig;
    outcome.failure_reason = "invalid configuration: " + ic_error;
    log << "error: " << outcome.failure_reason << "\n";
    finish_manifest(manifest, dir, outcome.exit_code, false, outcome.failure_reason);
    return outcome;
  }

  const bool snapshots = config.output.snapshots != "none";
  const bool binary = config.output.snapshots == "binary";
  const fs::path snap_dir = dir / "snapshots";
  if (snapshots) fs::create_directories(snap_dir);
  std::size_t snap_index = 0;
  auto snapshot = [&](const State& s) {
    char name[32];
    const char* ext = binary ? "bin" : "txt";
    for (const auto& [label, field] : {std::pair<const char*, const Field*>{"phi", &s.phi},
                                       {"sigma", &s.sigma},
                                       {"mu", &s.mu}}) {
      std::snprintf(name, sizeof name, "%s_%05zu.%s", label, snap_index, ext);
      write_snapshot(snap_dir / name, *field, s.t, binary);
    }
    ++snap_index;
  };

  const State initial = make_state(phi0, sigma0, config.model);
  if (snapshots) snapshot(initial);
  DiagnosticsTracker tracker(initial, config.model);
  const std::vector<double> times = report_times(config.t_end, config.report_every);
  std::size_t next_report = 0;
  std::string io_error;
  const StepObserver observer = [&](const State& prev, const State& next, const StepLog& step) {
    tracker.observe(prev, next, step);
    if (next_report < times.size() && next.t == times[next_report]) {
      ++next_report;
      if (snapshots) snapshot(next);
    }
  };

  RunResult result;
  try {
    result = run(phi0, sigma0, config.model, config.solver, config.t_end, config.report_every, observer);
  } catch (const Error& e) {
    outcome.exit_code = kExitConfig;
    outcome.failure_reason = e.what();
    log << "error: " << outcome.failure_reason << "\n";
    finish_manifest(manifest, dir, outcome.exit_code, false, outcome.failure_reason);
    return outcome;
  }

  std::string csv = timeseries_header();
  for (std::size_t k = 0; k < result.series.size(); ++k) {
    TimeseriesRow row;
    row.report = result.series[k];
    const std::size_t n = result.report_step[k];
    if (n > 0 && n <= tracker.steps().size()) {
      const StepDiagnostics& d = tracker.steps()[n - 1];
      row.energy_law_residual = d.energy_law_residual;
      row.entropy_identity_residual = d.entropy_identity_residual;
      row.grad_ln_sigma_sq_cum = d.zeta;
      row.newton_iters = result.steps[n - 1].newton_iters;
      row.dt_used = result.steps[n - 1].dt;
    }
    csv += format_row(row);
  }
  write_text(dir / "timeseries.csv", csv);

  outcome.completed = result.completed;
  outcome.failure_reason = result.failure_reason;
  outcome.exit_code = result.completed ? kExitOk : kExitFailed;
  outcome.t_final = result.final_state.t;
  outcome.steps = result.steps.size();
  if (!result.series.empty()) {
    outcome.E_final = result.series.back().E_total;
    outcome.min_sigma = result.series.front().min_sigma;
    for (const auto& r : result.series) outcome.min_sigma = std::min(outcome.min_sigma, r.min_sigma);
  }
  if (!result.completed) log << "run aborted: " << result.failure_reason << "\n";

  manifest["steps"] = outcome.steps;
  manifest["t_final"] = outcome.t_final;
  manifest["snapshots"] = snap_index;
  manifest["sup_llogl_beta"] = tracker.sup_llogl_beta();
  manifest["sup_gamma_hat_ln_sigma"] = tracker.sup_gamma_hat();
  manifest["zeta"] = tracker.zeta();
  manifest["Z"] = tracker.Z();
  finish_manifest(manifest, dir, outcome.exit_code, outcome.completed, outcome.failure_reason);
  return outcome;
}

int cmd_run(const std::string& config_path, std::ostream& out, std::ostream& err) {
  RunConfig config;
  try {
    config = load_config(config_path);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  const fs::path dir = resolve_output_dir(config.output.dir);
  const RunOutcome o = execute_run(config, dir, err);
  if (o.exit_code == kExitOk) {
    out << "completed: " << o.steps << " steps to t = " << o.t_final << ", output in " << dir.string() << "\n";
  }
  return o.exit_code;
}

int cmd_wsu(const std::string& config_path, std::ostream& out, std::ostream& err) {
  RunConfig config;
  PairedRunConfig pair;
  try {
    config = load_config(config_path);
    pair = paired_config(config);
    pair.validate();
    const auto [phi0, sigma0] = pair.initial(pair.fine_grid());
    validate_initial_data(phi0, sigma0, config.model);
    const auto [cphi, csigma] = (pair.initial_coarse ? pair.initial_coarse : pair.initial)(config.grid);
    validate_initial_data(cphi, csigma, config.model);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  const fs::path dir = resolve_output_dir(config.output.dir);
  fs::create_directories(dir);
  json manifest = manifest_base(config, "wsu");
  WsuResult r;
  try {
    r = run_paired(pair);
  } catch (const Error& e) {
    r.failure_reason = e.what();
  }
  if (!r.completed) {
    err << "wsu aborted: " << r.failure_reason << "\n";
    finish_manifest(manifest, dir, kExitFailed, false, r.failure_reason);
    return kExitFailed;
  }

  std::string csv = "t,R,kl_part,v0dual_part,W,relenin_residual\n";
  for (const WsuPoint& p : r.series) {
    csv += format_double(p.t) + "," + format_double(p.R) + "," + format_double(p.kl) + "," +
           format_double(p.v0dual) + "," + format_double(p.W) + "," + format_double(p.relenin_residual) + "\n";
  }
  write_text(dir / "wsu_series.csv", csv);

  const bool pass = r.gronwall.passed;
  json verdict;
  verdict["verdict"] = pass ? "PASS" : "FAIL";
  verdict["same_initial_data"] = pair.same_initial_data();
  verdict["C_est"] = r.gronwall.C_est;
  verdict["C_max"] = pair.C_max;
  verdict["floor"] = r.floor;
  verdict["max_R"] = r.gronwall.max_R;
  verdict["M"] = r.M;
  verdict["relenin_residual_positive_max"] = r.residual_pos_max;
  verdict["relenin_residual_positive_p95"] = r.residual_pos_p95;
  write_text(dir / "verdict.json", verdict.dump(2) + "\n");

  const int code = pass ? kExitOk : kExitFailed;
  finish_manifest(manifest, dir, code, true, pass ? "" : "Gronwall verdict FAIL");
  out << "wsu " << (pass ? "PASS" : "FAIL") << ": C_est = " << r.gronwall.C_est << ", max R = " << r.gronwall.max_R
      << ", floor = " << r.floor << "\n";
  return code;
}

std::pair<std::string, std::vector<std::string>> parse_set(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error(ErrorCode::ConfigError, "--set expects section.key=v1,v2,..., got '" + spec + "'");
  }
  const std::string key = spec.substr(0, eq);
  if (key.find('.') == std::string::npos) {
    throw Error(ErrorCode::ConfigError, "--set key must be section.key, got '" + key + "'");
  }
  std::vector<std::string> values;
  std::stringstream ss(spec.substr(eq + 1));
  std::string v;
  while (std::getline(ss, v, ',')) {
    if (!v.empty()) values.push_back(v);
  }
  if (values.empty()) throw Error(ErrorCode::ConfigError, "--set " + key + " has no values");
  return {key, values};
}

std::vector<std::map<std::string, std::string>> sweep_cells(
    const std::vector<std::pair<std::string, std::vector<std::string>>>& axes) {
  std::vector<std::map<std::string, std::string>> cells{{}};
  for (const auto& [key, values] : axes) {
    std::vector<std::map<std::string, std::string>> next;
    for (const auto& cell : cells) {
      for (const auto& v : values) {
        auto c = cell;
        c[key] = v;
        next.push_back(std::move(c));
      }
    }
    cells = std::move(next);
  }
  return cells;
}

int cmd_sweep(const std::string& config_path, const std::vector<std::string>& sets, int jobs,
              std::ostream& out, std::ostream& err) {
  if (sets.empty()) return cmd_run(config_path, out, err);
  RunConfig base;
  std::vector<std::pair<std::string, std::vector<std::string>>> axes;
  try {
    base = load_config(config_path);
    for (const auto& s : sets) axes.push_back(parse_set(s));
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  const auto cells = sweep_cells(axes);
  const fs::path root = resolve_output_dir(base.output.dir);
  fs::create_directories(root);

  std::vector<RunOutcome> outcomes(cells.size());
  std::vector<std::string> logs(cells.size());
  std::vector<std::string> dirs(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "cell_%03zu", i);
    dirs[i] = name;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      std::ostringstream log;
      try {
        const RunConfig cfg = with_overrides(base, cells[i]);
        outcomes[i] = execute_run(cfg, root / dirs[i], log);
      } catch (const Error& e) {
        outcomes[i].exit_code = kExitConfig;
        outcomes[i].failure_reason = e.what();
        log << "error: " << e.what() << "\n";
      }
      logs[i] = log.str();
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t n_threads =
      std::min<std::size_t>(cells.size(), jobs > 0 ? static_cast<std::size_t>(jobs) : hw);
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::string csv = "cell,dir";
  for (const auto& [key, values] : axes) csv += "," + key;
  csv += ",exit_code,completed,steps,t_final,E_final,min_sigma,failure_reason\n";
  bool all_ok = true;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const RunOutcome& o = outcomes[i];
    all_ok = all_ok && o.exit_code == kExitOk;
    csv += std::to_string(i) + "," + dirs[i];
    for (const auto& [key, values] : axes) csv += "," + csv_escape(cells[i].at(key));
    csv += "," + std::to_string(o.exit_code) + "," + (o.completed ? "1" : "0") + "," + std::to_string(o.steps) +
           "," + format_double(o.t_final) + "," + format_double(o.E_final) + "," + format_double(o.min_sigma) +
           "," + csv_escape(o.failure_reason) + "\n";
    if (!logs[i].empty()) err << dirs[i] << ": " << logs[i];
  }
  write_text(root / "summary.csv", csv);
  out << "sweep: " << cells.size() << " cells, " << (all_ok ? "all completed" : "some failed") << ", summary in "
      << (root / "summary.csv").string() << "\n";
  return all_ok ? kExitOk : kExitFailed;
}

}  // namespace chks::cli
