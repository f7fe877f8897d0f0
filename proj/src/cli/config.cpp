#include "chks/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace chks::cli {

namespace {

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::ConfigError, msg); }

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    config_error(key + ": expected a number, got '" + v + "'");
  }
}

long long to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long i = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    config_error(key + ": expected an integer, got '" + v + "'");
  }
}

std::string alpha_table_string(const AlphaLogistic& lg) {
  std::string out;
  for (const auto& [r, h] : lg.h_table) {
    if (!out.empty()) out += ",";
    out += fmt(r) + ":" + fmt(h);
  }
  return out;
}

AlphaLogistic& logistic(RunConfig& c) {
  if (!std::holds_alternative<AlphaLogistic>(c.model.alpha.variant)) {
    c.model.alpha = AlphaSpec::logistic(1.0, 1.0);
  }
  return std::get<AlphaLogistic>(c.model.alpha.variant);
}

// The model keeps one alpha variant; parameters of the other are stashed here
// while parsing so key order does not matter.
struct AlphaDraft {
  std::string type = "constant";
  double c = 0.0;
  double ell = 1.0;
  double p = 1.0;
  double box = 10.0;
  std::vector<std::pair<double, double>> table;
};

AlphaDraft draft_from(const AlphaSpec& a) {
  AlphaDraft d;
  if (const auto* c = std::get_if<AlphaConstant>(&a.variant)) {
    d.c = c->c;
  } else {
    const auto& lg = std::get<AlphaLogistic>(a.variant);
    d.type = "logistic";
    d.ell = lg.ell;
    d.p = lg.p;
    d.box = lg.sigma_box_max;
    d.table = lg.h_table;
  }
  return d;
}

struct Key {
  std::string section;
  std::string name;
  std::function<void(RunConfig&, AlphaDraft&, const std::string&)> set;
  std::function<std::string(const RunConfig&, const AlphaDraft&)> get;
};

const std::vector<Key>& key_table() {
  static const std::vector<Key> table = [] {
    std::vector<Key> k;
    auto num = [&](const char* sec, const char* name, auto member) {
      const std::string full = std::string(sec) + "." + name;
      k.push_back({sec, name,
                   [=](RunConfig& c, AlphaDraft&, const std::string& v) { member(c) = to_double(full, v); },
                   [=](const RunConfig& c, const AlphaDraft&) {
                     return fmt(member(const_cast<RunConfig&>(c)));
                   }});
    };
    auto integer = [&](const char* sec, const char* name, auto member) {
      const std::string full = std::string(sec) + "." + name;
      k.push_back({sec, name,
                   [=](RunConfig& c, AlphaDraft&, const std::string& v) {
                     member(c) = static_cast<std::remove_reference_t<decltype(member(c))>>(to_int(full, v));
                   },
                   [=](const RunConfig& c, const AlphaDraft&) {
                     return std::to_string(member(const_cast<RunConfig&>(c)));
                   }});
    };
    auto text = [&](const char* sec, const char* name, auto member) {
      k.push_back({sec, name, [=](RunConfig& c, AlphaDraft&, const std::string& v) { member(c) = v; },
                   [=](const RunConfig& c, const AlphaDraft&) { return member(const_cast<RunConfig&>(c)); }});
    };
    auto draft = [&](const char* name, auto member) {
      const std::string full = std::string("model.") + name;
      k.push_back({"model", name,
                   [=](RunConfig&, AlphaDraft& d, const std::string& v) { member(d) = to_double(full, v); },
                   [=](const RunConfig&, const AlphaDraft& d) {
                     return fmt(member(const_cast<AlphaDraft&>(d)));
                   }});
    };

    integer("domain", "dim", [](RunConfig& c) -> int& { return c.grid.dim; });
    k.push_back({"domain", "cells",
                 [](RunConfig& c, AlphaDraft&, const std::string& v) {
                   const auto parts = split(v, ',');
                   if (parts.empty() || parts.size() > 2) config_error("domain.cells: expected 'n' or 'nx,ny'");
                   c.grid.cells[0] = static_cast<int>(to_int("domain.cells", parts[0]));
                   c.grid.cells[1] = parts.size() == 2 ? static_cast<int>(to_int("domain.cells", parts[1])) : c.grid.cells[0];
                 },
                 [](const RunConfig& c, const AlphaDraft&) {
                   return c.grid.dim == 2 ? std::to_string(c.grid.cells[0]) + "," + std::to_string(c.grid.cells[1])
                                          : std::to_string(c.grid.cells[0]);
                 }});
    k.push_back({"domain", "lengths",
                 [](RunConfig& c, AlphaDraft&, const std::string& v) {
                   const auto parts = split(v, ',');
                   if (parts.empty() || parts.size() > 2) config_error("domain.lengths: expected 'L' or 'Lx,Ly'");
                   c.grid.lengths[0] = to_double("domain.lengths", parts[0]);
                   c.grid.lengths[1] = parts.size() == 2 ? to_double("domain.lengths", parts[1]) : c.grid.lengths[0];
                 },
                 [](const RunConfig& c, const AlphaDraft&) {
                   return c.grid.dim == 2 ? fmt(c.grid.lengths[0]) + "," + fmt(c.grid.lengths[1])
                                          : fmt(c.grid.lengths[0]);
                 }});

    num("time", "dt", [](RunConfig& c) -> double& { return c.solver.dt; });
    num("time", "dt_min", [](RunConfig& c) -> double& { return c.solver.dt_min; });
    num("time", "dt_max", [](RunConfig& c) -> double& { return c.solver.dt_max; });
    num("time", "t_end", [](RunConfig& c) -> double& { return c.t_end; });
    num("time", "report_every", [](RunConfig& c) -> double& { return c.report_every; });

    num("model", "chi", [](RunConfig& c) -> double& { return c.model.chi; });
    num("model", "lambda", [](RunConfig& c) -> double& { return c.model.lambda; });
    num("model", "epsilon", [](RunConfig& c) -> double& { return c.model.epsilon; });
    num("model", "delta_safe", [](RunConfig& c) -> double& { return c.model.delta_safe; });
    k.push_back({"model", "alpha_type",
                 [](RunConfig&, AlphaDraft& d, const std::string& v) { d.type = v; },
                 [](const RunConfig&, const AlphaDraft& d) { return d.type; }});
    draft("alpha_c", [](AlphaDraft& d) -> double& { return d.c; });
    draft("alpha_ell", [](AlphaDraft& d) -> double& { return d.ell; });
    draft("alpha_p", [](AlphaDraft& d) -> double& { return d.p; });
    draft("alpha_sigma_box", [](AlphaDraft& d) -> double& { return d.box; });
    k.push_back({"model", "alpha_h_table",
                 [](RunConfig&, AlphaDraft& d, const std::string& v) {
                   d.table.clear();
                   if (trim(v).empty()) return;
                   for (const auto& node : split(v, ',')) {
                     const auto rh = split(node, ':');
                     if (rh.size() != 2) config_error("model.alpha_h_table: expected 'r:h,r:h,...'");
                     d.table.emplace_back(to_double("model.alpha_h_table", rh[0]),
                                          to_double("model.alpha_h_table", rh[1]));
                   }
                 },
                 [](const RunConfig&, const AlphaDraft& d) {
                   AlphaLogistic lg;
                   lg.h_table = d.table;
                   return alpha_table_string(lg);
                 }});

    text("ic", "phi_type", [](RunConfig& c) -> std::string& { return c.phi.type; });
    num("ic", "phi_value", [](RunConfig& c) -> double& { return c.phi.value; });
    num("ic", "phi_mean", [](RunConfig& c) -> double& { return c.phi.mean; });
    num("ic", "phi_amplitude", [](RunConfig& c) -> double& { return c.phi.amplitude; });
    integer("ic", "phi_mode", [](RunConfig& c) -> int& { return c.phi.mode; });
    integer("ic", "phi_seed", [](RunConfig& c) -> std::uint64_t& { return c.phi.seed; });
    num("ic", "phi_center", [](RunConfig& c) -> double& { return c.phi.center; });
    num("ic", "phi_width", [](RunConfig& c) -> double& { return c.phi.width; });
    text("ic", "sigma_type", [](RunConfig& c) -> std::string& { return c.sigma.type; });
    num("ic", "sigma_value", [](RunConfig& c) -> double& { return c.sigma.value; });
    num("ic", "sigma_mean", [](RunConfig& c) -> double& { return c.sigma.mean; });
    num("ic", "sigma_amplitude", [](RunConfig& c) -> double& { return c.sigma.amplitude; });
    integer("ic", "sigma_mode", [](RunConfig& c) -> int& { return c.sigma.mode; });
    num("ic", "sigma_center", [](RunConfig& c) -> double& { return c.sigma.center; });
    num("ic", "sigma_width", [](RunConfig& c) -> double& { return c.sigma.width; });
    num("ic", "sigma_mass", [](RunConfig& c) -> double& { return c.sigma.mass; });
    num("ic", "sigma_background", [](RunConfig& c) -> double& { return c.sigma.background; });
    integer("ic", "sigma_seed", [](RunConfig& c) -> std::uint64_t& { return c.sigma.seed; });
    num("ic", "sigma_floor", [](RunConfig& c) -> double& { return c.sigma.floor; });

    num("solver", "newton_tol", [](RunConfig& c) -> double& { return c.solver.newton_tol; });
    integer("solver", "newton_max_iters", [](RunConfig& c) -> int& { return c.solver.newton_max_iters; });
    num("solver", "backtrack_factor", [](RunConfig& c) -> double& { return c.solver.backtrack_factor; });
    integer("solver", "max_halvings", [](RunConfig& c) -> int& { return c.solver.max_halvings; });
    num("solver", "krylov_tol", [](RunConfig& c) -> double& { return c.solver.krylov_tol; });
    integer("solver", "easy_newton_iters", [](RunConfig& c) -> int& { return c.solver.easy_newton_iters; });
    integer("solver", "grow_after", [](RunConfig& c) -> int& { return c.solver.grow_after; });
    num("solver", "grow_factor", [](RunConfig& c) -> double& { return c.solver.grow_factor; });

    text("output", "dir", [](RunConfig& c) -> std::string& { return c.output.dir; });
    text("output", "snapshots", [](RunConfig& c) -> std::string& { return c.output.snapshots; });

    integer("wsu", "space_refinement", [](RunConfig& c) -> int& { return c.wsu.space_refinement; });
    integer("wsu", "time_refinement", [](RunConfig& c) -> int& { return c.wsu.time_refinement; });
    num("wsu", "compare_every", [](RunConfig& c) -> double& { return c.wsu.compare_every; });
    num("wsu", "M", [](RunConfig& c) -> double& { return c.wsu.M; });
    num("wsu", "C_max", [](RunConfig& c) -> double& { return c.wsu.C_max; });
    num("wsu", "coarse_sigma_scale", [](RunConfig& c) -> double& { return c.wsu.coarse_sigma_scale; });
    num("wsu", "coarse_phi_shift", [](RunConfig& c) -> double& { return c.wsu.coarse_phi_shift; });
    return k;
  }();
  return table;
}

void finish_alpha(RunConfig& c, const AlphaDraft& d) {
  if (d.type == "constant") {
    c.model.alpha = AlphaSpec::constant(d.c);
  } else if (d.type == "logistic") {
    AlphaLogistic& lg = logistic(c);
    lg.ell = d.ell;
    lg.p = d.p;
    lg.sigma_box_max = d.box;
    lg.h_table = d.table;
  } else {
    config_error("model.alpha_type: expected constant or logistic, got '" + d.type + "'");
  }
}

}  // namespace

void RunConfig::validate() const {
  try {
    grid.validate();
    model.validate();
    solver.validate();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    config_error(e.what());
  }
  if (!(t_end >= 0.0)) config_error("time.t_end must be >= 0");
  if (!(report_every >= 0.0)) config_error("time.report_every must be >= 0");
  static const std::set<std::string> phi_types{"constant", "cosine", "random_perturbation", "tanh_interface"};
  static const std::set<std::string> sigma_types{"constant", "cosine", "gaussian_bump", "random_positive"};
  if (!phi_types.count(phi.type)) config_error("ic.phi_type: unknown type '" + phi.type + "'");
  if (!sigma_types.count(sigma.type)) config_error("ic.sigma_type: unknown type '" + sigma.type + "'");
  if (phi.type == "tanh_interface" && !(phi.width > 0.0)) config_error("ic.phi_width must be > 0");
  if (sigma.type == "gaussian_bump" && !(sigma.width > 0.0)) config_error("ic.sigma_width must be > 0");
  if (output.snapshots != "none" && output.snapshots != "text" && output.snapshots != "binary") {
    config_error("output.snapshots: expected none, text or binary");
  }
  if (output.dir.empty()) config_error("output.dir must not be empty");
  if (wsu.space_refinement < 1 || wsu.time_refinement < 1) config_error("wsu refinement factors must be >= 1");
  if (!(wsu.compare_every > 0.0)) config_error("wsu.compare_every must be > 0");
  if (!(wsu.M >= 0.0)) config_error("wsu.M must be >= 0");
  if (!(wsu.C_max >= 0.0)) config_error("wsu.C_max must be >= 0");
  if (!(wsu.coarse_sigma_scale > 0.0)) config_error("wsu.coarse_sigma_scale must be > 0");
}

RunConfig parse_config(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    config_error(std::string("malformed INI: ") + e.message() + " at line " + std::to_string(e.line()));
  }

  RunConfig c;
  AlphaDraft draft;
  std::set<std::string> seen;
  const auto& table = key_table();
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      config_error("key '" + section + "' outside of a section");
    }
    const bool known = std::any_of(table.begin(), table.end(), [&](const Key& k) { return k.section == section; });
    if (!known) config_error("unknown section [" + section + "]");
    for (const auto& [name, value] : body) {
      const auto it = std::find_if(table.begin(), table.end(), [&](const Key& k) {
        return k.section == section && k.name == name;
      });
      if (it == table.end()) config_error("unknown key [" + section + "] " + name);
      it->set(c, draft, trim(value.data()));
      seen.insert(section + "." + name);
    }
  }
  if (c.grid.dim == 2 && !seen.count("domain.cells")) c.grid.cells[1] = c.grid.cells[0];
  if (c.grid.dim == 2 && !seen.count("domain.lengths")) c.grid.lengths[1] = c.grid.lengths[0];
  if (c.grid.dim == 1) {
    c.grid.cells[1] = 1;
    c.grid.lengths[1] = 1.0;
  }
  if (!seen.count("time.dt_max")) c.solver.dt_max = c.solver.dt;
  if (!seen.count("time.dt_min")) c.solver.dt_min = c.solver.dt / 1024.0;
  finish_alpha(c, draft);
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_ini(const RunConfig& config) {
  const AlphaDraft draft = draft_from(config.model.alpha);
  std::ostringstream out;
  std::string section;
  for (const Key& k : key_table()) {
    if (k.section != section) {
      if (!section.empty()) out << "\n";
      section = k.section;
      out << "[" << section << "]\n";
    }
    out << k.name << " = " << k.get(config, draft) << "\n";
  }
  return out.str();
}

RunConfig with_overrides(const RunConfig& config, const std::map<std::string, std::string>& overrides) {
  if (overrides.empty()) return config;
  // dt_min and dt_max follow dt unless given explicitly.
  std::map<std::string, std::string> ov = overrides;
  if (ov.count("time.dt")) {
    const double dt = to_double("time.dt", ov["time.dt"]);
    if (!ov.count("time.dt_max") && config.solver.dt_max == config.solver.dt) ov["time.dt_max"] = fmt(dt);
    if (!ov.count("time.dt_min") && config.solver.dt_min == config.solver.dt / 1024.0) {
      ov["time.dt_min"] = fmt(dt / 1024.0);
    }
  }
  // Rewrite matching lines of the canonical text.
  std::istringstream in(to_ini(config));
  std::ostringstream out;
  std::set<std::string> used;
  std::string line, section;
  while (std::getline(in, line)) {
    if (!line.empty() && line.front() == '[') {
      section = line.substr(1, line.find(']') - 1);
    } else if (const auto eq = line.find('='); eq != std::string::npos) {
      const std::string key = section + "." + trim(line.substr(0, eq));
      if (const auto it = ov.find(key); it != ov.end()) {
        line = trim(line.substr(0, eq)) + " = " + it->second;
        used.insert(key);
      }
    }
    out << line << "\n";
  }
  for (const auto& [key, value] : ov) {
    if (!used.count(key)) config_error("unknown override key '" + key + "' (expected section.key)");
  }
  return parse_config(out.str());
}

Field initial_phi(const PhiIc& ic, const GridSpec& g) {
  const double pi = std::numbers::pi;
  const double lx = g.lengths[0];
  const double ly = g.lengths[1];
  if (ic.type == "constant") return Field(g, ic.value);
  if (ic.type == "cosine") {
    return Field::from_function(g, [&](double x, double y) {
      double v = std::cos(2.0 * pi * ic.mode * x / lx);
      if (g.dim == 2) v *= std::cos(2.0 * pi * ic.mode * y / ly);
      return ic.mean + ic.amplitude * v;
    });
  }
  if (ic.type == "random_perturbation") {
    std::mt19937_64 rng(ic.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Field f(g);
    for (std::size_t c = 0; c < f.size(); ++c) f[c] = ic.mean + ic.amplitude * u(rng);
    return f;
  }
  if (ic.type == "tanh_interface") {
    return Field::from_function(g, [&](double x, double) {
      return ic.amplitude * std::tanh((x - ic.center * lx) / (ic.width * lx));
    });
  }
  config_error("ic.phi_type: unknown type '" + ic.type + "'");
}

Field initial_sigma(const SigmaIc& ic, const GridSpec& g) {
  const double pi = std::numbers::pi;
  const double lx = g.lengths[0];
  const double ly = g.lengths[1];
  if (ic.type == "constant") return Field(g, ic.value);
  if (ic.type == "cosine") {
    return Field::from_function(g, [&](double x, double y) {
      double v = std::cos(2.0 * pi * ic.mode * x / lx);
      if (g.dim == 2) v *= std::cos(2.0 * pi * ic.mode * y / ly);
      return ic.mean + ic.amplitude * v;
    });
  }
  if (ic.type == "gaussian_bump") {
    const double w = ic.width * lx;
    Field bump = Field::from_function(g, [&](double x, double y) {
      const double dx = x - ic.center * lx;
      const double dy = g.dim == 2 ? y - ic.center * ly : 0.0;
      return std::exp(-(dx * dx + dy * dy) / (2.0 * w * w));
    });
    const double scale = ic.mass / integrate(bump);
    for (std::size_t c = 0; c < bump.size(); ++c) bump[c] = ic.background + scale * bump[c];
    return bump;
  }
  if (ic.type == "random_positive") {
    std::mt19937_64 rng(ic.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Field f(g);
    for (std::size_t c = 0; c < f.size(); ++c) f[c] = ic.floor + ic.amplitude * u(rng);
    return f;
  }
  config_error("ic.sigma_type: unknown type '" + ic.type + "'");
}

PairedRunConfig paired_config(const RunConfig& c) {
  PairedRunConfig p;
  p.params = c.model;
  p.coarse_grid = c.grid;
  p.coarse_dt = c.solver.dt;
  p.space_refinement = c.wsu.space_refinement;
  p.time_refinement = c.wsu.time_refinement;
  const PhiIc phi = c.phi;
  const SigmaIc sigma = c.sigma;
  p.initial = [phi, sigma](const GridSpec& g) {
    return std::pair{initial_phi(phi, g), initial_sigma(sigma, g)};
  };
  if (c.wsu.coarse_sigma_scale != 1.0 || c.wsu.coarse_phi_shift != 0.0) {
    const double scale = c.wsu.coarse_sigma_scale;
    const double shift = c.wsu.coarse_phi_shift;
    p.initial_coarse = [phi, sigma, scale, shift](const GridSpec& g) {
      Field f = initial_phi(phi, g);
      Field s = initial_sigma(sigma, g);
      for (std::size_t k = 0; k < f.size(); ++k) f[k] += shift;
      s *= scale;
      return std::pair{std::move(f), std::move(s)};
    };
  }
  p.t_end = c.t_end;
  p.compare_every = c.wsu.compare_every;
  p.M = c.wsu.M;
  p.C_max = c.wsu.C_max;
  return p;
}

}  // namespace chks::cli
