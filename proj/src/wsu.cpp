#include "chks/wsu.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <random>
#include <sstream>

namespace chks {

Field restrict_to(const Field& fine, const GridSpec& coarse) {
  const GridSpec& f = fine.grid();
  if (f.dim != coarse.dim || f.lengths[0] != coarse.lengths[0] ||
      (f.dim == 2 && f.lengths[1] != coarse.lengths[1]) || f.nx() % coarse.nx() != 0 ||
      f.ny() % coarse.ny() != 0) {
    throw Error(ErrorCode::IncompatibleGrids, "coarse grid cells must divide fine grid cells");
  }
  const int rx = f.nx() / coarse.nx();
  const int ry = f.ny() / coarse.ny();
  Field out(coarse);
  for (int J = 0; J < coarse.ny(); ++J) {
    for (int I = 0; I < coarse.nx(); ++I) {
      double s = 0.0;
      for (int j = 0; j < ry; ++j) {
        for (int i = 0; i < rx; ++i) {
          s += fine[static_cast<std::size_t>(J * ry + j) * f.nx() + I * rx + i];
        }
      }
      out[static_cast<std::size_t>(J) * coarse.nx() + I] = s / (rx * ry);
    }
  }
  return out;
}

GridSpec PairedRunConfig::fine_grid() const {
  GridSpec g = coarse_grid;
  g.cells[0] *= space_refinement;
  if (g.dim == 2) g.cells[1] *= space_refinement;
  return g;
}

void PairedRunConfig::validate() const {
  auto bad = [](const std::string& m) { throw Error(ErrorCode::InvalidArgument, m); };
  params.validate();
  coarse_grid.validate();
  if (space_refinement < 1 || time_refinement < 1) bad("refinement factors must be >= 1");
  if (!(coarse_dt > 0.0)) bad("coarse dt must be > 0");
  if (!initial) bad("initial data generator missing");
  if (!(t_end > 0.0) || !(compare_every > 0.0)) bad("t_end and compare_every must be > 0");
  if (!(M >= 0.0)) bad("M must be >= 0");
  if (!(C_max >= 0.0)) bad("C_max must be >= 0");
}

GronwallResult gronwall_check(const std::vector<double>& t, const std::vector<double>& R,
                              double floor, double C_max, bool same_initial_data) {
  GronwallResult g;
  g.floor = floor;
  if (R.empty()) {
    g.passed = true;
    return g;
  }
  const double r0 = R.front();
  for (std::size_t k = 0; k < R.size(); ++k) {
    g.max_R = std::max(g.max_R, R[k]);
    if (k == 0 || !(t[k] > t[0])) continue;
    const double excess = R[k] - floor;
    if (!(excess > r0)) continue;
    const double c = r0 > 0.0 ? std::log(excess / r0) / (t[k] - t[0])
                              : std::numeric_limits<double>::infinity();
    g.C_est = std::max(g.C_est, c);
  }
  g.passed = g.C_est <= C_max;
  if (same_initial_data && !(g.max_R <= 10.0 * floor || g.max_R == 0.0)) g.passed = false;
  return g;
}

void finish_relenin(std::vector<WsuPoint>& s) {
  const std::size_t n = s.size();
  for (std::size_t k = 0; k < n; ++k) {
    if (n < 2) {
      s[k].dRdt = 0.0;
    } else if (k == 0) {
      s[k].dRdt = (s[1].R - s[0].R) / (s[1].t - s[0].t);
    } else if (k + 1 == n) {
      s[k].dRdt = (s[k].R - s[k - 1].R) / (s[k].t - s[k - 1].t);
    } else {
      s[k].dRdt = (s[k + 1].R - s[k - 1].R) / (s[k + 1].t - s[k - 1].t);
    }
    s[k].relenin_residual = s[k].dRdt + s[k].W - s[k].rhs;
  }
}

namespace {

struct Trajectory {
  std::vector<State> states;  // at t = 0 and every comparison time
  std::string failure;
};

Trajectory trajectory(const GridSpec& grid, const InitialData& init, const ModelParams& params,
                      double dt, double t_end, double every) {
  auto [phi0, sigma0] = init(grid);
  Trajectory tr;
  tr.states.push_back(make_state(phi0, sigma0, params));
  const std::vector<double> times = report_times(t_end, every);
  std::size_t next = 0;
  const RunResult r = run(phi0, sigma0, params, SolverConfig::fixed(dt), t_end, every,
                          [&](const State&, const State& s, const StepLog&) {
                            if (next < times.size() && s.t == times[next]) {
                              tr.states.push_back(s);
                              ++next;
                            }
                          });
  if (!r.completed) tr.failure = r.failure_reason;
  return tr;
}

}  // namespace

WsuResult run_paired(const PairedRunConfig& cfg) {
  cfg.validate();
  const GridSpec fine = cfg.fine_grid();
  const InitialData coarse_init = cfg.same_initial_data() ? cfg.initial : cfg.initial_coarse;
  const double fine_dt = cfg.coarse_dt / cfg.time_refinement;

  auto fine_future = std::async(std::launch::async, [&] {
    return trajectory(fine, cfg.initial, cfg.params, fine_dt, cfg.t_end, cfg.compare_every);
  });
  const Trajectory coarse =
      trajectory(cfg.coarse_grid, coarse_init, cfg.params, cfg.coarse_dt, cfg.t_end, cfg.compare_every);
  const Trajectory strong = fine_future.get();

  WsuResult out;
  if (!coarse.failure.empty() || !strong.failure.empty()) {
    out.failure_reason = !coarse.failure.empty() ? "coarse run: " + coarse.failure
                                                  : "fine run: " + strong.failure;
    return out;
  }
  if (coarse.states.size() != strong.states.size()) {
    out.failure_reason = "comparison times do not match";
    return out;
  }

  double smax = 0.0;
  for (const State& s : strong.states) smax = std::max(smax, s.sigma.max());
  out.M = cfg.M > 0.0 ? cfg.M : default_M(cfg.params.chi, smax);

  auto centered_R = [&](const Field& phi, const Field& sigma, const Field& phit, const Field& sigmat) {
    Field phit_centered = phit;
    const double shift = mean(phi) - mean(phit);
    for (std::size_t c = 0; c < phit_centered.size(); ++c) phit_centered[c] += shift;
    return relative_energy(phi, sigma, phit_centered, sigmat, out.M);
  };

  for (std::size_t k = 0; k < coarse.states.size(); ++k) {
    const State& w = coarse.states[k];
    const Field phit = restrict_to(strong.states[k].phi, cfg.coarse_grid);
    const Field sigmat = restrict_to(strong.states[k].sigma, cfg.coarse_grid);
    const RelEnergyReport rel = centered_R(w.phi, w.sigma, phit, sigmat);
    WsuPoint p;
    p.t = w.t;
    p.R = rel.R;
    p.kl = rel.kl_sigma;
    p.v0dual = rel.v0dual_part;
    p.W = relative_dissipation(w.phi, w.sigma, phit, sigmat, out.M, cfg.params);
    p.rhs = relative_energy_rhs(w.phi, w.sigma, phit, sigmat, out.M, cfg.params);
    out.series.push_back(p);
  }
  finish_relenin(out.series);

  std::vector<double> pos, t, R;
  for (const WsuPoint& p : out.series) {
    pos.push_back(std::max(0.0, p.relenin_residual));
    t.push_back(p.t);
    R.push_back(p.R);
  }
  out.residual_pos_max = *std::max_element(pos.begin(), pos.end());
  std::sort(pos.begin(), pos.end());
  const std::size_t idx = static_cast<std::size_t>(std::ceil(0.95 * pos.size())) - 1;
  out.residual_pos_p95 = pos[std::min(idx, pos.size() - 1)];
  // Restriction error of the reference data alone; equals R(0) for same-data pairs.
  if (cfg.same_initial_data()) {
    out.floor = out.series.front().R;
  } else {
    const auto [phi_c, sigma_c] = cfg.initial(cfg.coarse_grid);
    const State& s0 = strong.states.front();
    out.floor = centered_R(phi_c, sigma_c, restrict_to(s0.phi, cfg.coarse_grid),
                           restrict_to(s0.sigma, cfg.coarse_grid)).R;
  }
  out.gronwall = gronwall_check(t, R, out.floor, cfg.C_max, cfg.same_initial_data());
  out.completed = true;
  return out;
}

PointwiseReport pointwise_inequality_suite(std::size_t samples, std::uint64_t seed) {
  PointwiseReport rep;
  rep.samples = samples;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> logs(-12.0, 12.0);
  std::uniform_real_distribution<double> logr(std::log(0.05), std::log(20.0));
  const double eps = std::numeric_limits<double>::epsilon();

  auto record = [&](std::size_t& counter, const char* name, double lhs, double rhs,
                    const std::string& tuple) {
    if (lhs - rhs > 8.0 * eps * (std::abs(lhs) + std::abs(rhs))) {
      ++counter;
      if (rep.first_violation.empty()) {
        std::ostringstream os;
        os.precision(17);
        os << name << ": " << tuple << " lhs=" << lhs << " rhs=" << rhs;
        rep.first_violation = os.str();
      }
    }
  };
  auto fmt = [](std::initializer_list<double> v) {
    std::ostringstream os;
    os.precision(17);
    for (double x : v) os << x << ' ';
    return os.str();
  };

  for (std::size_t k = 0; k < samples; ++k) {
    // Nudge open-interval samples away from the endpoints.
    const double p = 0.999999 * unit(rng);
    const double pt = 0.999999 * unit(rng);
    const double s = std::exp(logs(rng));
    const double st = std::exp(logs(rng));
    const double kl = relative_entropy_density(s, st);

    const double r = std::exp(logr(rng));
    const double w = r * 0.999999 * unit(rng);
    const double wt = r * 0.999999 * unit(rng);
    // fenchel_gap = rhs - lhs; compare the two sides so the rounding slack scales with them.
    const double gap = fenchel_gap(r, w, wt, s, st);
    const double lhs_f = (w - wt) * (s - st);
    record(rep.fenchel_violations, "fenchel_gap", lhs_f, lhs_f + gap, fmt({r, w, wt, s, st}));

    const double e = p - pt;
    record(rep.cross_violations, "cross", (s - st) * e, 4.0 * (st * e * e + kl), fmt({p, pt, s, st}));

    const double d = std::sqrt(s) - std::sqrt(st);
    record(rep.sqrt_violations, "sqrt", d * d, kl, fmt({s, st}));

    record(rep.lambda_violations, "Lambda", 0.0, sqrt_exp_bregman(std::log(s), std::log(st)),
           fmt({s, st}));
  }
  return rep;
}

}  // namespace chks
