// Acceptance suite: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "chks/cli/commands.hpp"
#include "chks/cli/config.hpp"
#include "chks/diagnostics.hpp"
#include "chks/functionals.hpp"
#include "chks/solver.hpp"
#include "chks/wsu.hpp"

using namespace chks;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Smooth benchmark: L = 2 pi, phi0 = 0.3 cos x, sigma0 = 1 + 0.5 cos x.
const double kL = 2 * std::numbers::pi;

Field bench_phi(const GridSpec& g) {
  return Field::from_function(g, [](double x, double) { return 0.3 * std::cos(x); });
}
Field bench_sigma(const GridSpec& g) {
  return Field::from_function(g, [](double x, double) { return 1.0 + 0.5 * std::cos(x); });
}

ModelParams bench_params(double chi = 1.0, AlphaSpec alpha = AlphaSpec::constant(0.0)) {
  ModelParams p;
  p.chi = chi;
  p.lambda = 0.5;
  p.alpha = alpha;
  return p;
}

Verdict mass_conservation() {
  const auto t0 = std::chrono::steady_clock::now();
  const GridSpec g = GridSpec::line(64, kL);
  const Field phi0 = bench_phi(g);
  const double m0 = integrate(phi0);
  double worst = 0.0;
  std::size_t steps = 0;
  const RunResult r = run(phi0, bench_sigma(g), bench_params(), SolverConfig::fixed(1e-3), 1.0, 0.0,
                          [&](const State&, const State& next, const StepLog&) {
                            worst = std::max(worst, std::abs(integrate(next.phi) - m0));
                            ++steps;
                          });
  const double secs = seconds_since(t0);
  const bool ok = r.completed && steps == 1000 && worst <= 1e-9 * g.volume() && secs < 10.0;
  return {ok, fmt("%zu steps, max |mass drift| %.3g (limit %.3g), %.2f s", steps, worst, 1e-9 * g.volume(), secs)};
}

Verdict minimum_principle() {
  const GridSpec g = GridSpec::line(64, kL);
  const AlphaSpec alphas[] = {AlphaSpec::constant(0.0), AlphaSpec::constant(-1.0), AlphaSpec::logistic(1.0, 1.0)};
  std::size_t violations = 0, steps = 0, incomplete = 0;
  double lowest = INFINITY;
  for (double chi : {0.0, 1.0, 2.0}) {
    for (const AlphaSpec& a : alphas) {
      const RunResult r = run(bench_phi(g), bench_sigma(g), bench_params(chi, a), SolverConfig::fixed(1e-3), 1.0,
                              0.0, [&](const State&, const State& next, const StepLog&) {
                                ++steps;
                                lowest = std::min(lowest, next.sigma.min());
                                violations += !(next.sigma.min() > 0.0);
                              });
      incomplete += !r.completed;
    }
  }
  return {violations == 0 && incomplete == 0,
          fmt("9 runs, %zu steps, %zu violations, %zu incomplete, min sigma %.6g", steps, violations, incomplete,
              lowest)};
}

Verdict sigma_mass_bracket() {
  const GridSpec g = GridSpec::line(64, kL);
  const double tau = 1e-3;
  double worst = 0.0;  // largest excursion relative to the half-width 5 tau
  bool ok = true;
  for (double c : {-1.0, 0.0, 0.5}) {
    const Field s0 = bench_sigma(g);
    const double m0 = integrate(s0);
    const RunResult r = run(bench_phi(g), s0, bench_params(1.0, AlphaSpec::constant(c)), SolverConfig::fixed(tau),
                            1.0, 0.0, [&](const State&, const State& next, const StepLog&) {
                              const double e = std::exp(c * next.t);
                              const double ratio = integrate(next.sigma) / m0;
                              worst = std::max(worst, std::abs(ratio / e - 1.0) / (5 * tau));
                              ok = ok && ratio >= e * (1 - 5 * tau) && ratio <= e * (1 + 5 * tau);
                            });
    ok = ok && r.completed;
  }
  return {ok, fmt("c in {-1, 0, 0.5}, tau 1e-3: max |ratio/e^{ct} - 1| = %.3g of the 5 tau band", worst)};
}

// Scharfetter-Gummel face flux of grad sigma + sigma grad w, w = chi (1 - phi).
double max_sg_flux(const Field& sigma, const Field& phi, double chi) {
  const GridSpec& g = sigma.grid();
  const double h = g.spacing(0);
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < g.size(); ++i) {
    const double dw = chi * ((1 - phi[i + 1]) - (1 - phi[i]));
    const double f = (bernoulli(-dw) * sigma[i + 1] - bernoulli(dw) * sigma[i]) / h;
    worst = std::max(worst, std::abs(f));
  }
  return worst;
}

struct GibbsState {
  State prev, next;
  double dt = 0.0;
  double flux = 0.0;
  int iterations = 0;
};

GibbsState gibbs_state(const ModelParams& p) {
  const GridSpec g = GridSpec::line(64, kL);
  const Field phi = bench_phi(g);
  Field sigma = Field::from_function(g, [](double x, double) { return 1.0 + 0.5 * std::cos(2 * x); });
  GibbsState out;
  out.dt = 10.0;
  for (out.iterations = 0; out.iterations < 500; ++out.iterations) {
    Field next = step_sigma(sigma, phi, p, out.dt);
    out.prev = make_state(phi, sigma, p);
    out.next = make_state(phi, next, p, out.dt);
    sigma = std::move(next);
    out.flux = max_sg_flux(sigma, phi, p.chi);
    if (out.flux < 1e-12) break;
  }
  return out;
}

Verdict gibbs_exactness() {
  const ModelParams p = bench_params(1.0);
  const GibbsState gs = gibbs_state(p);
  const Field& s = gs.next.sigma;
  const Field& phi = gs.next.phi;
  double worst = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      const double wi = p.chi * (1 - phi[i]), wj = p.chi * (1 - phi[j]);
      worst = std::max(worst, std::abs(s[i] / s[j] / std::exp(-(wi - wj)) - 1.0));
    }
  }
  const bool ok = gs.flux < 1e-12 && worst <= 1e-10;
  return {ok, fmt("flux norm %.3g after %d solves, max ratio error %.3g", gs.flux, gs.iterations + 1, worst)};
}

Verdict decoupled_dissipation() {
  cli::PhiIc phi_ic;
  phi_ic.type = "random_perturbation";
  phi_ic.mean = 0.0;
  phi_ic.amplitude = 0.3;
  phi_ic.seed = 11;
  cli::SigmaIc sigma_ic;
  sigma_ic.type = "random_positive";
  sigma_ic.amplitude = 0.5;
  sigma_ic.seed = 12;
  const GridSpec g = GridSpec::line(64, kL);
  ModelParams p = bench_params(0.0);
  const Field phi0 = cli::initial_phi(phi_ic, g);
  const Field sigma0 = cli::initial_sigma(sigma_ic, g);
  double worst_E = -INFINITY, worst_S = -INFINITY;
  std::size_t steps = 0;
  const RunResult r = run(phi0, sigma0, p, SolverConfig::fixed(1e-3), 1.0, 0.0,
                          [&](const State& prev, const State& next, const StepLog&) {
                            const EnergyParts a = energy(prev.phi, prev.sigma, p);
                            const EnergyParts b = energy(next.phi, next.sigma, p);
                            worst_E = std::max(worst_E, b.total() - a.total());
                            worst_S = std::max(worst_S, b.sigma_entropy - a.sigma_entropy);
                            ++steps;
                          });
  const bool ok = r.completed && worst_E <= 1e-12 && worst_S <= 1e-12;
  return {ok, fmt("%zu steps, max increase of E %.3g, of int sigma(ln sigma - 1) %.3g", steps, worst_E, worst_S)};
}

struct RefinementLevel {
  double tau = 0.0;
  double energy_pos = 0.0;
  double energy_abs = 0.0;
  double entropy = 0.0;
};

const std::vector<RefinementLevel>& refinement_levels() {
  static const std::vector<RefinementLevel> levels = [] {
    std::vector<RefinementLevel> out;
    const GridSpec g = GridSpec::line(64, kL);
    const ModelParams p = bench_params();
    for (double tau : {4e-3, 2e-3, 1e-3}) {
      const Field phi0 = bench_phi(g), sigma0 = bench_sigma(g);
      DiagnosticsTracker tracker(make_state(phi0, sigma0, p), p);
      const RunResult r = run(phi0, sigma0, p, SolverConfig::fixed(tau), 1.0, 0.0, tracker.observer());
      if (!r.completed) throw Error(ErrorCode::SolverDiverged, r.failure_reason);
      out.push_back({tau, tracker.max_positive_energy_residual(), tracker.max_abs_energy_residual(),
                     tracker.max_entropy_residual()});
    }
    return out;
  }();
  return levels;
}

Verdict energy_law_refinement() {
  // The convex-splitting step is dissipative, so the positive part is zero at
  // every level; the halving factor is then required of |residual| as well.
  const auto& L = refinement_levels();
  bool ok = true;
  std::string detail;
  for (std::size_t k = 0; k < L.size(); ++k) {
    ok = ok && L[k].energy_pos <= 1e-12;
    detail += fmt("tau %.0e: pos %.3g abs %.3g", L[k].tau, L[k].energy_pos, L[k].energy_abs);
    if (k > 0) {
      const double ratio = L[k - 1].energy_abs / L[k].energy_abs;
      ok = ok && ratio >= 1.7;
      detail += fmt(" (x%.3g)", ratio);
    }
    detail += k + 1 < L.size() ? "; " : "";
  }
  return {ok, detail};
}

Verdict entropy_refinement() {
  const auto& L = refinement_levels();
  bool ok = true;
  std::string detail;
  for (std::size_t k = 0; k < L.size(); ++k) {
    detail += fmt("tau %.0e: %.3g", L[k].tau, L[k].entropy);
    if (k > 0) {
      const double ratio = L[k - 1].entropy / L[k].entropy;
      ok = ok && ratio >= 1.7;
      detail += fmt(" (x%.3g)", ratio);
    }
    detail += "; ";
  }
  const ModelParams p = bench_params(1.0);
  const GibbsState gs = gibbs_state(p);
  const double gibbs = entropy_identity_residual(gs.prev, gs.next, gs.dt, p);
  ok = ok && gibbs <= 1e-10;
  return {ok, detail + fmt("Gibbs state %.3g", gibbs)};
}

Verdict lemma_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  const PointwiseReport r = pointwise_inequality_suite(1000000);
  const double secs = seconds_since(t0);
  const bool ok = r.samples >= 1000000 && r.total_violations() == 0 && secs < 30.0;
  return {ok, fmt("%zu tuples each, violations fenchel %zu cross %zu sqrt %zu Lambda %zu, %.2f s%s%s", r.samples,
                  r.fenchel_violations, r.cross_violations, r.sqrt_violations, r.lambda_violations, secs,
                  r.first_violation.empty() ? "" : ", first ", r.first_violation.c_str())};
}

// Central-difference derivative of the discrete energy in one cell, divided by
// the cell volume, compared against the analytic variation over all cells.
double fd_error(const Field& base, const Field& variation, const std::function<double(const Field&)>& E) {
  const double vol = base.grid().cell_volume(), d = 1e-5;
  double num = 0.0, den = 0.0;
  for (std::size_t c = 0; c < base.size(); ++c) {
    Field up = base, down = base;
    up[c] += d;
    down[c] -= d;
    const double fd = (E(up) - E(down)) / (2 * d) / vol;
    num = std::max(num, std::abs(fd - variation[c]));
    den = std::max(den, std::abs(variation[c]));
  }
  return num / den;
}

Verdict variational_consistency() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> uphi(-0.9, 0.9), ulns(-1.5, 1.5);
  double worst_phi = 0.0, worst_sigma = 0.0;
  for (int k = 0; k < 10; ++k) {
    const GridSpec g = k % 2 ? GridSpec::rect(8, 8, 1.0, 1.0) : GridSpec::line(48, kL);
    ModelParams p = bench_params(1.5);
    p.epsilon = k % 3 == 0 ? 0.1 : 0.0;
    Field phi(g), sigma(g);
    for (std::size_t c = 0; c < g.size(); ++c) {
      phi[c] = uphi(rng);
      sigma[c] = std::exp(ulns(rng));
    }
    worst_phi = std::max(worst_phi, fd_error(phi, chemical_potential(phi, sigma, p),
                                             [&](const Field& q) { return energy(q, sigma, p).total(); }));
    worst_sigma = std::max(worst_sigma, fd_error(sigma, nutrient_potential(phi, sigma, p.chi, p.epsilon),
                                                 [&](const Field& q) { return energy(phi, q, p).total(); }));
  }
  return {worst_phi < 1e-6 && worst_sigma < 1e-6,
          fmt("10 states, max relative error mu %.3g, mu_sigma %.3g", worst_phi, worst_sigma)};
}

WsuResult bench_pair(int cells, double dt) {
  PairedRunConfig c;
  c.params = bench_params();
  c.coarse_grid = GridSpec::line(cells, kL);
  c.coarse_dt = dt;
  c.initial = [](const GridSpec& g) { return std::pair{bench_phi(g), bench_sigma(g)}; };
  c.t_end = 1.0;
  c.compare_every = 0.05;
  return run_paired(c);
}

Verdict wsu_gronwall() {
  const WsuResult a = bench_pair(32, 1e-3);
  const WsuResult b = bench_pair(64, 5e-4);
  if (!a.completed || !b.completed) return {false, "paired run failed: " + a.failure_reason + b.failure_reason};
  const double r_ratio = a.gronwall.max_R / b.gronwall.max_R;
  const double res_ratio = a.residual_pos_max / b.residual_pos_max;
  const bool ok = a.gronwall.max_R <= 10 * a.floor && b.gronwall.max_R <= 10 * b.floor && r_ratio >= 3.0 &&
                  res_ratio >= 1.7;
  return {ok, fmt("32/1e-3: max R %.3g floor %.3g; 64/5e-4: max R %.3g floor %.3g; max R x%.3g; "
                  "residual+ %.3g -> %.3g (x%.3g)",
                  a.gronwall.max_R, a.floor, b.gronwall.max_R, b.floor, r_ratio, a.residual_pos_max,
                  b.residual_pos_max, res_ratio)};
}

// Adaptive Simpson for int_0^inf dz / (1 + z^3) with z = u / (1 - u).
double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
               double whole, double tol, int depth) {
  const double m = 0.5 * (a + b), lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6 * (fa + 4 * flm + fm), right = (b - m) / 6 * (fm + 4 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15 * tol) return left + right + (left + right - whole) / 15;
  return simpson(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) + simpson(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

Verdict riccati_T0() {
  const auto f = [](double u) {
    if (u >= 1.0) return 0.0;
    const double z = u / (1 - u);
    return 1.0 / (1 + z * z * z) / ((1 - u) * (1 - u));
  };
  const double fa = f(0), fm = f(0.5), fb = f(1);
  const double quad = simpson(f, 0, 1, fa, fm, fb, (fa + 4 * fm + fb) / 6, 1e-13, 50);
  const double T0 = estimate_T0(1.0, 0.0, 1e3);
  const double rel = std::abs(T0 - quad) / quad;
  return {rel <= 0.01, fmt("T0 %.10g, quadrature %.10g (2 pi / (3 sqrt 3) = %.10g), relative gap %.3g", T0, quad,
                           2 * std::numbers::pi / (3 * std::sqrt(3.0)), rel)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Verdict determinism() {
  cli::RunConfig c;
  c.model = bench_params();
  c.output.snapshots = "binary";
  c.report_every = 0.1;
  const fs::path root = fs::temp_directory_path() / ("chks_determinism_" + std::to_string(::getpid()));
  std::ostringstream log;
  const auto a = cli::execute_run(c, root / "a", log);
  const auto b = cli::execute_run(c, root / "b", log);
  std::size_t files = 0, differing = 0;
  for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
    if (!e.is_regular_file() || e.path().filename() == "manifest.json") continue;
    ++files;
    differing += slurp(e.path()) != slurp(root / "b" / fs::relative(e.path(), root / "a"));
  }
  fs::remove_all(root);
  const bool ok = a.exit_code == 0 && b.exit_code == 0 && files > 1 && differing == 0;
  return {ok, fmt("%zu output files compared (timeseries and snapshots), %zu differ", files, differing)};
}

}  // namespace

int main() {
  const std::pair<const char*, Verdict (*)()> criteria[] = {
      {"mass_conservation", mass_conservation},
      {"minimum_principle", minimum_principle},
      {"sigma_mass_bracket", sigma_mass_bracket},
      {"gibbs_steady_state", gibbs_exactness},
      {"decoupled_dissipation", decoupled_dissipation},
      {"energy_law_refinement", energy_law_refinement},
      {"entropy_identity_refinement", entropy_refinement},
      {"lemma_suite", lemma_suite},
      {"variational_consistency", variational_consistency},
      {"wsu_gronwall", wsu_gronwall},
      {"riccati_T0", riccati_T0},
      {"determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("threw ") + e.what()};
    }
    failed += !v.pass;
    std::printf("%s %s: %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed, std::size(criteria));
  return failed ? 1 : 0;
}
