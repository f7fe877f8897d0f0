#include "chks/cli/check.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <random>

#include "chks/cli/commands.hpp"
#include "chks/functionals.hpp"
#include "chks/potentials.hpp"
#include "chks/simd/kernels.hpp"
#include "chks/solver.hpp"
#include "chks/wsu.hpp"

namespace chks::cli {

namespace {

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

Field random_field(const GridSpec& g, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Field f(g);
  for (std::size_t c = 0; c < f.size(); ++c) f[c] = u(rng);
  return f;
}

const GridSpec kLine = GridSpec::line(32, 2.0);
const GridSpec kRect = GridSpec::rect(8, 6, 1.0, 0.75);

CheckResult div_grad_is_laplacian() {
  std::mt19937_64 rng(1);
  for (const GridSpec& g : {kLine, kRect}) {
    const Field u = random_field(g, rng, -1.0, 1.0);
    if (!(div(grad(u)) == laplacian(u))) return {false, "div(grad u) differs from laplacian(u)"};
  }
  return {true, "bitwise equal in 1D and 2D"};
}

CheckResult summation_by_parts() {
  std::mt19937_64 rng(2);
  double worst = 0.0;
  for (const GridSpec& g : {kLine, kRect}) {
    const Field u = random_field(g, rng, -1.0, 1.0);
    const Field v = random_field(g, rng, -1.0, 1.0);
    const double lhs = inner(laplacian(u), v);
    const double rhs = -face_inner(grad(u), grad(v));
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
  }
  return {worst <= 1e-12, fmt("relative mismatch %.3g", worst)};
}

CheckResult inverse_laplacian() {
  std::mt19937_64 rng(3);
  double worst = 0.0;
  for (const GridSpec& g : {kLine, kRect}) {
    const Field f = zero_mean(random_field(g, rng, -1.0, 1.0));
    const Field u = inv_neumann_laplacian(f, {1e-12, 0});
    Field r = laplacian(u);
    r += f;
    worst = std::max(worst, std::sqrt(inner(r, r) / inner(f, f)));
  }
  return {worst <= 1e-8, fmt("relative residual %.3g", worst)};
}

CheckResult kernels_match_scalar() {
  const simd::KernelTable& ref = simd::scalar_kernels();
  std::vector<const simd::KernelTable*> variants;
  if (auto* k = simd::avx2_kernels()) variants.push_back(k);
  if (auto* k = simd::neon_kernels()) variants.push_back(k);
  if (variants.empty()) return {true, "no vector variant on this CPU"};
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::string names;
  for (const auto* k : variants) {
    names += std::string(k->name) + " ";
    for (std::size_t n : {0, 1, 3, 4, 7, 16, 33, 130}) {
      std::vector<double> a(n), b(n), y1(n), y2(n);
      for (std::size_t i = 0; i < n; ++i) a[i] = u(rng), b[i] = u(rng), y1[i] = y2[i] = u(rng);
      if (ref.dot(a.data(), b.data(), n) != k->dot(a.data(), b.data(), n)) return {false, "dot differs"};
      if (ref.sum(a.data(), n) != k->sum(a.data(), n)) return {false, "sum differs"};
      ref.axpy(0.3, a.data(), y1.data(), n);
      k->axpy(0.3, a.data(), y2.data(), n);
      ref.xpay(b.data(), -0.7, y1.data(), n);
      k->xpay(b.data(), -0.7, y2.data(), n);
      if (y1 != y2) return {false, "axpy/xpay differ"};
      if (n >= 2) {
        ref.diff_scaled(a.data() + 1, a.data(), y1.data(), n - 1, 0.1);
        k->diff_scaled(a.data() + 1, a.data(), y2.data(), n - 1, 0.1);
        ref.laplacian_1d(a.data(), y1.data(), n, 0.1);
        k->laplacian_1d(a.data(), y2.data(), n, 0.1);
        if (y1 != y2) return {false, "diff/laplacian_1d differ"};
      }
    }
    for (auto [nx, ny] : {std::pair<std::size_t, std::size_t>{5, 3}, {8, 8}, {17, 4}}) {
      std::vector<double> a(nx * ny), y1(nx * ny), y2(nx * ny);
      for (double& v : a) v = u(rng);
      ref.laplacian_2d(a.data(), y1.data(), nx, ny, 0.1, 0.2);
      k->laplacian_2d(a.data(), y2.data(), nx, ny, 0.1, 0.2);
      if (y1 != y2) return {false, "laplacian_2d differs"};
    }
  }
  return {true, "bitwise equal: " + names};
}

CheckResult beta_derivative_of_F() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.99, 0.99);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double r = u(rng), lambda = 0.7, h = 1e-6;
    const double fd = (potential_F(r + h, lambda) - potential_F(r - h, lambda)) / (2 * h);
    const double d = potential_F_prime(r, lambda);
    worst = std::max(worst, std::abs(fd - d) / std::max(1.0, std::abs(d)));
  }
  return {worst <= 1e-6, fmt("max relative error %.3g", worst)};
}

CheckResult beta_monotone() {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-0.999, 0.999);
  for (int i = 0; i < 10000; ++i) {
    const double a = u(rng), b = u(rng);
    if ((beta(a) - beta(b)) * (a - b) < 0.0) return {false, fmt("decreasing between %.6g and %.6g", a, b)};
    if (!(beta_prime(a) >= 2.0)) return {false, fmt("beta'(%.6g) = %.6g < 2", a, beta_prime(a))};
  }
  return {true, "nondecreasing on 10000 pairs"};
}

CheckResult gamma_hat_derivative() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-20.0, 5.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double r = u(rng), h = 1e-6;
    const double fd = (gamma_hat(r + h) - gamma_hat(r - h)) / (2 * h);
    worst = std::max(worst, std::abs(fd - gamma_neg(r)) / std::max(1.0, std::abs(gamma_neg(r))));
  }
  return {worst <= 1e-6, fmt("max relative error %.3g", worst)};
}

CheckResult alpha_sqrt_lipschitz() {
  // alpha = h(phi)(1 - sqrt(sigma)) is Lipschitz in sqrt(sigma) with constant h(phi).
  const AlphaSpec spec = AlphaSpec::logistic(1.0, 0.5);
  const double phi = 0.3;
  const double h = interpolation_h(std::get<AlphaLogistic>(spec.variant), phi);
  const auto rep = check_sqrt_lipschitz([&](double s) { return alpha_eval(spec, phi, s); }, 100.0);
  const bool ok = rep.all_finite && rep.lipschitz_estimate <= h * (1 + 1e-9) &&
                  rep.lipschitz_estimate >= h * (1 - 1e-6);
  return {ok, fmt("estimate %.12g, expected %.12g", rep.lipschitz_estimate, h)};
}

struct Sample {
  Field phi, sigma;
};

std::vector<Sample> random_states(int count) {
  std::mt19937_64 rng(8);
  std::vector<Sample> out;
  for (int i = 0; i < count; ++i) {
    const GridSpec& g = i % 2 ? kRect : kLine;
    Field phi = random_field(g, rng, -0.8, 0.8);
    Field lns = random_field(g, rng, -1.0, 1.0);
    Field sigma(g);
    for (std::size_t c = 0; c < g.size(); ++c) sigma[c] = std::exp(lns[c]);
    out.push_back({std::move(phi), std::move(sigma)});
  }
  return out;
}

ModelParams check_params() {
  ModelParams p;
  p.chi = 1.3;
  p.lambda = 0.5;
  return p;
}

// max_c |dE/dx_c (central, step 1e-5) - v_c vol| / max_c |v_c vol|
template <typename Perturb>
double fd_mismatch(const Field& variation, Perturb energy_at) {
  const double vol = variation.grid().cell_volume();
  double num = 0.0, den = 0.0;
  for (std::size_t c = 0; c < variation.size(); ++c) {
    const double d = 1e-5;
    const double fd = (energy_at(c, d) - energy_at(c, -d)) / (2 * d);
    num = std::max(num, std::abs(fd - variation[c] * vol));
    den = std::max(den, std::abs(variation[c] * vol));
  }
  return num / den;
}

CheckResult variational_phi() {
  const ModelParams p = check_params();
  double worst = 0.0;
  for (const Sample& s : random_states(10)) {
    const Field mu = chemical_potential(s.phi, s.sigma, p);
    worst = std::max(worst, fd_mismatch(mu, [&](std::size_t c, double d) {
                       Field q = s.phi;
                       q[c] += d;
                       return energy(q, s.sigma, p).total();
                     }));
  }
  return {worst < 1e-6, fmt("max relative error %.3g", worst)};
}

CheckResult variational_sigma() {
  ModelParams p = check_params();
  p.epsilon = 0.2;
  double worst = 0.0;
  for (const Sample& s : random_states(10)) {
    const Field w = nutrient_potential(s.phi, s.sigma, p.chi, p.epsilon);
    worst = std::max(worst, fd_mismatch(w, [&](std::size_t c, double d) {
                       Field q = s.sigma;
                       q[c] += d;
                       return energy(s.phi, q, p).total();
                     }));
  }
  return {worst < 1e-6, fmt("max relative error %.3g", worst)};
}

CheckResult dissipation_nonnegative() {
  const ModelParams p = check_params();
  double lowest = INFINITY;
  for (const Sample& s : random_states(10)) {
    const Field mu = chemical_potential(s.phi, s.sigma, p);
    lowest = std::min({lowest, dissipation(s.phi, mu, s.sigma, p.chi), dissipation(s.phi, mu, s.sigma, p.chi, 0.5)});
  }
  return {lowest >= 0.0, fmt("min dissipation %.6g", lowest)};
}

CheckResult pointwise_inequalities() {
  const PointwiseReport r = pointwise_inequality_suite(1000000);
  if (r.total_violations() == 0) return {true, std::to_string(r.samples) + " tuples per inequality"};
  return {false, std::to_string(r.total_violations()) + " violations, first: " + r.first_violation};
}

CheckResult constant_state_fixed_point() {
  const GridSpec g = GridSpec::line(16, 1.0);
  ModelParams p = check_params();
  const State s0 = make_state(Field(g, 0.2), Field(g, 1.5), p);
  const State s1 = step(s0, p, SolverConfig::fixed(1e-2));
  double dev = 0.0;
  for (std::size_t c = 0; c < g.size(); ++c) {
    dev = std::max({dev, std::abs(s1.phi[c] - 0.2), std::abs(s1.sigma[c] - 1.5)});
  }
  return {dev <= 1e-12, fmt("max deviation %.3g", dev)};
}

CheckResult mass_conservation() {
  const GridSpec g = GridSpec::line(64, 2 * std::numbers::pi);
  ModelParams p = check_params();
  const Field phi = Field::from_function(g, [](double x, double) { return 0.3 * std::cos(x); });
  const Field sigma = Field::from_function(g, [](double x, double) { return 1 + 0.5 * std::cos(x); });
  const RunResult r = run(phi, sigma, p, SolverConfig::fixed(1e-3), 0.05, 0.0);
  if (!r.completed) return {false, r.failure_reason};
  const double drift = std::abs(integrate(r.final_state.phi) - integrate(phi));
  const double sdrift = std::abs(integrate(r.final_state.sigma) - integrate(sigma));
  const bool ok = drift <= 1e-9 * g.volume() && sdrift <= 1e-9 * g.volume();
  return {ok, fmt("phi drift %.3g, sigma drift %.3g", drift, sdrift)};
}

CheckResult riccati_T0() {
  const double T0 = estimate_T0(1.0, 0.0, 1e3);
  const double exact = 2 * std::numbers::pi / (3 * std::sqrt(3.0));
  const double rel = std::abs(T0 - exact) / exact;
  return {rel <= 1e-2, fmt("T0 %.12g, relative gap %.3g", T0, rel)};
}

}  // namespace

const std::vector<NamedCheck>& check_battery() {
  static const std::vector<NamedCheck> checks{
      {"grid.div_grad_is_laplacian", div_grad_is_laplacian},
      {"grid.summation_by_parts", summation_by_parts},
      {"grid.inverse_laplacian", inverse_laplacian},
      {"simd.kernels_match_scalar", kernels_match_scalar},
      {"potentials.beta_derivative_of_F", beta_derivative_of_F},
      {"potentials.beta_monotone", beta_monotone},
      {"potentials.gamma_hat_derivative", gamma_hat_derivative},
      {"potentials.alpha_sqrt_lipschitz", alpha_sqrt_lipschitz},
      {"functionals.variational_phi", variational_phi},
      {"functionals.variational_sigma", variational_sigma},
      {"functionals.dissipation_nonnegative", dissipation_nonnegative},
      {"wsu.pointwise_inequalities", pointwise_inequalities},
      {"solver.constant_state_fixed_point", constant_state_fixed_point},
      {"solver.mass_conservation", mass_conservation},
      {"solver.riccati_T0", riccati_T0},
  };
  return checks;
}

int cmd_check(const std::string& inject, std::ostream& out, std::ostream& err) {
  if (!inject.empty() && inject != "beta-sign-flip") {
    err << "error: unknown injection '" << inject << "' (known: beta-sign-flip)\n";
    return kExitConfig;
  }
  struct FlipGuard {
    explicit FlipGuard(bool on) { set_beta_sign_flip(on); }
    ~FlipGuard() { set_beta_sign_flip(false); }
  } guard(!inject.empty());

  int failed = 0;
  for (const NamedCheck& c : check_battery()) {
    CheckResult r;
    try {
      r = c.run();
    } catch (const std::exception& e) {
      r = {false, std::string("threw ") + e.what()};
    }
    failed += !r.passed;
    out << (r.passed ? "[PASS] " : "[FAIL] ") << c.name << ": " << r.detail << "\n";
  }
  out << check_battery().size() - failed << "/" << check_battery().size() << " checks passed\n";
  return failed ? kExitFailed : kExitOk;
}

}  // namespace chks::cli
