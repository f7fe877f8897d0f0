#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"

#include "chks/error.hpp"
#include "chks/functionals.hpp"
#include "chks/solver.hpp"

using namespace chks;

namespace {

const double kL = 2 * std::numbers::pi;

ModelParams params(double chi, double lambda, AlphaSpec alpha = AlphaSpec::constant(0.0)) {
  ModelParams p;
  p.chi = chi;
  p.lambda = lambda;
  p.alpha = alpha;
  return p;
}

Field cosine(const GridSpec& g, double mean, double amp) {
  return Field::from_function(g, [=](double x, double) { return mean + amp * std::cos(x); });
}

Field random_phi(const GridSpec& g, std::uint64_t seed, double amp) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-amp, amp);
  Field f(g);
  for (std::size_t c = 0; c < f.size(); ++c) f[c] = u(rng);
  return f;
}

double max_abs_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) m = std::max(m, std::abs(a[c] - b[c]));
  return m;
}

}  // namespace

TEST_CASE("bernoulli function") {
  CHECK(bernoulli(0.0) == 1.0);
  CHECK(bernoulli(1e-10) == doctest::Approx(1 - 0.5e-10));
  CHECK(bernoulli(1.0) == doctest::Approx(1.0 / (std::exp(1.0) - 1.0)));
  for (double x : {-3.0, -0.1, 0.2, 5.0}) CHECK(bernoulli(-x) - bernoulli(x) == doctest::Approx(x));
  CHECK(bernoulli(800.0) >= 0.0);
  CHECK(std::isfinite(bernoulli(-800.0)));
}

TEST_CASE("initial data validation names the violated condition") {
  const GridSpec g = GridSpec::line(8, 1.0);
  const ModelParams p = params(1.0, 0.0);
  auto message = [&](const Field& phi, const Field& sigma) {
    try {
      validate_initial_data(phi, sigma, p);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InvalidArgument);
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message(Field(g, 0.1), Field(g, 1.0)).empty());
  CHECK(message(Field(g, 0.1), Field(g, -1.0)).find("sigma0 > 0") != std::string::npos);
  CHECK(message(Field(g, 1.0), Field(g, 1.0)).find("|phi0|") != std::string::npos);
  Field nan_phi(g, 0.1);
  nan_phi[3] = NAN;
  CHECK_FALSE(message(nan_phi, Field(g, 1.0)).empty());
}

TEST_CASE("solver config validation") {
  CHECK_NOTHROW(SolverConfig::fixed(1e-3).validate());
  SolverConfig c = SolverConfig::fixed(1e-3);
  c.dt_min = 1e-2;
  CHECK_THROWS_AS(c.validate(), Error);
  c = SolverConfig::fixed(-1.0);
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("constant states are fixed points") {
  const GridSpec g = GridSpec::rect(6, 4, 1.0, 1.0);
  for (double chi : {0.0, 1.0, 3.0}) {
    const ModelParams p = params(chi, 0.8);
    const State s0 = make_state(Field(g, -0.4), Field(g, 2.0), p);
    const CahnHilliardStep ch = step_cahn_hilliard(s0, s0.sigma, p, SolverConfig::fixed(0.1), 0.1);
    CHECK(max_abs_diff(ch.phi, s0.phi) <= 1e-14);
    for (std::size_t c = 0; c < g.size(); ++c) {
      CHECK(ch.mu[c] == doctest::Approx(beta(-0.4) + 0.8 * 0.4 - chi * 2.0).epsilon(1e-12));
    }
    const State s1 = step(s0, p, SolverConfig::fixed(0.1));
    CHECK(max_abs_diff(s1.phi, s0.phi) <= 1e-14);
    CHECK(max_abs_diff(s1.sigma, s0.sigma) <= 1e-14);
    CHECK(s1.t == doctest::Approx(0.1));
  }
}

TEST_CASE("Cahn-Hilliard step conserves mass and decays the energy for lambda = 0") {
  const GridSpec g = GridSpec::line(64, kL);
  const ModelParams p = params(0.0, 0.0);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const State s0 = make_state(random_phi(g, seed, 0.6), Field(g, 1.0), p);
    const CahnHilliardStep ch = step_cahn_hilliard(s0, s0.sigma, p, SolverConfig::fixed(1e-3), 1e-3);
    CHECK(std::abs(integrate(ch.phi) - integrate(s0.phi)) <= 1e-10 * g.volume());
    CHECK(energy(ch.phi, s0.sigma, p).total() <= energy(s0.phi, s0.sigma, p).total());
    CHECK(ch.residual <= 1e-8);
  }
}

TEST_CASE("sigma step") {
  const GridSpec g = GridSpec::line(16, kL);
  SUBCASE("heat-equation fixed point") {
    const Field s = step_sigma(Field(g, 1.7), Field(g, 0.0), params(0.0, 0.0), 1e-2);
    for (std::size_t c = 0; c < s.size(); ++c) CHECK(s[c] == doctest::Approx(1.7).epsilon(1e-14));
  }
  SUBCASE("implicit reaction recursion") {
    const double c = 0.8, tau = 0.05, s0 = 1.3;
    const ModelParams p = params(0.0, 0.0, AlphaSpec::constant(c));
    Field s(g, s0);
    for (int n = 1; n <= 10; ++n) {
      s = step_sigma(s, Field(g, 0.0), p, tau);
      for (std::size_t k = 0; k < s.size(); ++k) {
        CHECK(s[k] == doctest::Approx(s0 / std::pow(1 - c * tau, n)).epsilon(1e-12));
      }
    }
  }
  SUBCASE("Gibbs state is reached exactly") {
    const ModelParams p = params(2.0, 0.0);
    const Field phi = cosine(g, 0.0, 0.4);
    Field s = cosine(g, 1.0, 0.5);
    const double mass = integrate(s);
    for (int n = 0; n < 60; ++n) s = step_sigma(s, phi, p, 10.0);
    Field gibbs(g);
    double z = 0.0;
    for (std::size_t c = 0; c < g.size(); ++c) gibbs[c] = std::exp(-p.chi * (1 - phi[c]));
    z = mass / integrate(gibbs);
    for (std::size_t c = 0; c < g.size(); ++c) CHECK(s[c] == doctest::Approx(z * gibbs[c]).epsilon(1e-11));
  }
  SUBCASE("positivity loss is reported") {
    const ModelParams p = params(0.0, 0.0, AlphaSpec::constant(2.0));
    try {
      step_sigma(Field(g, 1.0), Field(g, 0.0), p, 1.0);
      FAIL("expected PositivityLost");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::PositivityLost);
    }
  }
}

TEST_CASE("step halves dt on failure") {
  const GridSpec g = GridSpec::line(16, kL);
  const ModelParams p = params(0.0, 0.0, AlphaSpec::constant(2.0));
  const State s0 = make_state(cosine(g, 0.0, 0.2), Field(g, 1.0), p);
  StepInfo info;
  const State s1 = step(s0, p, SolverConfig::fixed(1.0), &info);
  CHECK(info.rejections >= 1);
  CHECK(info.dt_used < 0.5);
  CHECK(s1.t == doctest::Approx(info.dt_used));
  SolverConfig tight = SolverConfig::fixed(1.0);
  tight.dt_min = 0.9;
  CHECK_THROWS_AS(step(s0, p, tight), Error);
}

TEST_CASE("report times") {
  const auto t = report_times(1.0, 0.25);
  REQUIRE(t.size() == 4);
  CHECK(t.back() == 1.0);
  CHECK(report_times(1.0, 0.3).back() == 1.0);
  CHECK(report_times(1.0, 0.3).size() == 4);
  CHECK(report_times(0.0, 0.1).empty());
  CHECK(report_times(0.5, 0.0).size() == 1);
}

TEST_CASE("run") {
  const GridSpec g = GridSpec::line(32, kL);
  const ModelParams p = params(1.0, 0.5);
  SUBCASE("t_end = 0 returns the initial state") {
    const RunResult r = run(cosine(g, 0, 0.3), cosine(g, 1, 0.5), p, SolverConfig::fixed(1e-3), 0.0, 0.1);
    CHECK(r.completed);
    CHECK(r.series.size() == 1);
    CHECK(r.steps.empty());
  }
  SUBCASE("lands on report times") {
    const RunResult r = run(cosine(g, 0, 0.3), cosine(g, 1, 0.5), p, SolverConfig::fixed(3e-3), 0.1, 0.025);
    REQUIRE(r.completed);
    REQUIRE(r.series.size() == 5);
    const auto t = report_times(0.1, 0.025);
    for (std::size_t k = 1; k < r.series.size(); ++k) CHECK(r.series[k].t == t[k - 1]);
    CHECK(r.final_state.t == 0.1);
  }
  SUBCASE("adaptive growth respects dt_max") {
    SolverConfig c = SolverConfig::fixed(1e-3);
    c.dt_max = 4e-3;
    const RunResult r = run(cosine(g, 0, 0.3), cosine(g, 1, 0.5), p, c, 0.2, 0.0);
    REQUIRE(r.completed);
    double largest = 0.0;
    for (const StepLog& s : r.steps) largest = std::max(largest, s.dt);
    CHECK(largest > 1e-3);
    CHECK(largest <= 4e-3 * (1 + 1e-12));
  }
  SUBCASE("inadmissible data throws") {
    CHECK_THROWS_AS(run(Field(g, 0.0), Field(g, -1.0), p, SolverConfig::fixed(1e-3), 1.0, 0.1), Error);
  }
  SUBCASE("observer errors end the run with a partial result") {
    int calls = 0;
    const RunResult r = run(cosine(g, 0, 0.3), cosine(g, 1, 0.5), p, SolverConfig::fixed(1e-3), 1.0, 0.0,
                            [&](const State&, const State&, const StepLog&) {
                              if (++calls == 5) throw Error(ErrorCode::InvariantViolation, "stop");
                            });
    CHECK_FALSE(r.completed);
    CHECK(r.failure_reason.find("stop") != std::string::npos);
  }
  SUBCASE("decoupled gradient flow decays the energy at every report") {
    const ModelParams q = params(0.0, 0.0);
    Field sigma = random_phi(g, 9, 0.5);
    for (std::size_t c = 0; c < g.size(); ++c) sigma[c] += 1.0;
    const RunResult r = run(random_phi(g, 8, 0.5), sigma, q, SolverConfig::fixed(1e-3), 0.2, 0.01);
    REQUIRE(r.completed);
    for (std::size_t k = 1; k < r.series.size(); ++k) CHECK(r.series[k].E_total <= r.series[k - 1].E_total + 1e-12);
  }
  SUBCASE("identical invocations are bit-identical") {
    const RunResult a = run(cosine(g, 0, 0.3), cosine(g, 1, 0.5), p, SolverConfig::fixed(2e-3), 0.2, 0.05);
    const RunResult b = run(cosine(g, 0, 0.3), cosine(g, 1, 0.5), p, SolverConfig::fixed(2e-3), 0.2, 0.05);
    CHECK(a.final_state.phi == b.final_state.phi);
    CHECK(a.final_state.sigma == b.final_state.sigma);
    for (std::size_t k = 0; k < a.series.size(); ++k) CHECK(a.series[k].E_total == b.series[k].E_total);
  }
}

TEST_CASE("first-order self-convergence of the split scheme") {
  const GridSpec g = GridSpec::line(32, kL);
  const ModelParams p = params(1.0, 0.5, AlphaSpec::constant(0.3));
  auto final_state = [&](double tau) {
    return run(cosine(g, 0, 0.3), cosine(g, 1, 0.5), p, SolverConfig::fixed(tau), 0.2, 0.0).final_state;
  };
  const State a = final_state(4e-3), b = final_state(2e-3), c = final_state(1e-3);
  const double e1 = max_abs_diff(a.sigma, b.sigma) + max_abs_diff(a.phi, b.phi);
  const double e2 = max_abs_diff(b.sigma, c.sigma) + max_abs_diff(b.phi, c.phi);
  CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("Riccati blow-up time") {
  CHECK(estimate_T0(1.0, 5.0, 2.0) == 0.0);
  const double exact = 2 * std::numbers::pi / (3 * std::sqrt(3.0));
  // int_cap^inf dz / (1 + z^3) < 1 / (2 cap^2)
  const double T0 = estimate_T0(1.0, 0.0, 1e3);
  CHECK(T0 <= exact);
  CHECK(exact - T0 <= 0.5e-6 + 1e-9);
  CHECK(estimate_T0(2.0, 0.0, 1e3) == T0 / 2);
  CHECK(std::isinf(estimate_T0(1.0, 0.0, 1e3, 0.5)));
  // Z' = c (1 + Z^3) from Z = 1: t = int_1^cap dz / (1 + z^3) / c
  auto antiderivative = [](double z) {
    return std::log(z + 1) / 3 - std::log(z * z - z + 1) / 6 + std::atan((2 * z - 1) / std::sqrt(3.0)) / std::sqrt(3.0);
  };
  CHECK(estimate_T0(0.5, 1.0, 10.0) == doctest::Approx((antiderivative(10.0) - antiderivative(1.0)) / 0.5).epsilon(1e-9));
  CHECK_THROWS_AS(estimate_T0(0.0, 0.0, 1.0), Error);
}
