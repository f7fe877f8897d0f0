#include <cmath>
#include <random>

#include "doctest.h"

#include "chks/functionals.hpp"
#include "chks/potentials.hpp"

using namespace chks;

namespace {

ModelParams params(double chi, double lambda, double eps = 0.0) {
  ModelParams p;
  p.chi = chi;
  p.lambda = lambda;
  p.epsilon = eps;
  return p;
}

struct RandomState {
  Field phi, sigma;
};

RandomState random_state(const GridSpec& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.9, 0.9), l(-1.0, 1.0);
  RandomState s{Field(g), Field(g)};
  for (std::size_t c = 0; c < g.size(); ++c) {
    s.phi[c] = u(rng);
    s.sigma[c] = std::exp(l(rng));
  }
  return s;
}

}  // namespace

TEST_CASE("log mean") {
  CHECK(log_mean(2.0, 2.0) == 2.0);
  CHECK(log_mean(std::exp(1.0), 1.0) == doctest::Approx(std::exp(1.0) - 1.0));
  CHECK(log_mean(1.0 + 1e-12, 1.0) == doctest::Approx(1.0));
  CHECK(log_mean(3.0, 1.0) == log_mean(1.0, 3.0));
}

TEST_CASE("energy of constant states") {
  const GridSpec unit = GridSpec::line(4, 1.0);
  CHECK(energy(Field(unit, 0.0), Field(unit, 1.0), params(2.0, 0.0)).total() == doctest::Approx(1.0));
  CHECK(energy(Field(unit, 0.0), Field(unit, std::exp(1.0)), params(1.0, 0.0)).total() ==
        doctest::Approx(std::exp(1.0)));
  ModelParams eps = params(0.0, 0.0, 0.4);
  CHECK(energy(Field(unit, 0.0), Field(unit, 2.0), eps).eps_term == doctest::Approx(0.2));
}

TEST_CASE("energy by hand quadrature on two cells") {
  const GridSpec g = GridSpec::line(2, 2.0);
  const Field phi(g, std::vector<double>{-0.5, 0.5});
  const EnergyParts e = energy(phi, Field(g, 1.0), params(0.0, 0.0));
  const double F = 1.5 * std::log(1.5) + 0.5 * std::log(0.5);
  CHECK(e.dirichlet == doctest::Approx(0.5));
  CHECK(e.potential == doctest::Approx(2 * F));
  CHECK(e.total() == doctest::Approx(0.5 + 2 * F - 2.0));  // sigma entropy: 2 * (0 - 1)
  CHECK(0.5 + 2 * F == doctest::Approx(1.023249).epsilon(1e-6));
}

TEST_CASE("energy rejects out-of-domain states") {
  const GridSpec g = GridSpec::line(3, 1.0);
  CHECK_THROWS_AS(energy(Field(g, 1.0), Field(g, 1.0), params(1.0, 0.0)), Error);
  CHECK_THROWS_AS(energy(Field(g, 0.0), Field(g, 0.0), params(1.0, 0.0)), Error);
}

TEST_CASE("chemical potentials of constant states") {
  const GridSpec g = GridSpec::rect(3, 3, 1.0, 1.0);
  const Field mu = chemical_potential(Field(g, 0.3), Field(g, 1.7), params(1.2, 0.4));
  for (std::size_t c = 0; c < g.size(); ++c) CHECK(mu[c] == doctest::Approx(beta(0.3) - 0.4 * 0.3 - 1.2 * 1.7));
  const Field mu2 = chemical_potential(Field(g, 0.0), Field(g, 1.0), params(2.0, 0.0));
  CHECK(mu2[4] == doctest::Approx(-2.0));
  const Field w1 = nutrient_potential(Field(g, 1.0), Field(g, 1.0), 1.0);
  CHECK(w1[0] == 0.0);
  const Field w2 = nutrient_potential(Field(g, 0.0), Field(g, std::exp(1.0)), 1.0);
  CHECK(w2[0] == doctest::Approx(2.0));
  CHECK_THROWS_AS(nutrient_potential(Field(g, 0.0), Field(g, 0.0), 1.0), Error);
}

TEST_CASE("variational derivatives match central differences") {
  for (int k = 0; k < 10; ++k) {
    const GridSpec g = k % 2 ? GridSpec::rect(6, 5, 1.0, 0.8) : GridSpec::line(24, 3.0);
    const RandomState s = random_state(g, 100 + k);
    const ModelParams p = params(1.4, 0.6, k % 3 ? 0.0 : 0.25);
    const double vol = g.cell_volume(), d = 1e-5;
    const Field mu = chemical_potential(s.phi, s.sigma, p);
    const Field w = nutrient_potential(s.phi, s.sigma, p.chi, p.epsilon);
    double err_phi = 0.0, err_sigma = 0.0, scale_phi = 0.0, scale_sigma = 0.0;
    for (std::size_t c = 0; c < g.size(); ++c) {
      Field up = s.phi, dn = s.phi;
      up[c] += d;
      dn[c] -= d;
      const double fd_phi = (energy(up, s.sigma, p).total() - energy(dn, s.sigma, p).total()) / (2 * d * vol);
      Field su = s.sigma, sd = s.sigma;
      su[c] += d;
      sd[c] -= d;
      const double fd_sigma = (energy(s.phi, su, p).total() - energy(s.phi, sd, p).total()) / (2 * d * vol);
      err_phi = std::max(err_phi, std::abs(fd_phi - mu[c]));
      err_sigma = std::max(err_sigma, std::abs(fd_sigma - w[c]));
      scale_phi = std::max(scale_phi, std::abs(mu[c]));
      scale_sigma = std::max(scale_sigma, std::abs(w[c]));
    }
    CHECK(err_phi / scale_phi < 1e-6);
    CHECK(err_sigma / scale_sigma < 1e-6);
  }
}

TEST_CASE("dissipation") {
  const GridSpec g = GridSpec::line(8, 2.0);
  CHECK(dissipation(Field(g, 0.2), Field(g, -1.0), Field(g, 3.0), 1.0) == 0.0);
  const GridSpec two = GridSpec::line(2, 2.0);
  const Field mu(two, std::vector<double>{0.0, 1.0});
  CHECK(dissipation(Field(two, 0.1), mu, Field(two, 1.0), 0.0) == doctest::Approx(1.0));
  // chi = 0, mu constant, sigma = e^u: D = int m |grad u|^2 with log-mean m.
  const Field u = Field::from_function(g, [](double x, double) { return std::sin(x); });
  Field sigma(g);
  for (std::size_t c = 0; c < g.size(); ++c) sigma[c] = std::exp(u[c]);
  double direct = 0.0;
  for (const Face& f : faces(g)) {
    const double gu = (u[f.right] - u[f.left]) / g.spacing(0);
    direct += log_mean(sigma[f.left], sigma[f.right]) * gu * gu * g.cell_volume();
  }
  CHECK(dissipation(Field(g, 0.0), Field(g, 0.0), sigma, 0.0) == doctest::Approx(direct).epsilon(1e-13));
  for (int k = 0; k < 5; ++k) {
    const RandomState s = random_state(GridSpec::rect(5, 4, 1.0, 1.0), k);
    const Field m = chemical_potential(s.phi, s.sigma, params(2.0, 0.5));
    CHECK(dissipation(s.phi, m, s.sigma, 2.0) >= 0.0);
    CHECK(dissipation(s.phi, m, s.sigma, 2.0, 0.3) >= 0.0);
  }
}

TEST_CASE("energy report") {
  const GridSpec g = GridSpec::line(16, 2.0);
  const RandomState s = random_state(g, 5);
  const ModelParams p = params(1.0, 0.5);
  const Field mu = chemical_potential(s.phi, s.sigma, p);
  const EnergyReport r = energy_report(s.phi, s.sigma, mu, 0.25, p);
  CHECK(r.t == 0.25);
  CHECK(r.E_total == doctest::Approx(energy(s.phi, s.sigma, p).total()));
  CHECK(r.mass_phi == doctest::Approx(integrate(s.phi)));
  CHECK(r.min_sigma == s.sigma.min());
  CHECK(r.max_phi == s.phi.max());
  CHECK(r.dissipation == doctest::Approx(dissipation(s.phi, mu, s.sigma, p.chi)));
}

TEST_CASE("relative energy") {
  const GridSpec unit = GridSpec::line(4, 1.0);
  const Field phi = zero_mean(Field::from_function(unit, [](double x, double) { return 0.2 * std::cos(3.0 * x); }));
  const RelEnergyReport same = relative_energy(phi, Field(unit, 1.3), phi, Field(unit, 1.3), 1.0);
  CHECK(same.R == 0.0);
  CHECK(relative_dissipation(phi, Field(unit, 1.3), phi, Field(unit, 1.3), 1.0, params(1.0, 0.5)) == 0.0);

  const RelEnergyReport kl = relative_energy(phi, Field(unit, 2.0), phi, Field(unit, 1.0), 1.0);
  CHECK(kl.R == doctest::Approx(2 - 1 - std::log(2.0)).epsilon(1e-14));

  const Field phit = 0.5 * phi;
  const RelEnergyReport a = relative_energy(phi, Field(unit, 1.2), phit, Field(unit, 1.0), 1.0);
  const RelEnergyReport b = relative_energy(phi, Field(unit, 1.2), phit, Field(unit, 1.0), 2.0);
  CHECK(a.kl_sigma == b.kl_sigma);
  CHECK(b.v0dual_part == doctest::Approx(2 * a.v0dual_part));
  CHECK(a.v0dual_part == doctest::Approx(0.5 * v0dual_norm_sq(phi - phit)));
  CHECK(default_M(2.0, 0.1) == 1.0);
  CHECK(default_M(2.0, 3.0) == 12.0);
}

TEST_CASE("relative dissipation parts are consistent") {
  const GridSpec g = GridSpec::line(12, 2.0);
  const RandomState s = random_state(g, 11), t = random_state(g, 12);
  const ModelParams p = params(1.5, 0.5);
  const RelDissipationParts parts = relative_dissipation_parts(s.phi, s.sigma, t.phi, t.sigma, p);
  CHECK(parts.grad_ln_sq >= 0.0);
  CHECK(parts.grad_phi_sq >= 0.0);
  CHECK(parts.monotone >= 0.0);
  CHECK(relative_dissipation(s.phi, s.sigma, t.phi, t.sigma, 2.0, p) == doctest::Approx(parts.W(2.0)));
}
