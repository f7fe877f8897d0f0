#include "chks/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "chks/functionals.hpp"
#include "chks/simd/kernels.hpp"

namespace chks {

namespace {

double sum_fixed(const std::vector<double>& v) {
  return simd::active_kernels().sum(v.data(), v.size());
}

void require_positive(const Field& s) {
  for (std::size_t c = 0; c < s.size(); ++c) {
    if (!(s[c] > 0.0)) {
      throw Error(ErrorCode::NonpositiveSigma, "sigma <= 0 at cell " + std::to_string(c));
    }
  }
}

Field log_field(const Field& s) {
  Field out(s.grid());
  for (std::size_t c = 0; c < s.size(); ++c) out[c] = std::log(s[c]);
  return out;
}

void violation(const std::string& what) { throw Error(ErrorCode::InvariantViolation, what); }

}  // namespace

TestBattery make_test_battery(const GridSpec& grid) {
  const double lx = grid.lengths[0];
  const double ly = grid.dim == 2 ? grid.lengths[1] : 1.0;
  const double pi = std::numbers::pi;
  TestBattery b;
  auto add = [&](std::string name, std::function<double(double, double)> f) {
    b.names.push_back(std::move(name));
    b.fields.push_back(Field::from_function(grid, f));
  };
  add("one", [](double, double) { return 1.0; });
  add("x", [](double x, double) { return x; });
  add("x2", [](double x, double) { return x * x; });
  add("cos_x", [=](double x, double) { return std::cos(pi * x / lx); });
  if (grid.dim == 2) {
    add("y", [](double, double y) { return y; });
    add("y2", [](double, double y) { return y * y; });
    add("cos_y", [=](double, double y) { return std::cos(pi * y / ly); });
    add("cos_xy", [=](double x, double y) { return std::cos(pi * x / lx) * std::cos(pi * y / ly); });
  }
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::vector<std::array<double, 3>> modes;
  for (int k = 0; k < 6; ++k) {
    const double kx = 1 + k % 4;
    const double ky = grid.dim == 2 ? 1 + (k * 7) % 3 : 0;
    modes.push_back({coef(rng), kx, ky});
  }
  add("random_smooth", [=](double x, double y) {
    double v = 0.0;
    for (const auto& m : modes) v += m[0] * std::cos(m[1] * pi * x / lx) * std::cos(m[2] * pi * y / ly);
    return v;
  });
  return b;
}

double WeakResiduals::max_phi() const {
  return phi_rows.empty() ? 0.0 : *std::max_element(phi_rows.begin(), phi_rows.end());
}

double WeakResiduals::max_sigma() const {
  return sigma_rows.empty() ? 0.0 : *std::max_element(sigma_rows.begin(), sigma_rows.end());
}

WeakResiduals weak_residuals(const State& prev, const State& next, double dt,
                             const ModelParams& params, const TestBattery& battery) {
  const GridSpec& g = next.phi.grid();
  require_positive(next.sigma);
  const Field dphi = (1.0 / dt) * (next.phi - prev.phi);
  const Field dsig = (1.0 / dt) * (next.sigma - prev.sigma);
  const FaceField gmu = grad(next.mu);

  // Face flux grad sigma' + m sigma' grad(chi(1 - phi')), sigma' at faces by log mean.
  FaceField flux(g);
  const auto fs = faces(g);
  for (std::size_t f = 0; f < fs.size(); ++f) {
    const auto [l, r, axis] = fs[f];
    const double h = g.spacing(axis);
    double m = log_mean(next.sigma[r], next.sigma[l]);
    if (params.epsilon > 0.0) m = m / (1.0 + params.epsilon * m);
    flux.values[f] = (next.sigma[r] - next.sigma[l]) / h -
                     m * params.chi * (next.phi[r] - next.phi[l]) / h;
  }
  Field reaction(g);
  for (std::size_t c = 0; c < g.size(); ++c) {
    reaction[c] = alpha_eval(params.alpha, next.phi[c], next.sigma[c]) * next.sigma[c];
  }

  WeakResiduals out;
  out.names = battery.names;
  for (const Field& psi : battery.fields) {
    const FaceField gpsi = grad(psi);
    out.phi_rows.push_back(std::abs(inner(dphi, psi) + face_inner(gmu, gpsi)));
    out.sigma_rows.push_back(
        std::abs(inner(dsig, psi) + face_inner(flux, gpsi) - inner(reaction, psi)));
  }
  return out;
}

double entropy_identity_residual(const State& prev, const State& next, double dt,
                                 const ModelParams& params) {
  require_positive(prev.sigma);
  require_positive(next.sigma);
  const GridSpec& g = next.sigma.grid();
  const Field l1 = log_field(next.sigma);
  const Field l0 = log_field(prev.sigma);
  const double lhs = (integrate(l1) - integrate(l0)) / dt;

  const auto fs = faces(g);
  std::vector<double> terms(fs.size());
  for (std::size_t f = 0; f < fs.size(); ++f) {
    const auto [l, r, axis] = fs[f];
    const double h = g.spacing(axis);
    const double gl = (l1[r] - l1[l]) / h;
    const double gp = (next.phi[r] - next.phi[l]) / h;
    double m = 1.0;
    if (params.epsilon > 0.0) m = 1.0 / (1.0 + params.epsilon * log_mean(next.sigma[r], next.sigma[l]));
    terms[f] = gl * gl - params.chi * m * gl * gp;
  }
  std::vector<double> a(g.size());
  for (std::size_t c = 0; c < g.size(); ++c) {
    a[c] = alpha_eval(params.alpha, next.phi[c], next.sigma[c]);
  }
  const double rhs = (sum_fixed(terms) + sum_fixed(a)) * g.cell_volume();
  return std::abs(lhs - rhs);
}

double energy_source(const Field& phi, const Field& sigma, const ModelParams& params) {
  require_positive(sigma);
  std::vector<double> terms(sigma.size());
  for (std::size_t c = 0; c < sigma.size(); ++c) {
    const double a = alpha_eval(params.alpha, phi[c], sigma[c]);
    terms[c] = a * sigma[c] *
               (std::log(sigma[c]) + params.epsilon * (sigma[c] - 1.0) + params.chi * (1.0 - phi[c]));
  }
  return sum_fixed(terms) * sigma.grid().cell_volume();
}

double energy_law_residual(const State& prev, const State& next, double dt,
                           const ModelParams& params) {
  const double e0 = energy(prev.phi, prev.sigma, params).total();
  const double e1 = energy(next.phi, next.sigma, params).total();
  const double d1 = dissipation(next.phi, next.mu, next.sigma, params.chi, params.epsilon);
  return (e1 - e0) / dt + d1 - energy_source(next.phi, next.sigma, params);
}

DiagnosticsTracker::DiagnosticsTracker(const State& initial, const ModelParams& params,
                                       TrackerOptions opts)
    : params_(params),
      opts_(opts),
      battery_(make_test_battery(initial.phi.grid())),
      mass_phi0_(integrate(initial.phi)),
      volume_(initial.phi.grid().volume()) {}

const StepDiagnostics& DiagnosticsTracker::observe(const State& prev, const State& next,
                                                   const StepLog& log) {
  StepDiagnostics d;
  d.t = next.t;
  d.dt = log.dt;
  d.min_sigma = next.sigma.min();
  const double max_abs_phi = std::max(-next.phi.min(), next.phi.max());
  d.phi_bound_margin = 1.0 - max_abs_phi;
  if (opts_.hard_assertions) {
    if (!next.phi.all_finite() || !next.sigma.all_finite() || !next.mu.all_finite()) {
      violation("non-finite state at t = " + std::to_string(next.t));
    }
    if (!(d.min_sigma > 0.0)) violation("min sigma <= 0 at t = " + std::to_string(next.t));
    if (!(max_abs_phi <= 1.0 - params_.delta_safe)) {
      violation("|phi| > 1 - delta_safe at t = " + std::to_string(next.t));
    }
  }
  d.mass_phi_drift = std::abs(integrate(next.phi) - mass_phi0_);
  if (opts_.hard_assertions && d.mass_phi_drift > opts_.mass_phi_tol_rel * volume_) {
    violation("phi mass drift " + std::to_string(d.mass_phi_drift) + " at t = " + std::to_string(next.t));
  }

  const double m0 = integrate(prev.sigma);
  const double m1 = integrate(next.sigma);
  const auto [alo, ahi] = params_.alpha.bounds();
  const double lo = std::exp(alo * log.dt) * m0;
  const double hi = std::exp(ahi * log.dt) * m0;
  d.sigma_mass_bracket_slack = std::max({0.0, lo - m1, m1 - hi}) / m0;
  if (opts_.hard_assertions && params_.alpha.is_constant()) {
    const double c = alo * log.dt;
    if (d.sigma_mass_bracket_slack > c * c + 1e-12) {
      violation("sigma mass outside exponential bracket at t = " + std::to_string(next.t));
    }
  }

  d.energy_law_residual = energy_law_residual(prev, next, log.dt, params_);
  d.entropy_identity_residual = entropy_identity_residual(prev, next, log.dt, params_);
  if (opts_.weak_residuals) {
    const WeakResiduals w = weak_residuals(prev, next, log.dt, params_, battery_);
    d.weak_phi_max = w.max_phi();
    d.weak_sigma_max = w.max_sigma();
  }

  const EnergyReport rep = energy_report(next.phi, next.sigma, next.mu, next.t, params_);
  zeta_ += log.dt * rep.grad_ln_sigma_sq;
  Z_ += log.dt * rep.z_integrand;
  sup_llogl_beta_ = std::max(sup_llogl_beta_, rep.llogl_beta);
  sup_gamma_hat_ = std::max(sup_gamma_hat_, rep.gamma_hat_ln_sigma);
  d.zeta = zeta_;
  d.Z = Z_;
  if (opts_.hard_assertions &&
      (!std::isfinite(d.energy_law_residual) || !std::isfinite(d.entropy_identity_residual) ||
       !std::isfinite(zeta_) || !std::isfinite(Z_) || !std::isfinite(sup_llogl_beta_) ||
       !std::isfinite(sup_gamma_hat_))) {
    violation("non-finite diagnostic at t = " + std::to_string(next.t));
  }
  steps_.push_back(d);
  return steps_.back();
}

StepObserver DiagnosticsTracker::observer() {
  return [this](const State& prev, const State& next, const StepLog& log) { observe(prev, next, log); };
}

double DiagnosticsTracker::max_positive_energy_residual() const {
  double m = 0.0;
  for (const auto& d : steps_) m = std::max(m, d.energy_law_residual);
  return m;
}

double DiagnosticsTracker::max_abs_energy_residual() const {
  double m = 0.0;
  for (const auto& d : steps_) m = std::max(m, std::abs(d.energy_law_residual));
  return m;
}

double DiagnosticsTracker::max_entropy_residual() const {
  double m = 0.0;
  for (const auto& d : steps_) m = std::max(m, d.entropy_identity_residual);
  return m;
}

}  // namespace chks
