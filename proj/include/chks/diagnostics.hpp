#pragma once

// Per-step verification of the discrete solution: weak-form residuals against
// a fixed battery of test fields, the energy law, the integrated ln(sigma)
// identity, and hard invariant checks. All space integrals use level n+1.

#include <string>
#include <vector>

#include "chks/grid.hpp"
#include "chks/model.hpp"
#include "chks/solver.hpp"

namespace chks {

struct TestBattery {
  static constexpr int kVersion = 1;
  std::vector<std::string> names;
  std::vector<Field> fields;
};

// 1, x, x^2, cos(pi x / Lx), a seeded random smooth field, and in 2D also
// y, y^2, cos(pi y / Ly), cos(pi x / Lx) cos(pi y / Ly).
TestBattery make_test_battery(const GridSpec& grid);

struct WeakResiduals {
  std::vector<std::string> names;
  std::vector<double> phi_rows;    // |<(phi' - phi)/dt, psi> + <grad mu', grad psi>|
  std::vector<double> sigma_rows;  // |<(s' - s)/dt, psi> + <s' grad(ln s' + chi(1-phi')), grad psi> - <alpha s', psi>|

  double max_phi() const;
  double max_sigma() const;
};

WeakResiduals weak_residuals(const State& prev, const State& next, double dt,
                             const ModelParams& params, const TestBattery& battery);

// |[int ln s' - int ln s]/dt - (int |grad ln s'|^2 - chi int m grad ln s'.grad phi' + int alpha)|
// with m = 1/(1 + eps s') at faces. Throws NonpositiveSigma.
double entropy_identity_residual(const State& prev, const State& next, double dt,
                                 const ModelParams& params);

// int alpha sigma (ln sigma + eps (sigma - 1) + chi (1 - phi)).
double energy_source(const Field& phi, const Field& sigma, const ModelParams& params);

// Signed [E' - E]/dt + D' - source'. Nonpositive up to O(dt) for the continuum law.
double energy_law_residual(const State& prev, const State& next, double dt,
                           const ModelParams& params);

struct StepDiagnostics {
  double t = 0.0;
  double dt = 0.0;
  double mass_phi_drift = 0.0;            // |int phi' - int phi0|
  double sigma_mass_bracket_slack = 0.0;  // relative excess outside [e^{a dt}, e^{A dt}] m
  double min_sigma = 0.0;
  double phi_bound_margin = 0.0;  // 1 - max |phi'|
  double energy_law_residual = 0.0;
  double entropy_identity_residual = 0.0;
  double weak_phi_max = 0.0;
  double weak_sigma_max = 0.0;
  double zeta = 0.0;  // cumulative sum dt int |grad ln sigma'|^2
  double Z = 0.0;     // cumulative sum dt int (sigma'(ln sigma' - 1) + 1)
};

struct TrackerOptions {
  bool hard_assertions = true;
  bool weak_residuals = true;
  double mass_phi_tol_rel = 1e-9;  // times |Omega|, cumulative
};

// Accumulates StepDiagnostics along a run. With hard assertions, observe()
// throws InvariantViolation on min sigma <= 0, |phi| > 1 - delta_safe,
// phi mass drift, non-finite values, or (constant alpha) a mass bracket breach.
class DiagnosticsTracker {
 public:
  DiagnosticsTracker(const State& initial, const ModelParams& params, TrackerOptions opts = {});

  const StepDiagnostics& observe(const State& prev, const State& next, const StepLog& log);

  // Adapter for solver::run.
  StepObserver observer();

  const std::vector<StepDiagnostics>& steps() const { return steps_; }
  double max_positive_energy_residual() const;
  double max_abs_energy_residual() const;
  double max_entropy_residual() const;
  double sup_llogl_beta() const { return sup_llogl_beta_; }
  double sup_gamma_hat() const { return sup_gamma_hat_; }
  double zeta() const { return zeta_; }
  double Z() const { return Z_; }

 private:
  ModelParams params_;
  TrackerOptions opts_;
  TestBattery battery_;
  double mass_phi0_ = 0.0;
  double volume_ = 0.0;
  double zeta_ = 0.0;
  double Z_ = 0.0;
  double sup_llogl_beta_ = 0.0;
  double sup_gamma_hat_ = 0.0;
  std::vector<StepDiagnostics> steps_;
};

}  // namespace chks
