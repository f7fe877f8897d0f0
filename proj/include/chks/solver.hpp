#pragma once

// Time integration of the (optionally eps-regularized) Cahn-Hilliard /
// chemotaxis system by Lie splitting:
//
//   1. (phi, mu): convex-splitting implicit Euler, beta implicit, -lambda phi
//      explicit, coupling -chi sigma lagged; solved by damped Newton.
//   2. sigma: implicit Euler with Scharfetter-Gummel fluxes for
//      grad sigma + m_eps sigma grad w, w = chi (1 - phi^{n+1}), and an
//      implicit reaction alpha(phi^{n+1}, sigma^n) sigma^{n+1}.
//
// Step 2 is an M-matrix solve, so sigma stays positive as long as
// dt * max(alpha_+) < 1.

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "chks/functionals.hpp"
#include "chks/grid.hpp"
#include "chks/model.hpp"

namespace chks {

struct State {
  Field phi;
  Field sigma;
  Field mu;
  double t = 0.0;
};

struct SolverConfig {
  double dt = 1e-3;
  double dt_min = 1e-3 / 1024.0;
  double dt_max = 1e-3;
  double newton_tol = 1e-10;
  int newton_max_iters = 50;
  double backtrack_factor = 0.5;
  int max_halvings = 30;
  double krylov_tol = 1e-10;
  int easy_newton_iters = 4;  // a step is "easy" at or below this many iterations
  int grow_after = 3;         // consecutive easy steps before growing dt
  double grow_factor = 1.2;

  // dt_min <= dt <= dt_max, all positive, tolerances positive.
  void validate() const;

  static SolverConfig fixed(double dt) {
    SolverConfig c;
    c.dt = c.dt_max = dt;
    c.dt_min = dt / 1024.0;
    return c;
  }
};

// State with mu computed from phi and sigma.
State make_state(Field phi, Field sigma, const ModelParams& params, double t = 0.0);

// Throws InvalidArgument naming the violated admissibility condition:
// |phi0| <= 1 - delta_safe cellwise, |mean phi0| < 1, sigma0 > 0, all finite.
void validate_initial_data(const Field& phi0, const Field& sigma0, const ModelParams& params);

struct CahnHilliardStep {
  Field phi;
  Field mu;
  int newton_iters = 0;
  double residual = 0.0;
};

// Throws NewtonDiverged when the damped Newton iteration fails.
CahnHilliardStep step_cahn_hilliard(const State& state, const Field& sigma_frozen,
                                    const ModelParams& params, const SolverConfig& cfg,
                                    double dt);

// Throws PositivityLost (non-positive or non-finite result, or
// dt * max(alpha_+) >= 1) or SolverDiverged.
Field step_sigma(const Field& sigma_n, const Field& phi_new, const ModelParams& params,
                 double dt);

// Bernoulli function x / (e^x - 1), B(0) = 1.
double bernoulli(double x);

struct StepInfo {
  double dt_used = 0.0;
  int newton_iters = 0;
  int rejections = 0;
};

// One split step of size dt, retried with dt/2 on failure down to cfg.dt_min.
// Throws NewtonDiverged (with the last failure reason) when dt_min is reached.
State step(const State& state, const ModelParams& params, const SolverConfig& cfg, double dt,
           StepInfo* info = nullptr);

inline State step(const State& state, const ModelParams& params, const SolverConfig& cfg,
                  StepInfo* info = nullptr) {
  return step(state, params, cfg, cfg.dt, info);
}

struct StepLog {
  double t = 0.0;  // time at the end of the step
  double dt = 0.0;
  int newton_iters = 0;
  int rejections = 0;
};

struct RunResult {
  State final_state;
  std::vector<EnergyReport> series;
  std::vector<StepLog> steps;
  std::vector<std::size_t> report_step;  // steps.size() at each report
  bool completed = false;
  std::string failure_reason;
};

// Called after every accepted step. May throw Error to abort the run.
using StepObserver = std::function<void(const State& prev, const State& next, const StepLog&)>;

// Report times after t = 0: every report_every up to t_end, always ending at
// t_end. run() lands exactly on these values.
std::vector<double> report_times(double t_end, double report_every);

// Advances to t_end, reporting at t = 0, every report_every, and at t_end.
// report_every <= 0 reports only at the ends. Throws InvalidArgument for
// inadmissible initial data; solver failures end the run with a partial result.
RunResult run(const Field& phi0, const Field& sigma0, const ModelParams& params,
              const SolverConfig& cfg, double t_end, double report_every,
              const StepObserver& observer = {});

// First time at which Z' = c (1 + Z^3), Z(0) = y0 reaches cap, integrated with
// adaptive RK4 (step doubling). Returns 0 when y0 >= cap and +infinity when the
// cap is not reached before `horizon`.
double estimate_T0(double c, double y0, double cap,
                   double horizon = std::numeric_limits<double>::infinity());

}  // namespace chks
