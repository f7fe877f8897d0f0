#pragma once

// Weak-strong comparison of a coarse trajectory against a finer reference
// run of the same scheme: relative energy and dissipation along the pair,
// the residual of the relative energy inequality, a Gronwall fit, and a
// Monte-Carlo suite for the pointwise inequalities behind the estimate.

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "chks/functionals.hpp"
#include "chks/grid.hpp"
#include "chks/model.hpp"
#include "chks/solver.hpp"

namespace chks {

// Cell average of `fine` onto `coarse`. Throws IncompatibleGrids unless both
// grids cover the same box and coarse cells divide fine cells on every axis.
Field restrict_to(const Field& fine, const GridSpec& coarse);

using InitialData = std::function<std::pair<Field, Field>(const GridSpec&)>;

struct PairedRunConfig {
  ModelParams params{};
  GridSpec coarse_grid{};
  double coarse_dt = 1e-3;
  int space_refinement = 4;  // fine cells per coarse cell along each axis
  int time_refinement = 4;   // fine steps per coarse step
  InitialData initial;           // used for both runs unless initial_coarse is set
  InitialData initial_coarse;    // optional different data for the coarse run
  double t_end = 1.0;
  double compare_every = 0.05;
  double M = 0.0;  // 0 selects max{1, chi^2 max sigma_tilde}
  double C_max = 1.0;

  bool same_initial_data() const { return !initial_coarse; }
  GridSpec fine_grid() const;
  void validate() const;
};

struct WsuPoint {
  double t = 0.0;
  double R = 0.0;
  double kl = 0.0;
  double v0dual = 0.0;
  double W = 0.0;
  double rhs = 0.0;
  double dRdt = 0.0;
  double relenin_residual = 0.0;  // dR/dt + W - rhs
};

struct GronwallResult {
  double C_est = 0.0;
  double floor = 0.0;
  double max_R = 0.0;
  bool passed = false;
};

// Smallest C >= 0 with R(t) <= R(0) e^{C t} + floor on the series. For
// same-data pairs the verdict also requires max R <= 10 * floor.
GronwallResult gronwall_check(const std::vector<double>& t, const std::vector<double>& R,
                              double floor, double C_max, bool same_initial_data);

struct WsuResult {
  std::vector<WsuPoint> series;
  double M = 1.0;
  double floor = 0.0;  // R between the reference data and its restriction
  double residual_pos_max = 0.0;
  double residual_pos_p95 = 0.0;
  GronwallResult gronwall{};
  bool completed = false;
  std::string failure_reason;
};

// Fills dR/dt by central differences (one-sided at the ends) and the residual.
void finish_relenin(std::vector<WsuPoint>& series);

WsuResult run_paired(const PairedRunConfig& cfg);

struct PointwiseReport {
  std::size_t samples = 0;
  std::size_t fenchel_violations = 0;
  std::size_t cross_violations = 0;   // (s-st)(p-pt) <= 4(st|p-pt|^2 + KL)
  std::size_t sqrt_violations = 0;    // (sqrt s - sqrt st)^2 <= KL
  std::size_t lambda_violations = 0;  // Lambda(ln s | ln st) >= 0
  std::string first_violation;

  std::size_t total_violations() const {
    return fenchel_violations + cross_violations + sqrt_violations + lambda_violations;
  }
};

// `samples` random admissible tuples per inequality.
PointwiseReport pointwise_inequality_suite(std::size_t samples, std::uint64_t seed = 7);

}  // namespace chks
