#include "chks/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "chks/simd/kernels.hpp"

namespace chks {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;
using SparseLu = Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>>;

// Symbolic factorizations depend only on the grid, so they are reused across
// steps. One cache per thread keeps concurrent runs independent.
struct LuCache {
  GridSpec grid{};
  bool analyzed = false;
  SparseLu lu;

  SparseLu& prepare(const GridSpec& g, const SpMat& A) {
    if (!analyzed || !(grid == g)) {
      lu.analyzePattern(A);
      grid = g;
      analyzed = true;
    }
    lu.factorize(A);
    return lu;
  }
};

LuCache& newton_cache() {
  thread_local LuCache cache;
  return cache;
}

LuCache& sigma_cache() {
  thread_local LuCache cache;
  return cache;
}

// Entries of the Neumann Laplacian, offset into a larger block system.
void push_laplacian(const GridSpec& g, std::vector<Triplet>& trip, int row0, int col0,
                    double scale) {
  for (const Face& f : faces(g)) {
    const double h = g.spacing(f.axis);
    const double w = scale / (h * h);
    const int l = static_cast<int>(f.left);
    const int r = static_cast<int>(f.right);
    trip.emplace_back(row0 + l, col0 + l, -w);
    trip.emplace_back(row0 + l, col0 + r, w);
    trip.emplace_back(row0 + r, col0 + r, -w);
    trip.emplace_back(row0 + r, col0 + l, w);
  }
}

struct ChResidual {
  std::vector<double> r1;  // (phi - phi_n)/dt - lap mu
  std::vector<double> r2;  // mu + lap phi - beta(phi) + lambda phi_n + chi sigma
  double norm = 0.0;
};

ChResidual ch_residual(const Field& phi, const Field& mu, const Field& phi_n, const Field& sigma,
                       const ModelParams& p, double dt) {
  const std::size_t n = phi.size();
  const Field lap_mu = laplacian(mu);
  const Field lap_phi = laplacian(phi);
  ChResidual res;
  res.r1.resize(n);
  res.r2.resize(n);
  for (std::size_t c = 0; c < n; ++c) {
    res.r1[c] = (phi[c] - phi_n[c]) / dt - lap_mu[c];
    res.r2[c] = mu[c] + lap_phi[c] - beta(phi[c]) + p.lambda * phi_n[c] + p.chi * sigma[c];
  }
  const auto& k = simd::active_kernels();
  const double s = k.dot(res.r1.data(), res.r1.data(), n) + k.dot(res.r2.data(), res.r2.data(), n);
  res.norm = std::sqrt(s * phi.grid().cell_volume());
  return res;
}

}  // namespace

void SolverConfig::validate() const {
  auto bad = [](const std::string& m) { throw Error(ErrorCode::InvalidArgument, m); };
  if (!(dt_min > 0.0)) bad("dt_min must be > 0");
  if (!(dt_min <= dt && dt <= dt_max)) bad("need dt_min <= dt <= dt_max");
  if (!(newton_tol > 0.0)) bad("newton_tol must be > 0");
  if (newton_max_iters < 1) bad("newton_max_iters must be >= 1");
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) bad("backtrack_factor must lie in (0, 1)");
  if (max_halvings < 0) bad("max_halvings must be >= 0");
  if (!(krylov_tol > 0.0)) bad("krylov_tol must be > 0");
  if (!(grow_factor >= 1.0)) bad("grow_factor must be >= 1");
  if (grow_after < 1) bad("grow_after must be >= 1");
}

State make_state(Field phi, Field sigma, const ModelParams& params, double t) {
  State s;
  s.mu = chemical_potential(phi, sigma, params);
  s.phi = std::move(phi);
  s.sigma = std::move(sigma);
  s.t = t;
  return s;
}

void validate_initial_data(const Field& phi0, const Field& sigma0, const ModelParams& params) {
  auto bad = [](const std::string& m) { throw Error(ErrorCode::InvalidArgument, m); };
  if (!(phi0.grid() == sigma0.grid())) bad("phi0 and sigma0 must share a grid");
  if (!phi0.all_finite()) bad("phi0 must be finite");
  if (!sigma0.all_finite()) bad("sigma0 must be finite");
  const double bound = 1.0 - params.delta_safe;
  for (std::size_t c = 0; c < phi0.size(); ++c) {
    if (!(std::abs(phi0[c]) <= bound)) {
      bad("|phi0| <= 1 - delta_safe violated at cell " + std::to_string(c));
    }
    if (!(sigma0[c] > 0.0)) bad("sigma0 > 0 violated at cell " + std::to_string(c));
  }
  if (!(std::abs(mean(phi0)) < 1.0)) bad("|mean(phi0)| < 1 violated");
}

double bernoulli(double x) {
  if (std::abs(x) < 1e-6) return 1.0 - 0.5 * x + x * x / 12.0;
  return x / std::expm1(x);
}

CahnHilliardStep step_cahn_hilliard(const State& state, const Field& sigma_frozen,
                                    const ModelParams& params, const SolverConfig& cfg,
                                    double dt) {
  const GridSpec& g = state.phi.grid();
  const int n = static_cast<int>(g.size());
  const double bound = 1.0 - params.delta_safe;

  std::vector<Triplet> base;
  push_laplacian(g, base, 0, n, -1.0);  // -L in block (1,2)
  push_laplacian(g, base, n, 0, 1.0);   //  L in block (2,1)
  for (int c = 0; c < n; ++c) {
    base.emplace_back(c, c, 1.0 / dt);
    base.emplace_back(n + c, n + c, 1.0);
  }

  CahnHilliardStep out;
  out.phi = state.phi;
  out.mu = state.mu;
  ChResidual res = ch_residual(out.phi, out.mu, state.phi, sigma_frozen, params, dt);

  for (int it = 0; it < cfg.newton_max_iters; ++it) {
    if (res.norm <= cfg.newton_tol) {
      out.residual = res.norm;
      return out;
    }
    std::vector<Triplet> trip = base;
    for (int c = 0; c < n; ++c) trip.emplace_back(n + c, c, -beta_prime(out.phi[c]));
    SpMat J(2 * n, 2 * n);
    J.setFromTriplets(trip.begin(), trip.end());
    SparseLu& lu = newton_cache().prepare(g, J);
    if (lu.info() != Eigen::Success) {
      throw Error(ErrorCode::NewtonDiverged, "singular Newton matrix at iteration " + std::to_string(it));
    }
    Eigen::VectorXd rhs(2 * n);
    for (int c = 0; c < n; ++c) {
      rhs[c] = -res.r1[c];
      rhs[n + c] = -res.r2[c];
    }
    const Eigen::VectorXd d = lu.solve(rhs);
    if (!d.allFinite()) throw Error(ErrorCode::NewtonDiverged, "non-finite Newton update");

    // Fraction to the boundary of [-1 + delta, 1 - delta].
    double s = 1.0;
    for (int c = 0; c < n; ++c) {
      const double dp = d[c];
      if (dp > 0.0) s = std::min(s, (bound - out.phi[c]) / dp);
      if (dp < 0.0) s = std::min(s, (-bound - out.phi[c]) / dp);
    }
    s = std::max(s, 0.0);

    bool accepted = false;
    for (int k = 0; k <= cfg.max_halvings && s > 0.0; ++k) {
      Field phi_try = out.phi;
      Field mu_try = out.mu;
      for (int c = 0; c < n; ++c) {
        phi_try[c] = std::clamp(out.phi[c] + s * d[c], -bound, bound);
        mu_try[c] += s * d[n + c];
      }
      ChResidual r_try = ch_residual(phi_try, mu_try, state.phi, sigma_frozen, params, dt);
      if (std::isfinite(r_try.norm) && r_try.norm <= (1.0 - 1e-4 * s) * res.norm) {
        out.phi = std::move(phi_try);
        out.mu = std::move(mu_try);
        res = std::move(r_try);
        accepted = true;
        break;
      }
      s *= cfg.backtrack_factor;
    }
    out.newton_iters = it + 1;
    if (!accepted) {
      if (res.norm <= 1e3 * cfg.newton_tol) break;  // stagnation at rounding level
      throw Error(ErrorCode::NewtonDiverged,
                  "line search failed at iteration " + std::to_string(it) +
                      ", residual " + std::to_string(res.norm));
    }
  }
  if (res.norm > cfg.newton_tol && res.norm > 1e3 * cfg.newton_tol) {
    throw Error(ErrorCode::NewtonDiverged, "no convergence in " + std::to_string(cfg.newton_max_iters) +
                                               " iterations, residual " + std::to_string(res.norm));
  }
  out.residual = res.norm;
  return out;
}

Field step_sigma(const Field& sigma_n, const Field& phi_new, const ModelParams& params, double dt) {
  const GridSpec& g = sigma_n.grid();
  const int n = static_cast<int>(g.size());
  std::vector<double> alpha(n);
  double amax = 0.0;
  for (int c = 0; c < n; ++c) {
    alpha[c] = alpha_eval(params.alpha, phi_new[c], sigma_n[c]);
    amax = std::max(amax, alpha[c]);
  }
  if (!(dt * amax < 1.0)) {
    throw Error(ErrorCode::PositivityLost, "dt * max(alpha_+) = " + std::to_string(dt * amax) + " >= 1");
  }

  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(n) + 4 * g.num_faces());
  for (int c = 0; c < n; ++c) trip.emplace_back(c, c, 1.0 / dt - alpha[c]);
  // Face flux of grad sigma + sigma grad w in the +axis direction:
  // F = (1/h) [B(-dw) s_r - B(dw) s_l], dw = m (w_r - w_l). It vanishes on
  // s ~ exp(-w), and the system matrix is a column-diagonally dominant M-matrix.
  for (const Face& f : faces(g)) {
    const double h = g.spacing(f.axis);
    const int l = static_cast<int>(f.left);
    const int r = static_cast<int>(f.right);
    double dw = params.chi * ((1.0 - phi_new[r]) - (1.0 - phi_new[l]));
    if (params.epsilon > 0.0) dw /= 1.0 + params.epsilon * 0.5 * (sigma_n[l] + sigma_n[r]);
    const double bp = bernoulli(dw) / (h * h);
    const double bm = bernoulli(-dw) / (h * h);
    trip.emplace_back(l, l, bp);
    trip.emplace_back(l, r, -bm);
    trip.emplace_back(r, r, bm);
    trip.emplace_back(r, l, -bp);
  }
  SpMat A(n, n);
  A.setFromTriplets(trip.begin(), trip.end());
  SparseLu& lu = sigma_cache().prepare(g, A);
  if (lu.info() != Eigen::Success) throw Error(ErrorCode::SolverDiverged, "sigma system is singular");
  Eigen::VectorXd rhs(n);
  for (int c = 0; c < n; ++c) rhs[c] = sigma_n[c] / dt;
  const Eigen::VectorXd x = lu.solve(rhs);
  Field out(g);
  for (int c = 0; c < n; ++c) {
    if (!(x[c] > 0.0) || !std::isfinite(x[c])) {
      throw Error(ErrorCode::PositivityLost, "sigma <= 0 at cell " + std::to_string(c));
    }
    out[c] = x[c];
  }
  return out;
}

State step(const State& state, const ModelParams& params, const SolverConfig& cfg, double dt,
           StepInfo* info) {
  int rejections = 0;
  std::string last;
  while (true) {
    try {
      CahnHilliardStep ch = step_cahn_hilliard(state, state.sigma, params, cfg, dt);
      Field sigma = step_sigma(state.sigma, ch.phi, params, dt);
      State next;
      next.phi = std::move(ch.phi);
      next.sigma = std::move(sigma);
      next.mu = std::move(ch.mu);
      next.t = state.t + dt;
      if (info) *info = {dt, ch.newton_iters, rejections};
      return next;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NewtonDiverged && e.code() != ErrorCode::PositivityLost &&
          e.code() != ErrorCode::SolverDiverged && e.code() != ErrorCode::OutOfDomain) {
        throw;
      }
      last = e.what();
    }
    dt *= 0.5;
    ++rejections;
    if (dt < cfg.dt_min) {
      throw Error(ErrorCode::NewtonDiverged, "dt fell below dt_min after " + std::to_string(rejections) +
                                                 " halvings; last failure: " + last);
    }
  }
}

std::vector<double> report_times(double t_end, double report_every) {
  std::vector<double> out;
  if (!(t_end > 0.0)) return out;
  if (report_every > 0.0) {
    for (std::size_t k = 1;; ++k) {
      const double t = static_cast<double>(k) * report_every;
      if (t >= t_end * (1.0 - 1e-12)) break;
      out.push_back(t);
    }
  }
  out.push_back(t_end);
  return out;
}

RunResult run(const Field& phi0, const Field& sigma0, const ModelParams& params,
              const SolverConfig& cfg, double t_end, double report_every,
              const StepObserver& observer) {
  params.validate();
  cfg.validate();
  validate_initial_data(phi0, sigma0, params);
  if (!(t_end >= 0.0)) throw Error(ErrorCode::InvalidArgument, "t_end must be >= 0");

  RunResult result;
  State s = make_state(phi0, sigma0, params, 0.0);
  result.series.push_back(energy_report(s.phi, s.sigma, s.mu, s.t, params));
  result.report_step.push_back(0);

  const std::vector<double> targets = report_times(t_end, report_every);
  std::size_t report_index = 0;
  double dt_cur = cfg.dt;
  int easy = 0;
  try {
    while (report_index < targets.size()) {
      const double target = targets[report_index];
      double remaining = target - s.t;
      double dt = dt_cur;
      bool lands = false;
      if (remaining <= dt * (1.0 + 1e-9)) {
        dt = remaining;
        lands = true;
      }
      StepInfo info;
      State next = step(s, params, cfg, dt, &info);
      if (info.rejections > 0) {
        lands = false;
        dt_cur = std::max(cfg.dt_min, info.dt_used);
        easy = 0;
      } else if (info.newton_iters <= cfg.easy_newton_iters) {
        if (++easy >= cfg.grow_after && dt_cur < cfg.dt_max) {
          dt_cur = std::min(cfg.dt_max, dt_cur * cfg.grow_factor);
          easy = 0;
        }
      } else {
        easy = 0;
      }
      if (lands) next.t = target;
      StepLog log{next.t, info.dt_used, info.newton_iters, info.rejections};
      result.steps.push_back(log);
      if (observer) observer(s, next, log);
      s = std::move(next);
      if (lands) {
        result.series.push_back(energy_report(s.phi, s.sigma, s.mu, s.t, params));
        result.report_step.push_back(result.steps.size());
        ++report_index;
      }
    }
    result.completed = true;
  } catch (const Error& e) {
    result.failure_reason = e.what();
  }
  result.final_state = std::move(s);
  return result;
}

double estimate_T0(double c, double y0, double cap, double horizon) {
  if (!(c > 0.0) || !(y0 >= 0.0) || !(cap > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "estimate_T0 needs c > 0, y0 >= 0, cap > 0");
  }
  if (y0 >= cap) return 0.0;
  auto f = [](double z) { return 1.0 + z * z * z; };
  auto rk4 = [&](double z, double h) {
    const double k1 = f(z);
    const double k2 = f(z + 0.5 * h * k1);
    const double k3 = f(z + 0.5 * h * k2);
    const double k4 = f(z + h * k3);
    return z + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  };
  auto fine = [&](double z, double h) { return rk4(rk4(z, 0.5 * h), 0.5 * h); };

  // Integrate in s = c t.
  const double s_horizon = c * horizon;
  double s = 0.0;
  double z = y0;
  double h = 1e-3 / (1.0 + y0 * y0);
  while (s < s_horizon) {
    h = std::min(h, s_horizon - s);
    const double big = rk4(z, h);
    const double small = fine(z, h);
    const double err = std::abs(small - big) / 15.0;
    const double tol = 1e-12 * std::max(1.0, std::abs(small));
    if (!std::isfinite(small) || err > tol) {
      const double fac = std::isfinite(err) && err > 0.0 ? 0.9 * std::pow(tol / err, 0.2) : 0.1;
      h *= std::clamp(fac, 0.1, 0.5);
      if (h < 1e-300) break;
      continue;
    }
    if (small >= cap) {
      double lo = 0.0, hi = h;
      for (int k = 0; k < 200 && hi - lo > 1e-16 * std::max(1.0, s); ++k) {
        const double mid = 0.5 * (lo + hi);
        if (fine(z, mid) >= cap) hi = mid;
        else lo = mid;
      }
      return (s + hi) / c;
    }
    s += h;
    z = small;
    const double fac = err > 0.0 ? 0.9 * std::pow(tol / err, 0.2) : 4.0;
    h *= std::clamp(fac, 0.2, 4.0);
  }
  return std::numeric_limits<double>::infinity();
}

}  // namespace chks
