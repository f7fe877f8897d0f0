#include "chks/potentials.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <string>

#include "chks/error.hpp"

namespace chks {

namespace {

void require_open_unit(double r, const char* what) {
  if (!(std::abs(r) < 1.0)) {
    throw Error(ErrorCode::OutOfDomain, std::string(what) + " needs |r| < 1, got " + std::to_string(r));
  }
}

}  // namespace

void PotentialParams::validate() const {
  if (!(lambda >= 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be >= 0");
  if (!std::isfinite(chi)) throw Error(ErrorCode::InvalidArgument, "chi must be finite");
  if (!(delta_safe > 0.0 && delta_safe < 0.5)) {
    throw Error(ErrorCode::InvalidArgument, "delta_safe must lie in (0, 0.5)");
  }
}

double potential_F(double r, double lambda) {
  require_open_unit(r, "F");
  return (1.0 + r) * std::log1p(r) + (1.0 - r) * std::log1p(-r) - 0.5 * lambda * r * r;
}

double potential_F_prime(double r, double lambda) { return beta(r) - lambda * r; }

namespace {
std::atomic<bool> g_beta_flip{false};
}

void set_beta_sign_flip(bool on) { g_beta_flip.store(on); }
bool beta_sign_flipped() { return g_beta_flip.load(std::memory_order_relaxed); }

double beta(double r) {
  require_open_unit(r, "beta");
  const double b = std::log1p(r) - std::log1p(-r);
  return beta_sign_flipped() ? -b : b;
}

double beta_prime(double r) {
  require_open_unit(r, "beta'");
  return 1.0 / (1.0 + r) + 1.0 / (1.0 - r);
}

double gamma_neg(double r) {
  const double rm = std::max(-r, 0.0);
  return -std::log1p(rm);
}

double gamma_hat(double r) {
  const double rm = std::max(-r, 0.0);
  return (1.0 + rm) * std::log1p(rm) - rm;
}

double entropy_density(double s) {
  if (s == 0.0) return 0.0;
  return s * (std::log(s) - 1.0);
}

double entropy_conjugate(double y) { return std::exp(y); }

double relative_entropy_density(double s, double st) {
  // st * (x - log1p(x)) with x = s/st - 1
  const double x = (s - st) / st;
  if (std::abs(x) < 1e-4) {
    // x - log1p(x) = x^2/2 - x^3/3 + x^4/4 - ...
    const double x2 = x * x;
    return st * x2 * (0.5 - x / 3.0 + x2 / 4.0 - x2 * x / 5.0);
  }
  return st * (x - std::log1p(x));
}

double sqrt_exp_bregman(double u, double ut) {
  const double d = 0.5 * (u - ut);
  return std::exp(0.5 * ut) * (std::expm1(d) - d);
}

void AlphaSpec::validate() const {
  if (const auto* lg = std::get_if<AlphaLogistic>(&variant)) {
    if (!(lg->ell > 0.0)) throw Error(ErrorCode::InvalidArgument, "logistic alpha needs ell > 0");
    if (!(lg->p > 0.0 && lg->p <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "logistic alpha needs p in (0, 1]");
    }
    if (!(lg->sigma_box_max > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "logistic alpha needs a positive sampling box");
    }
    for (std::size_t k = 1; k < lg->h_table.size(); ++k) {
      if (!(lg->h_table[k].first > lg->h_table[k - 1].first) ||
          lg->h_table[k].second < lg->h_table[k - 1].second) {
        throw Error(ErrorCode::InvalidArgument,
                    "h table must have increasing nodes and nondecreasing values");
      }
    }
  } else if (!std::isfinite(std::get<AlphaConstant>(variant).c)) {
    throw Error(ErrorCode::InvalidArgument, "constant alpha must be finite");
  }
}

std::pair<double, double> AlphaSpec::bounds() const {
  if (const auto* c = std::get_if<AlphaConstant>(&variant)) return {c->c, c->c};
  const auto& lg = std::get<AlphaLogistic>(variant);
  const double h_lo = interpolation_h(lg, -1.0);
  const double h_hi = interpolation_h(lg, 1.0);
  const double g_lo = 1.0 - lg.ell * std::pow(lg.sigma_box_max, lg.p);
  const double g_hi = 1.0;
  const double corners[4] = {h_lo * g_lo, h_lo * g_hi, h_hi * g_lo, h_hi * g_hi};
  return {*std::min_element(corners, corners + 4), *std::max_element(corners, corners + 4)};
}

double interpolation_h(const AlphaLogistic& spec, double r) {
  const auto& t = spec.h_table;
  if (t.empty()) return 0.5 * (1.0 + r);
  if (r <= t.front().first) return t.front().second;
  if (r >= t.back().first) return t.back().second;
  const auto it = std::upper_bound(t.begin(), t.end(), r,
                                   [](double v, const auto& node) { return v < node.first; });
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double w = (r - lo.first) / (hi.first - lo.first);
  return lo.second + w * (hi.second - lo.second);
}

double alpha_eval(const AlphaSpec& spec, double phi, double sigma) {
  if (sigma < 0.0) {
    throw Error(ErrorCode::NegativeSigma, "alpha evaluated at sigma = " + std::to_string(sigma));
  }
  if (const auto* c = std::get_if<AlphaConstant>(&spec.variant)) return c->c;
  const auto& lg = std::get<AlphaLogistic>(spec.variant);
  const double growth = sigma == 0.0 ? 1.0 : 1.0 - lg.ell * std::pow(sigma, lg.p);
  return interpolation_h(lg, phi) * growth;
}

SqrtLipschitzReport check_sqrt_lipschitz(const std::function<double(double)>& f, double cap,
                                         std::size_t samples, std::uint64_t seed) {
  SqrtLipschitzReport rep;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double root_cap = std::sqrt(cap);

  auto consider_pair = [&](double a, double b) {
    const double fa = f(a);
    const double fb = f(b);
    if (!std::isfinite(fa) || !std::isfinite(fb)) {
      rep.all_finite = false;
      return;
    }
    const double ds = std::abs(std::sqrt(a) - std::sqrt(b));
    if (ds > 0.0) rep.lipschitz_estimate = std::max(rep.lipschitz_estimate, std::abs(fa - fb) / ds);
    rep.growth_estimate = std::max(rep.growth_estimate, std::abs(fa) / (1.0 + std::sqrt(a)));
    rep.growth_estimate = std::max(rep.growth_estimate, std::abs(fb) / (1.0 + std::sqrt(b)));
    ++rep.samples;
  };

  for (std::size_t k = 0; k < samples; ++k) {
    switch (k % 3) {
      case 0:  // uniform in the argument
        consider_pair(cap * unit(rng), cap * unit(rng));
        break;
      case 1: {  // uniform in the square root
        const double s = root_cap * unit(rng);
        const double t = root_cap * unit(rng);
        consider_pair(s * s, t * t);
        break;
      }
      default: {  // nearby pairs probe the local slope
        const double s = root_cap * unit(rng);
        const double t = std::min(root_cap, s * (1.0 + 1e-3 * unit(rng)) + 1e-9);
        consider_pair(s * s, t * t);
        break;
      }
    }
  }
  return rep;
}

double sqrt_lipschitz_mean_value_constant(const std::function<double(double)>& f_prime,
                                          double cap, std::size_t samples) {
  const double root_cap = std::sqrt(cap);
  double sup = 0.0;
  for (std::size_t k = 0; k <= samples; ++k) {
    const double xi = root_cap * static_cast<double>(k) / static_cast<double>(samples);
    sup = std::max(sup, std::abs(2.0 * xi * f_prime(xi * xi)));
  }
  return sup;
}

double fenchel_gap(double r, double w, double wt, double u, double ut) {
  if (!(r > 0.0) || !(std::abs(w) < r) || !(std::abs(wt) < r) || !(u > 0.0) || !(ut > 0.0)) {
    throw Error(ErrorCode::DomainViolation, "fenchel_gap needs r > 0, |w|,|wt| < r, u,ut > 0");
  }
  const double factor = std::max(1.0 / (4.0 * r), 4.0 * r);
  const double dw = w - wt;
  const double rhs = factor * (ut * dw * dw + relative_entropy_density(u, ut));
  return rhs - dw * (u - ut);
}

}  // namespace chks
