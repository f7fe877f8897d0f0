#pragma once

// Scalar nonlinearities of the model: the logarithmic (Flory-Huggins)
// potential and its monotone part, the entropy truncations used for ln(sigma),
// the proliferation rate family alpha(phi, sigma), and checkers for the two
// pointwise inequalities the uniqueness argument relies on.

#include <cstdint>
#include <functional>
#include <utility>
#include <variant>
#include <vector>

namespace chks {

struct PotentialParams {
  double lambda = 0.0;      // expansive coefficient, >= 0
  double chi = 1.0;         // chemotactic coefficient, > 0 for physical runs
  double delta_safe = 1e-6;  // iterates stay in [-1 + delta_safe, 1 - delta_safe]

  void validate() const;
};

// F(r) = (1+r)ln(1+r) + (1-r)ln(1-r) - (lambda/2) r^2. Throws OutOfDomain if |r| >= 1.
double potential_F(double r, double lambda);
// F'(r) = beta(r) - lambda r.
double potential_F_prime(double r, double lambda);
// beta(r) = ln(1+r) - ln(1-r), the monotone part of F'.
double beta(double r);
double beta_prime(double r);

// Mutation hook for the check battery: flips the sign of beta() process-wide.
void set_beta_sign_flip(bool on);
bool beta_sign_flipped();

// gamma(r) = -ln(1 + r_-) and gamma_hat(r) = (1 + r_-)ln(1 + r_-) - r_-, with
// r_- = max(-r, 0). gamma_hat' = gamma.
double gamma_neg(double r);
double gamma_hat(double r);

// The Fenchel pair: s(ln s - 1) and its convex conjugate exp.
double entropy_density(double s);
double entropy_conjugate(double y);

// s - st - st ln(s/st), evaluated without cancellation near s == st.
double relative_entropy_density(double s, double st);

// Lambda(u | ut) = e^{u/2} - e^{ut/2} - (1/2) e^{ut/2} (u - ut) >= 0.
double sqrt_exp_bregman(double u, double ut);

// ---------------------------------------------------------------------------
// alpha(phi, sigma)

struct AlphaConstant {
  double c = 0.0;
};

// alpha = h(phi) (1 - ell sigma^p). The interpolation h is (1+r)/2 unless a
// nondecreasing table of (r, h) nodes is supplied, which is linearly
// interpolated (and held constant outside its range).
struct AlphaLogistic {
  double ell = 1.0;
  double p = 1.0;
  std::vector<std::pair<double, double>> h_table;
  double sigma_box_max = 10.0;  // sampling box for the declared bounds
};

struct AlphaSpec {
  std::variant<AlphaConstant, AlphaLogistic> variant = AlphaConstant{};

  static AlphaSpec constant(double c) { return {AlphaConstant{c}}; }
  static AlphaSpec logistic(double ell, double p) { return {AlphaLogistic{ell, p, {}, 10.0}}; }

  bool is_constant() const { return std::holds_alternative<AlphaConstant>(variant); }

  // Throws InvalidArgument on ell <= 0, p outside (0,1], or a decreasing table.
  void validate() const;

  // Declared [lower, upper] bounds. Exact for the constant variant; for the
  // logistic variant valid on |phi| <= 1, 0 <= sigma <= sigma_box_max.
  std::pair<double, double> bounds() const;
};

double interpolation_h(const AlphaLogistic& spec, double r);

// Throws NegativeSigma if sigma < 0.
double alpha_eval(const AlphaSpec& spec, double phi, double sigma);

// ---------------------------------------------------------------------------
// Inequality checkers

struct SqrtLipschitzReport {
  double lipschitz_estimate = 0.0;  // sup |f(a)-f(b)| / |sqrt a - sqrt b|
  double growth_estimate = 0.0;     // sup |f(a)| / (1 + sqrt a)
  bool all_finite = true;
  std::size_t samples = 0;
};

SqrtLipschitzReport check_sqrt_lipschitz(const std::function<double(double)>& f, double cap,
                                         std::size_t samples = 20000,
                                         std::uint64_t seed = 12345);

// sup_{0 <= xi <= sqrt(cap)} |2 xi f'(xi^2)|: the constant produced by the
// mean-value argument for functions with |f'(r)| <= c / (1 + sqrt r).
double sqrt_lipschitz_mean_value_constant(const std::function<double(double)>& f_prime,
                                          double cap, std::size_t samples = 20000);

// RHS - LHS of
//   (w - wt)(u - ut) <= max{1/(4r), 4r} (ut |w - wt|^2 + u - ut - ut(ln u - ln ut)).
// Throws DomainViolation unless r > 0, |w|,|wt| < r and u, ut > 0.
double fenchel_gap(double r, double w, double wt, double u, double ut);

}  // namespace chks
