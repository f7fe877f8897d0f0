#include "chks/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "chks/simd/kernels.hpp"

namespace chks {

namespace {

double sum_fixed(const std::vector<double>& v) {
  return simd::active_kernels().sum(v.data(), v.size());
}

void require_positive(const Field& sigma, const char* name) {
  for (std::size_t c = 0; c < sigma.size(); ++c) {
    if (!(sigma[c] > 0.0)) {
      throw Error(ErrorCode::NonpositiveSigma, std::string(name) + " <= 0 at cell " +
                                                   std::to_string(c) + " (" +
                                                   std::to_string(sigma[c]) + ")");
    }
  }
}

Field log_field(const Field& sigma) {
  Field out(sigma.grid());
  for (std::size_t c = 0; c < sigma.size(); ++c) out[c] = std::log(sigma[c]);
  return out;
}

}  // namespace

double log_mean(double a, double b) {
  const double x = (a - b) / b;
  if (std::abs(x) < 1e-4) {
    // x / log1p(x) = 1 + x/2 - x^2/12 + x^3/24 - ...
    return b * (1.0 + x * (0.5 + x * (-1.0 / 12.0 + x / 24.0)));
  }
  return (a - b) / (std::log(a) - std::log(b));
}

EnergyParts energy(const Field& phi, const Field& sigma, const ModelParams& params) {
  const std::size_t n = phi.size();
  for (std::size_t c = 0; c < n; ++c) {
    if (!(std::abs(phi[c]) < 1.0) || !(sigma[c] > 0.0)) {
      throw Error(ErrorCode::OutOfDomain, "energy needs |phi| < 1 and sigma > 0 (cell " +
                                              std::to_string(c) + ")");
    }
  }
  const double vol = phi.grid().cell_volume();
  std::vector<double> pot(n), cpl(n), ent(n), eps(n);
  for (std::size_t c = 0; c < n; ++c) {
    pot[c] = potential_F(phi[c], params.lambda);
    cpl[c] = params.chi * sigma[c] * (1.0 - phi[c]);
    ent[c] = entropy_density(sigma[c]);
    eps[c] = 0.5 * params.epsilon * (sigma[c] - 1.0) * (sigma[c] - 1.0);
  }
  const FaceField g = grad(phi);
  EnergyParts parts;
  parts.dirichlet = 0.5 * face_inner(g, g);
  parts.potential = sum_fixed(pot) * vol;
  parts.coupling = sum_fixed(cpl) * vol;
  parts.sigma_entropy = sum_fixed(ent) * vol;
  parts.eps_term = sum_fixed(eps) * vol;
  return parts;
}

Field chemical_potential(const Field& phi, const Field& sigma, const ModelParams& params) {
  const double bound = 1.0 - params.delta_safe;
  Field mu = laplacian(phi);
  for (std::size_t c = 0; c < phi.size(); ++c) {
    if (!(std::abs(phi[c]) <= bound)) {
      throw Error(ErrorCode::OutOfDomain, "chemical potential needs |phi| <= 1 - delta_safe (cell " +
                                              std::to_string(c) + ")");
    }
    mu[c] = -mu[c] + beta(phi[c]) - params.lambda * phi[c] - params.chi * sigma[c];
  }
  return mu;
}

Field nutrient_potential(const Field& phi, const Field& sigma, double chi, double eps) {
  require_positive(sigma, "sigma");
  Field out(sigma.grid());
  for (std::size_t c = 0; c < sigma.size(); ++c) {
    out[c] = std::log(sigma[c]) + chi * (1.0 - phi[c]) + eps * (sigma[c] - 1.0);
  }
  return out;
}

double dissipation(const Field& phi, const Field& mu, const Field& sigma, double chi,
                   double eps) {
  const Field pot = nutrient_potential(phi, sigma, chi, eps);
  const GridSpec& g = phi.grid();
  const auto fs = faces(g);
  std::vector<double> terms(fs.size());
  for (std::size_t f = 0; f < fs.size(); ++f) {
    const auto [l, r, axis] = fs[f];
    const double h = g.spacing(axis);
    double m = log_mean(sigma[r], sigma[l]);
    if (eps > 0.0) m = m / (1.0 + eps * m);
    const double gp = (pot[r] - pot[l]) / h;
    const double gm = (mu[r] - mu[l]) / h;
    terms[f] = m * gp * gp + gm * gm;
  }
  return sum_fixed(terms) * g.cell_volume();
}

EnergyReport energy_report(const Field& phi, const Field& sigma, const Field& mu, double t,
                           const ModelParams& params) {
  EnergyReport rep;
  rep.t = t;
  rep.parts = energy(phi, sigma, params);
  rep.E_total = rep.parts.total();
  rep.dissipation = dissipation(phi, mu, sigma, params.chi, params.epsilon);
  rep.mass_phi = integrate(phi);
  rep.mass_sigma = integrate(sigma);
  rep.min_phi = phi.min();
  rep.max_phi = phi.max();
  rep.min_sigma = sigma.min();
  rep.max_sigma = sigma.max();

  const std::size_t n = phi.size();
  const double vol = phi.grid().cell_volume();
  std::vector<double> lnabs(n), llogl(n), ghat(n), sll(n), z(n);
  for (std::size_t c = 0; c < n; ++c) {
    const double ls = std::log(sigma[c]);
    const double b = std::abs(beta(phi[c]));
    lnabs[c] = std::abs(ls);
    llogl[c] = b * std::log1p(b);
    ghat[c] = gamma_hat(ls);
    sll[c] = sigma[c] * std::log1p(sigma[c]);
    z[c] = entropy_density(sigma[c]) + 1.0;
  }
  rep.ln_sigma_L1 = sum_fixed(lnabs) * vol;
  rep.llogl_beta = sum_fixed(llogl) * vol;
  rep.gamma_hat_ln_sigma = sum_fixed(ghat) * vol;
  rep.sigma_llog = sum_fixed(sll) * vol;
  rep.z_integrand = sum_fixed(z) * vol;
  const FaceField gl = grad(log_field(sigma));
  rep.grad_ln_sigma_sq = face_inner(gl, gl);
  return rep;
}

double default_M(double chi, double sigma_tilde_max) {
  return std::max(1.0, chi * chi * sigma_tilde_max);
}

RelEnergyReport relative_energy(const Field& phi, const Field& sigma, const Field& phit,
                                const Field& sigmat, double M, const KrylovOptions& krylov) {
  require_positive(sigma, "sigma");
  require_positive(sigmat, "sigma_tilde");
  const std::size_t n = phi.size();
  std::vector<double> kl(n);
  for (std::size_t c = 0; c < n; ++c) kl[c] = relative_entropy_density(sigma[c], sigmat[c]);

  RelEnergyReport rep;
  rep.M = M;
  rep.kl_sigma = sum_fixed(kl) * phi.grid().cell_volume();
  rep.v0dual_part = 0.5 * M * v0dual_norm_sq(phi - phit, krylov);
  rep.R = rep.kl_sigma + rep.v0dual_part;
  return rep;
}

RelDissipationParts relative_dissipation_parts(const Field& phi, const Field& sigma,
                                               const Field& phit, const Field& sigmat,
                                               const ModelParams& params) {
  require_positive(sigma, "sigma");
  require_positive(sigmat, "sigma_tilde");
  const GridSpec& g = phi.grid();
  const Field ls = log_field(sigma);
  const Field lst = log_field(sigmat);
  const auto fs = faces(g);
  std::vector<double> t_ln(fs.size()), t_cross(fs.size()), t_phi(fs.size());
  for (std::size_t f = 0; f < fs.size(); ++f) {
    const auto [l, r, axis] = fs[f];
    const double h = g.spacing(axis);
    const double st = log_mean(sigmat[r], sigmat[l]);
    const double a = (ls[r] - ls[l]) / h - (lst[r] - lst[l]) / h;
    const double b = (phi[r] - phi[l]) / h - (phit[r] - phit[l]) / h;
    t_ln[f] = st * a * a;
    t_cross[f] = params.chi * st * a * b;
    t_phi[f] = b * b;
  }
  const std::size_t n = phi.size();
  std::vector<double> mono(n);
  for (std::size_t c = 0; c < n; ++c) {
    const double e = phi[c] - phit[c];
    mono[c] = (potential_F_prime(phi[c], params.lambda) - potential_F_prime(phit[c], params.lambda)) * e +
              params.lambda * e * e;
  }
  const double vol = g.cell_volume();
  RelDissipationParts parts;
  parts.grad_ln_sq = sum_fixed(t_ln) * vol;
  parts.cross = sum_fixed(t_cross) * vol;
  parts.grad_phi_sq = sum_fixed(t_phi) * vol;
  parts.monotone = sum_fixed(mono) * vol;
  return parts;
}

double relative_dissipation(const Field& phi, const Field& sigma, const Field& phit,
                            const Field& sigmat, double M, const ModelParams& params) {
  return relative_dissipation_parts(phi, sigma, phit, sigmat, params).W(M);
}

double relative_energy_rhs(const Field& phi, const Field& sigma, const Field& phit,
                           const Field& sigmat, double M, const ModelParams& params) {
  require_positive(sigma, "sigma");
  require_positive(sigmat, "sigma_tilde");
  const std::size_t n = phi.size();
  std::vector<double> terms(n);
  for (std::size_t c = 0; c < n; ++c) {
    const double a = alpha_eval(params.alpha, phi[c], sigma[c]);
    const double at = alpha_eval(params.alpha, phit[c], sigmat[c]);
    const double ds = sigma[c] - sigmat[c];
    const double dp = phi[c] - phit[c];
    terms[c] = (a - at) * ds + at * relative_entropy_density(sigma[c], sigmat[c]) +
               M * params.chi * ds * dp + params.lambda * M * dp * dp;
  }
  return sum_fixed(terms) * phi.grid().cell_volume();
}

}  // namespace chks
