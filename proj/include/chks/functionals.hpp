#pragma once

// Quadrature of the free energy, the potentials it generates, the dissipation,
// and the relative energy / relative dissipation pair. Cell integrals use the
// midpoint rule; gradient integrals use the face quadrature of grid.hpp. Face
// values of sigma are logarithmic means.

#include "chks/error.hpp"
#include "chks/grid.hpp"
#include "chks/model.hpp"

namespace chks {

struct EnergyParts {
  double dirichlet = 0.0;      // 1/2 int |grad phi|^2
  double potential = 0.0;      // int F(phi)
  double coupling = 0.0;       // chi int sigma (1 - phi)
  double sigma_entropy = 0.0;  // int sigma (ln sigma - 1)
  double eps_term = 0.0;       // eps/2 int (sigma - 1)^2

  double total() const { return dirichlet + potential + coupling + sigma_entropy + eps_term; }
};

struct EnergyReport {
  double t = 0.0;
  double E_total = 0.0;
  EnergyParts parts{};
  double dissipation = 0.0;
  double mass_phi = 0.0;
  double mass_sigma = 0.0;
  double min_phi = 0.0, max_phi = 0.0;
  double min_sigma = 0.0, max_sigma = 0.0;
  double ln_sigma_L1 = 0.0;         // int |ln sigma|
  double llogl_beta = 0.0;          // int |beta(phi)| ln(1 + |beta(phi)|)
  double grad_ln_sigma_sq = 0.0;    // int |grad ln sigma|^2
  double gamma_hat_ln_sigma = 0.0;  // int gamma_hat(ln sigma)
  double sigma_llog = 0.0;          // int sigma ln(1 + sigma)
  double z_integrand = 0.0;         // int (sigma (ln sigma - 1) + 1)
};

// Logarithmic mean (a - b) / (ln a - ln b), equal to a when a == b.
double log_mean(double a, double b);

// Throws OutOfDomain unless |phi| < 1 and sigma > 0 in every cell.
EnergyParts energy(const Field& phi, const Field& sigma, const ModelParams& params);

// -laplacian(phi) + beta(phi) - lambda phi - chi sigma. Throws OutOfDomain if
// any |phi| > 1 - delta_safe.
Field chemical_potential(const Field& phi, const Field& sigma, const ModelParams& params);

// ln sigma + chi (1 - phi) + eps (sigma - 1). Throws NonpositiveSigma.
Field nutrient_potential(const Field& phi, const Field& sigma, double chi, double eps = 0.0);

// int m(sigma) |grad(ln sigma + eps(sigma-1) + chi(1-phi))|^2 + |grad mu|^2 with
// face mobility m = L/(1 + eps L), L the log mean. Throws NonpositiveSigma.
double dissipation(const Field& phi, const Field& mu, const Field& sigma, double chi,
                   double eps = 0.0);

// Fills every field of EnergyReport at time t.
EnergyReport energy_report(const Field& phi, const Field& sigma, const Field& mu, double t,
                           const ModelParams& params);

// ---------------------------------------------------------------------------
// Relative energy

struct RelEnergyReport {
  double t = 0.0;
  double R = 0.0;
  double kl_sigma = 0.0;     // int sigma - st - st ln(sigma/st)
  double v0dual_part = 0.0;  // (M/2) ||phi - phit||^2 in the dual norm
  double W = 0.0;
  double M = 1.0;
};

struct RelDissipationParts {
  double grad_ln_sq = 0.0;   // int st |grad ln sigma - grad ln st|^2
  double cross = 0.0;        // int chi st (grad ln sigma - grad ln st).(grad phi - grad phit)
  double grad_phi_sq = 0.0;  // int |grad phi - grad phit|^2
  double monotone = 0.0;     // int (F'(phi) - F'(phit))(phi - phit) + lambda |phi - phit|^2

  double W(double M) const { return grad_ln_sq - cross + M * (grad_phi_sq + monotone); }
};

// max{1, chi^2 sup sigma_tilde}.
double default_M(double chi, double sigma_tilde_max);

// R(phi, sigma | phit, sigmat). W is left at 0. Throws NonpositiveSigma, or
// NonZeroMean when phi - phit is not mean-free.
RelEnergyReport relative_energy(const Field& phi, const Field& sigma, const Field& phit,
                                const Field& sigmat, double M, const KrylovOptions& krylov = {});

RelDissipationParts relative_dissipation_parts(const Field& phi, const Field& sigma,
                                               const Field& phit, const Field& sigmat,
                                               const ModelParams& params);

double relative_dissipation(const Field& phi, const Field& sigma, const Field& phit,
                            const Field& sigmat, double M, const ModelParams& params);

// Right-hand side of the relative energy inequality:
// int [alpha(phi,sigma) - alpha(phit,sigmat)](sigma - sigmat) + alpha(phit,sigmat) KL
//     + M chi (sigma - sigmat)(phi - phit) + lambda M |phi - phit|^2.
double relative_energy_rhs(const Field& phi, const Field& sigma, const Field& phit,
                           const Field& sigmat, double M, const ModelParams& params);

}  // namespace chks
