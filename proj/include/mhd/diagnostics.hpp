#pragma once

#include <array>
#include <vector>

#include "mhd/dynamics.hpp"
#include "mhd/params.hpp"
#include "mhd/spectral.hpp"
#include "mhd/state.hpp"

namespace mhd {

// F = (mu + lambda) div u - (P(rho) - P(rho_tilde)). Defined up to its mean
// on the torus; comparisons against Poisson reconstructions go through
// gradients.
ScalarField effective_flux(const FluidState& state, const ModelParams& params);

// omega^{j,k} = d_k u^j - d_j u^k, exactly antisymmetric.
TensorField vorticity(const FluidState& state);

// Relative L2 residual of the acceleration decomposition
//   rho u_dot^j = d_j F + mu d_k omega^{j,k} - d_j(|H|^2/2) + div(H^j H).
// An algebraic consequence of the momentum equation, so the residual sits at
// round-off when deriv was assembled without dealiasing and grows only with
// the truncation otherwise.
double momentum_decomposition_residual(const FluidState& state, const StateDerivative& deriv,
                                       const ModelParams& params);

// Relative L2 residual of Lap(F) = div(g), g^j = rho u_dot^j + d_j(|H|^2/2)
// - div(H^j H). Internally cross-checks the fluctuation form of g against
// the full-field form; their difference must equal the (curl B) x H_tilde
// + H_tilde div B correction, which is linear in B.
double poisson_flux_residual(const FluidState& state, const StateDerivative& deriv,
                             const ModelParams& params);

struct EnergyLedger {
  double potential = 0.0;   // integral of G(rho)
  double kinetic = 0.0;     // integral of rho |u|^2 / 2
  double magnetic = 0.0;    // integral of |B|^2 / 2
  double dissipation = 0.0; // integral of mu |grad u|^2 + lambda (div u)^2
  double total() const { return potential + kinetic + magnetic; }
};
EnergyLedger energy_ledger(const FluidState& state, const ModelParams& params);

// Auxiliary fields w^j = grad F - 3 grad B^j and
// v^j = (mu+lambda) grad(div u) - 3 grad B^j, their quadratic functional
// (self terms plus all ordered pair sums, each weighted by rho/2), and the
// residual of the exact relation v^j - w^j = grad(P - P_tilde).
struct WvReport {
  std::array<VectorField, 3> w;
  std::array<VectorField, 3> v;
  double lyapunov = 0.0;
  double identity_residual = 0.0;
};
WvReport auxiliary_wv(const FluidState& state, const ModelParams& params);

// ||f||_{L^r} / (||f||_{L^2}^{(6-r)/2r} ||grad f||_{L^2}^{(3r-6)/2r}) for
// r in {3, 4, 6}. A monitor only: the interpolation constant on the torus
// differs from the whole-space one. Throws on constant input.
double sobolev_ratio(const ScalarField& f, int r);

// Norms entering the elliptic estimates that bound Lap(u), D^3 u, and
// grad F by lower-order data. Both sides are reported (squared) together
// with their ratios; the unknown constant is the reader's to observe.
struct EllipticNormReport {
  double grad_f_l2 = 0.0;
  double lap_u_l2 = 0.0;
  double d3_u_l2 = 0.0;
  double rhs_lap_u = 0.0;   // ||grad F||^2 + ||grad w||^2 + ||grad P||^2
                            //   + || |grad B||B| ||^2 + ||grad B||^2
  double rhs_d3_u = 0.0;    // ||Lap F||^2 + ||Lap w||^2 + ||Lap P||^2
                            //   + ||Lap B||^2 + || |Lap B||B| ||^2 + ||grad B||_{L^4}^4
  double rhs_grad_f = 0.0;  // ||rho u_dot||^2 + || |grad B||B| ||^2 + ||grad B||^2
  double ratio_lap_u = 0.0;
  double ratio_d3_u = 0.0;
  double ratio_grad_f = 0.0;
  bool degenerate = false;  // all ingredients vanish (uniform state)
};
EllipticNormReport elliptic_norm_report(const FluidState& state, const StateDerivative& deriv,
                                        const ModelParams& params);

struct DiagnosticsRecord {
  double t = 0.0;
  double energy_potential = 0.0;
  double energy_kinetic = 0.0;
  double energy_magnetic = 0.0;
  double dissipation = 0.0;
  double norm_h2_rho = 0.0;  // ||rho - rho_tilde||_{H^2}
  double norm_h2_u = 0.0;
  double norm_h2_b = 0.0;
  double norm_l2_rho_t = 0.0;
  double norm_l2_u_t = 0.0;
  double norm_l2_b_t = 0.0;
  double res_momentum_decomposition = 0.0;
  double res_poisson_flux = 0.0;
  double res_wv_identity = 0.0;
  double div_h_l2 = 0.0;
  double rho_min = 0.0;
  double rho_max = 0.0;
  double lyapunov_wv = 0.0;
  bool finite() const;
};
DiagnosticsRecord collect_diagnostics(const FluidState& state, const StateDerivative& deriv,
                                      const ModelParams& params);

// r(t_i) = E(t_i) - E(t_0) + integral of the dissipation rate, which
// vanishes identically for the exact solution. The two-argument form
// integrates the recorded rates by trapezoid at the record cadence; the
// three-argument form accepts externally accumulated integrals (e.g. the
// stage-weighted sums from the integrator) whose accuracy follows the
// step error rather than the cadence.
std::vector<double> energy_balance_residual(const std::vector<DiagnosticsRecord>& records);
std::vector<double> energy_balance_residual(const std::vector<DiagnosticsRecord>& records,
                                            const std::vector<double>& dissipation_integrals);

// Running ingredients of the master functional: sup over recorded times of
//   ||(rho - rho_tilde, u, B)||_{H^2}^2 + ||(rho_t, u_t, B_t)||_{L^2}^2
// plus the trapezoid-in-time integral of ||grad u||_{H^2}^2 + ||u_t||_{H^1}^2.
struct AFunctionalAccumulator {
  double running_sup = 0.0;
  double running_integral = 0.0;
  double last_t = 0.0;
  double last_integrand = 0.0;
  bool has_sample = false;
  double value() const { return running_sup + running_integral; }
};
AFunctionalAccumulator a_functional_update(AFunctionalAccumulator acc, const FluidState& state,
                                           const StateDerivative& deriv,
                                           const ModelParams& params);

}  // namespace mhd
