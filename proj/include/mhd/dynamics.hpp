#pragma once

#include <array>
#include <functional>
#include <optional>

#include "mhd/spectral.hpp"
#include "mhd/state.hpp"

namespace mhd {

// Time derivative of the conservative variables (rho, m = rho*u, H),
// plus two cheap byproducts of the evaluation that downstream consumers
// would otherwise recompute: the dissipation rate
// integral(mu|grad u|^2 + lambda (div u)^2) and the effective viscous
// flux field F = (mu+lambda) div u - (P - P_tilde).
struct StateDerivative {
  ScalarField d_rho;
  VectorField d_m;
  VectorField d_H;
  double dissipation = 0.0;
  ScalarField flux;
};

// Extra sources added to the conservative derivatives at time t
// (manufactured-solution forcing; absent in physical runs).
using Forcing = std::function<void(double t, StateDerivative& d)>;

struct RhsOptions {
  // 2/3-rule truncation of the quadratic flux products (mass flux, magnetic
  // stress, induction exchange). The advective velocity transport term is
  // never truncated: the momentum budget telescopes against the diagnostics
  // exactly only if rho*u_dot reduces to the force terms pointwise.
  bool dealias = true;
  const Forcing* forcing = nullptr;
};

StateDerivative rhs(const FluidState& state, const ModelParams& params,
                    const RhsOptions& opts = {});

// u_t recovered from the conservative derivatives: (d_m - u d_rho) / rho.
VectorField u_t(const FluidState& state, const StateDerivative& deriv);

// (u . grad) u, assembled pointwise from spectral velocity gradients.
VectorField convection(const FluidState& state);

// Material derivative u_dot = u_t + (u . grad) u.
VectorField u_dot(const FluidState& state, const StateDerivative& deriv);

// rho * u_dot without the intermediate division by rho, so that the
// transport terms cancel algebraically against the rhs assembly.
VectorField rho_u_dot(const FluidState& state, const StateDerivative& deriv);

// Velocity and effective flux at one RK stage, for particle integration
// that reuses the exact stage data of the field step.
struct StageData {
  double t = 0.0;
  VectorField u;
  ScalarField flux;
};

struct StepOptions {
  RhsOptions rhs;
  bool want_stages = false;  // collect StageData (costs three field copies/stage)
};

struct StepResult {
  FluidState state;
  // Integral of the dissipation rate over the step, accumulated with the
  // RK4 stage weights dt/6 (D1 + 2 D2 + 2 D3 + D4). This is the quadrature
  // the scheme itself implies, so the energy balance residual inherits the
  // full 4th-order convergence instead of being capped by a trapezoid.
  double dissipation_increment = 0.0;
  std::optional<std::array<StageData, 4>> stages;
};

StepResult step_rk4(const FluidState& state, const ModelParams& params, double dt,
                    const StepOptions& opts = {});

// Advective limit C_cfl * min h/(|u| + c_f) with c_f^2 = max(P'(rho),0) + |H|^2/rho,
// further capped by the explicit viscous limit C_visc * h^2 * rho_min / (mu+lambda).
double cfl_dt(const FluidState& state, const ModelParams& params, double c_cfl = 0.4,
              double c_visc = 0.09);

// L2 norm of div H against the state-dependent tolerance 1e-8 * (1 + ||H||_H1).
struct DivergenceReport {
  double div_l2 = 0.0;
  double tolerance = 0.0;
  bool ok = true;
};
DivergenceReport check_solenoidal(const FluidState& state);

}  // namespace mhd
