#pragma once

#include <array>
#include <variant>

#include "mhd/field.hpp"

namespace mhd {

// P(rho) = K rho^gamma, K > 0, gamma >= 1.
struct GammaLaw {
  double K = 1.0;
  double gamma = 1.4;

  GammaLaw() = default;
  GammaLaw(double K_, double gamma_);
};

// Cubic barotropic law that loses monotonicity on an interior window.
// Built from the landmarks rho_prime < rho_double_prime: the derivative
// 3a(rho - c1)(rho - c2) is negative exactly on the middle third
// (c1, c2) of [rho_prime, rho_double_prime]. Placing the dip strictly
// inside the window keeps P above P(rho_prime) past rho_prime (the dip
// bottom clears it by 2a((rho_double_prime - rho_prime)/3)^3) while P is
// still genuinely decreasing somewhere between the landmarks.
// Construction validates, on a fine 1D sample:
//   P(0) = 0, P > 0 on (0, inf),
//   P increasing on [0, rho_prime] and on [rho_double_prime, inf),
//   P(s) > P(rho_prime) for s > rho_prime,
//   P(s) > P(rho_double_prime) for s > rho_double_prime.
struct NonMonotone {
  std::array<double, 4> coef{};  // P = coef[1] rho + coef[2] rho^2 + coef[3] rho^3
  double rho_prime = 0.0;
  double rho_double_prime = 0.0;

  NonMonotone(double scale, double rho_prime_, double rho_double_prime_);
};

using PressureLaw = std::variant<GammaLaw, NonMonotone>;

// Pointwise evaluation; density must be positive (a violation is treated as
// solver blow-up, never clamped).
double pressure(const PressureLaw& law, double rho);
ScalarField pressure(const PressureLaw& law, const ScalarField& rho);

double pressure_derivative(const PressureLaw& law, double rho);
ScalarField pressure_derivative(const PressureLaw& law, const ScalarField& rho);

// G(rho) = rho * integral from rho_tilde to rho of (P(s) - P(rho_tilde))/s^2 ds.
// Closed form for GammaLaw; adaptive Simpson (abs tol 1e-12) otherwise.
double g_potential(const PressureLaw& law, double rho_tilde, double rho);
ScalarField g_potential(const PressureLaw& law, double rho_tilde, const ScalarField& rho);

}  // namespace mhd
