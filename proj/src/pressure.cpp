#include "mhd/pressure.hpp"

#include <cmath>

#include "mhd/errors.hpp"

namespace mhd {

GammaLaw::GammaLaw(double K_, double gamma_) : K(K_), gamma(gamma_) {
  if (!(K > 0.0)) throw ConfigError("pressure: stiffness K must be positive");
  if (!(gamma >= 1.0)) throw ConfigError("pressure: gamma must be >= 1");
}

namespace {

double cubic(const std::array<double, 4>& c, double r) {
  return ((c[3] * r + c[2]) * r + c[1]) * r + c[0];
}

double cubic_derivative(const std::array<double, 4>& c, double r) {
  return (3.0 * c[3] * r + 2.0 * c[2]) * r + c[1];
}

}  // namespace

NonMonotone::NonMonotone(double scale, double rho_prime_, double rho_double_prime_)
    : rho_prime(rho_prime_), rho_double_prime(rho_double_prime_) {
  if (!(scale > 0.0)) throw ConfigError("pressure: cubic scale must be positive");
  if (!(0.0 < rho_prime && rho_prime < rho_double_prime))
    throw ConfigError("pressure: need 0 < rho_prime < rho_double_prime");

  const double third = (rho_double_prime - rho_prime) / 3.0;
  const double c1 = rho_prime + third;
  const double c2 = rho_prime + 2.0 * third;
  coef = {0.0, 3.0 * scale * c1 * c2, -1.5 * scale * (c1 + c2), scale};

  // Numerical check of the qualitative hypotheses on a fine sample.
  const double hi = 4.0 * rho_double_prime;
  const int samples = 8000;
  const double p_prime = cubic(coef, rho_prime);
  const double p_dblprime = cubic(coef, rho_double_prime);
  const double slack = 1e-12 * std::max(1.0, std::abs(p_prime));
  double prev = 0.0;
  for (int i = 1; i <= samples; ++i) {
    const double s = hi * i / samples;
    const double p = cubic(coef, s);
    if (!(p > 0.0)) throw ConfigError("pressure: cubic not positive on (0, inf)");
    if (s <= rho_prime && p < prev - slack)
      throw ConfigError("pressure: cubic not increasing below rho_prime");
    if (s >= rho_double_prime && p < prev - slack)
      throw ConfigError("pressure: cubic not increasing above rho_double_prime");
    if (s > rho_prime && p <= p_prime + slack)
      throw ConfigError("pressure: cubic dips to P(rho_prime) past rho_prime");
    if (s > rho_double_prime && p <= p_dblprime + slack)
      throw ConfigError("pressure: cubic dips to P(rho_double_prime) past rho_double_prime");
    prev = (s <= rho_prime || s >= rho_double_prime) ? p : 0.0;
  }
}

namespace {

void require_positive(double rho) {
  if (!(rho > 0.0)) throw BlowupError("rho", "pressure: non-positive density");
}

void require_positive(const ScalarField& rho) {
  if (!(rho.values().minCoeff() > 0.0))
    throw BlowupError("rho", "pressure: non-positive density");
}

template <typename F>
ScalarField map_field(const ScalarField& rho, F&& f) {
  ScalarField out(rho.grid());
  for (Eigen::Index m = 0; m < rho.values().size(); ++m) out.values()[m] = f(rho.values()[m]);
  return out;
}

// Adaptive Simpson with absolute tolerance; integrands here are smooth
// rationals in s, so recursion stays shallow.
double simpson(double (*f)(double, const void*), const void* ctx, double a, double b, double fa,
               double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm, ctx), frm = f(rm, ctx);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson(f, ctx, a, m, fa, flm, fm, left, tol * 0.5, depth - 1) +
         simpson(f, ctx, m, b, fm, frm, fb, right, tol * 0.5, depth - 1);
}

double adaptive_simpson(double (*f)(double, const void*), const void* ctx, double a, double b,
                        double tol) {
  if (a == b) return 0.0;
  const double fa = f(a, ctx), fb = f(b, ctx), fm = f(0.5 * (a + b), ctx);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson(f, ctx, a, b, fa, fm, fb, whole, tol, 48);
}

struct GCtx {
  const PressureLaw* law;
  double p_tilde;
};

double g_integrand(double s, const void* ctx) {
  const GCtx* c = static_cast<const GCtx*>(ctx);
  return (pressure(*c->law, s) - c->p_tilde) / (s * s);
}

double g_quadrature(const PressureLaw& law, double rho_tilde, double rho) {
  GCtx ctx{&law, pressure(law, rho_tilde)};
  return rho * adaptive_simpson(g_integrand, &ctx, rho_tilde, rho, 1e-12);
}

}  // namespace

double pressure(const PressureLaw& law, double rho) {
  require_positive(rho);
  if (const auto* g = std::get_if<GammaLaw>(&law)) return g->K * std::pow(rho, g->gamma);
  return cubic(std::get<NonMonotone>(law).coef, rho);
}

// Field overloads go through the scalar evaluation per element rather than
// Eigen's vectorized pow: at a uniform state the pointwise value must equal
// the scalar call bitwise, so P - P(rho_tilde) cancels exactly and the
// equilibrium stays an exact fixed point of the discrete dynamics.
ScalarField pressure(const PressureLaw& law, const ScalarField& rho) {
  require_positive(rho);
  if (const auto* g = std::get_if<GammaLaw>(&law)) {
    const double K = g->K, gamma = g->gamma;
    return map_field(rho, [&](double r) { return K * std::pow(r, gamma); });
  }
  const auto& c = std::get<NonMonotone>(law).coef;
  return map_field(rho, [&](double r) { return cubic(c, r); });
}

double pressure_derivative(const PressureLaw& law, double rho) {
  require_positive(rho);
  if (const auto* g = std::get_if<GammaLaw>(&law))
    return g->K * g->gamma * std::pow(rho, g->gamma - 1.0);
  return cubic_derivative(std::get<NonMonotone>(law).coef, rho);
}

ScalarField pressure_derivative(const PressureLaw& law, const ScalarField& rho) {
  require_positive(rho);
  if (const auto* g = std::get_if<GammaLaw>(&law)) {
    const double K = g->K, gamma = g->gamma;
    return map_field(rho, [&](double r) { return K * gamma * std::pow(r, gamma - 1.0); });
  }
  const auto& c = std::get<NonMonotone>(law).coef;
  return map_field(rho, [&](double r) { return cubic_derivative(c, r); });
}

double g_potential(const PressureLaw& law, double rho_tilde, double rho) {
  require_positive(rho);
  if (!(rho_tilde > 0.0)) throw ConfigError("g_potential: rho_tilde must be positive");
  if (const auto* g = std::get_if<GammaLaw>(&law)) {
    const double K = g->K, gamma = g->gamma;
    if (gamma > 1.0) {
      return K * rho * (std::pow(rho, gamma - 1.0) - std::pow(rho_tilde, gamma - 1.0)) /
                 (gamma - 1.0) +
             K * std::pow(rho_tilde, gamma) * (1.0 - rho / rho_tilde);
    }
    return K * rho * std::log(rho / rho_tilde) + K * (rho_tilde - rho);
  }
  return g_quadrature(law, rho_tilde, rho);
}

ScalarField g_potential(const PressureLaw& law, double rho_tilde, const ScalarField& rho) {
  require_positive(rho);
  if (!(rho_tilde > 0.0)) throw ConfigError("g_potential: rho_tilde must be positive");
  return map_field(rho, [&](double r) { return g_potential(law, rho_tilde, r); });
}

}  // namespace mhd
