#include "mhd/params.hpp"

#include <algorithm>
#include <cmath>

#include "mhd/errors.hpp"

namespace mhd {

double ModelParams::rho_prime() const {
  if (const auto* nm = std::get_if<NonMonotone>(&pressure_law)) return nm->rho_prime;
  return rho_tilde;
}

double ModelParams::rho_double_prime() const {
  if (const auto* nm = std::get_if<NonMonotone>(&pressure_law)) return nm->rho_double_prime;
  return rho_tilde;
}

double corridor_delta(const ModelParams& p) {
  return std::min({std::min(p.rho_tilde, p.rho_prime()) - p.rho_lower,
                   p.rho_upper - std::max(p.rho_tilde, p.rho_double_prime()),
                   0.5 * (p.rho_upper - p.rho_lower)});
}

void ModelParams::validate() const {
  if (!(mu > 0.0)) throw ConfigError("params: mu must be positive");
  if (!(lambda_ > 0.0)) throw ConfigError("params: lambda must be positive");
  if (!(rho_tilde > 0.0)) throw ConfigError("params: rho_tilde must be positive");
  if (!H_tilde.allFinite()) throw ConfigError("params: H_tilde must be finite");
  if (!(rho_lower > 0.0)) throw ConfigError("params: rho_lower must be positive");
  if (!(rho_lower < std::min(rho_tilde, rho_prime())))
    throw ConfigError("params: rho_lower must sit below rho_tilde and rho_prime");
  if (!(std::max(rho_tilde, rho_double_prime()) < rho_upper))
    throw ConfigError("params: rho_upper must sit above rho_tilde and rho_double_prime");
  if (delta != corridor_delta(*this))
    throw ConfigError("params: stored delta does not match the corridor");
  if (!(0.0 < d && d < delta)) throw ConfigError("params: need 0 < d < delta");
}

ModelParams make_model_params(double mu, double lambda, double rho_tilde,
                              const Eigen::Vector3d& H_tilde, PressureLaw law, double rho_lower,
                              double rho_upper, double d) {
  ModelParams p;
  p.mu = mu;
  p.lambda_ = lambda;
  p.rho_tilde = rho_tilde;
  p.H_tilde = H_tilde;
  p.pressure_law = std::move(law);
  p.rho_lower = rho_lower;
  p.rho_upper = rho_upper;
  p.d = d;
  p.delta = corridor_delta(p);
  p.validate();
  return p;
}

CorridorReport corridor_check(const ModelParams& params, const ScalarField& rho) {
  CorridorReport r;
  r.min = rho.values().minCoeff();
  r.max = rho.values().maxCoeff();
  r.inside = params.rho_lower <= r.min && r.max <= params.rho_upper;
  return r;
}

}  // namespace mhd
