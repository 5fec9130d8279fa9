#pragma once

#include <Eigen/Dense>

#include "mhd/pressure.hpp"

namespace mhd {

// Physical parameters plus the density corridor bookkeeping. The corridor
// [rho_lower, rho_upper] must contain the reference density and both
// pressure landmarks with room to spare; delta measures that room and the
// margin d must fit strictly inside it.
struct ModelParams {
  double mu = 1.0;       // shear viscosity
  double lambda_ = 1.0;  // second viscosity
  double rho_tilde = 1.0;
  Eigen::Vector3d H_tilde = Eigen::Vector3d::Zero();
  PressureLaw pressure_law = GammaLaw{1.0, 1.4};
  double rho_lower = 0.5;
  double rho_upper = 1.5;
  double d = 0.0;
  double delta = 0.0;

  // Landmarks of the pressure law; a GammaLaw is monotone, so both collapse
  // onto the reference density.
  double rho_prime() const;
  double rho_double_prime() const;

  double p_tilde() const { return pressure(pressure_law, rho_tilde); }

  void validate() const;  // throws ConfigError on any broken invariant
};

// delta = min{ min(rho_tilde, rho') - rho_lower,
//              rho_upper - max(rho_tilde, rho''),
//              (rho_upper - rho_lower) / 2 }.
double corridor_delta(const ModelParams& p);

// Builds a validated parameter set; delta is derived, not caller-supplied.
ModelParams make_model_params(double mu, double lambda, double rho_tilde,
                              const Eigen::Vector3d& H_tilde, PressureLaw law, double rho_lower,
                              double rho_upper, double d);

struct CorridorReport {
  double min = 0.0;
  double max = 0.0;
  bool inside = false;
};

CorridorReport corridor_check(const ModelParams& params, const ScalarField& rho);

}  // namespace mhd
