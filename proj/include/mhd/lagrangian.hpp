#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mhd/dynamics.hpp"

namespace mhd {

// Tracer ensemble. Positions follow dx/dt = u(x,t); log_rho_carried
// integrates
//   (mu + lambda) d/dt log rho = -(P(rho) - P(rho_tilde)) - F(x(t), t)
// along each path, which is the mass equation rewritten through the
// effective flux; flux_integral accumulates int F(x(s), s) ds. Carrying the
// density through this ODE and interpolating it from the grid are two
// independent computations of the same quantity, and their agreement is the
// central cross-check this module exists for.
struct ParticleSet {
  std::vector<Eigen::Vector3d> positions;  // wrapped into the periodic box
  std::vector<double> log_rho_carried;
  std::vector<double> flux_integral;
  std::vector<int> seed_ids;

  std::size_t size() const { return positions.size(); }
};

// Uniform per_axis^3 lattice over the box with optional extra seeds appended
// after it; seed_ids number the lattice in row-major order and continue
// through the extras. Carried density starts from state.rho sampled at the
// seeds, flux integrals at zero. Lattice points land on grid nodes whenever
// per_axis divides n, so the initial sample is then exact in either mode.
ParticleSet seed_particles(const FluidState& state, int per_axis = 4,
                           const std::vector<Eigen::Vector3d>& extra = {},
                           Interp mode = Interp::Trilinear);

// Position-only RK4 through the four stage velocity fields of one field
// step. Particle stages sample the same stage data the field step produced
// (step_rk4 with want_stages), so the particle and field integrators carry
// matching truncation errors.
ParticleSet advect(const ParticleSet& particles, const std::array<StageData, 4>& stages,
                   double dt, Interp mode = Interp::Trilinear);

// Advances positions with bit-identical arithmetic to advect and
// simultaneously integrates, against the same stage samples,
//   d/dt log rho       = -[P(rho) - P(rho_tilde) + F(x, t)] / (mu + lambda)
//   d/dt flux_integral =  F(x, t)
// Throws BlowupError if a carried value or position stops being finite.
ParticleSet carry_log_density(const ParticleSet& particles, const std::array<StageData, 4>& stages,
                              const ModelParams& params, double dt,
                              Interp mode = Interp::Trilinear);

// Per-particle view of the corridor mechanism over a completed run: the
// largest excursion of carried log rho from log rho_tilde, the largest flux
// integral over any window of the history, and the observed grid density
// range held against [rho_lower, rho_upper]. Reports only: a large-amplitude
// run may legitimately leave the corridor, and that is the point of looking.
struct CorridorCertificate {
  std::vector<double> max_log_excursion;  // indexed like the particle set
  std::vector<double> max_flux_window;    // max over windows [t_i, t_j] of |int F|
  double rho_min_seen = 0.0;
  double rho_max_seen = 0.0;
  bool corridor_ok = false;
};

CorridorCertificate corridor_certificate(const std::vector<ParticleSet>& history,
                                         const ModelParams& params, double rho_min_seen,
                                         double rho_max_seen);

}  // namespace mhd
