#pragma once

#include "mhd/dynamics.hpp"
#include "mhd/params.hpp"
#include "mhd/state.hpp"

namespace mhd {

// Forced traveling-wave case with a closed-form solution, used to verify the
// assembled right-hand side against the continuum equations and to measure
// the integrator's temporal order. The wave runs along x1 on a length-2*pi
// box and every field is band-limited to a handful of modes, so the spatial
// discretization reproduces the continuum operators exactly and the measured
// error is time-stepping error alone.
struct ManufacturedCase {
  GridSpec grid;
  ModelParams params;

  // Exact fields at time t, sampled on the grid.
  FluidState state_at(double t) const;

  // Source terms to add to the right-hand side; pass via RhsOptions.
  Forcing forcing() const;
};

ManufacturedCase make_manufactured_case(const GridSpec& grid);

}  // namespace mhd
