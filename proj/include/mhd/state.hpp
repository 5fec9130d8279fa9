#pragma once

#include "mhd/field.hpp"
#include "mhd/params.hpp"

namespace mhd {

// Snapshot of the unknowns at one instant. Density must stay positive;
// the magnetic field is carried in full (H), with the fluctuation
// B = H - H_tilde derived where needed.
struct FluidState {
  double t = 0.0;
  ScalarField rho;
  VectorField u;
  VectorField H;

  FluidState() = default;
  FluidState(const GridSpec& g, double t0 = 0.0)
      : t(t0), rho(g, 0.0), u(g, 0.0), H(g, 0.0) {}

  const GridSpec& grid() const { return rho.grid(); }
  bool finite() const { return rho.finite() && u.finite() && H.finite(); }
};

inline FluidState equilibrium_state(const GridSpec& g, const ModelParams& p) {
  FluidState s(g);
  s.rho = ScalarField(g, p.rho_tilde);
  for (int j = 0; j < 3; ++j) s.H[j] = ScalarField(g, p.H_tilde[j]);
  return s;
}

inline VectorField b_fluctuation(const FluidState& s, const ModelParams& p) {
  VectorField b(s.grid());
  for (int j = 0; j < 3; ++j) b[j].values() = s.H[j].values() - p.H_tilde[j];
  return b;
}

}  // namespace mhd
