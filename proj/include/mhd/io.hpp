#pragma once

#include <cstdint>
#include <filesystem>
#include <numbers>
#include <string>

#include "mhd/state.hpp"

namespace mhd {

// One experiment, described by flat key = value lines ('#' starts a comment,
// keys spelled exactly like the fields below). Everything has a usable
// default, so a config file only states what it changes.
struct RunConfig {
  int n = 32;
  double length = 2.0 * std::numbers::pi;

  double mu = 0.1;
  double lambda = 0.1;
  double rho_tilde = 1.0;
  double h_tilde_1 = 0.3;
  double h_tilde_2 = 0.2;
  double h_tilde_3 = 0.1;
  std::string pressure = "gamma";  // gamma | nonmonotone
  double pressure_k = 1.0;
  double gamma = 1.4;
  double pressure_scale = 1.0;  // cubic scale of the nonmonotone law
  double rho_prime = 0.9;       // nonmonotone landmarks
  double rho_double_prime = 1.3;
  double rho_lower = 0.5;
  double rho_upper = 1.5;
  double margin_d = 0.25;

  // equilibrium | random_smooth | manufactured. The manufactured case is a
  // closed-form traveling wave with its own parameter set and forcing; it
  // overrides the physical parameters above.
  std::string init = "random_smooth";
  std::uint64_t seed = 1;
  double spectral_decay_rate = 1.0;
  double target_c0 = 1e-2;
  int init_max_mode = 4;

  double t_end = 1.0;
  double dt = 0.0;   // 0 selects the CFL-driven step
  double cfl = 0.4;

  int diagnostics_every = 1;       // steps between CSV rows
  int snapshot_every = 1000000;    // steps between binary snapshots
  int particles_every = 10;        // steps between particle CSV rows
  int particles_per_axis = 4;

  bool dealias = true;
  bool deterministic = true;  // documented contract; the solver is always deterministic
  bool spectral_interp = false;

  std::string output = "out";

  GridSpec grid() const { return GridSpec(n, length); }
  ModelParams model_params() const;  // builds and validates the physical set
  void validate() const;             // throws ConfigError on a broken invariant
};

RunConfig parse_run_config(const std::filesystem::path& file);

// Initial data per config.init. For random_smooth: low-mode Fourier noise
// with e^{-rate |m|} decay, solenoidal magnetic perturbation, and one common
// amplitude factor chosen so that
//   ||rho0 - rho_tilde||_H2 + ||u0||_H2 + ||B0||_H2 = target_c0
// exactly (the sum is degree-1 homogeneous in the factor). If the density
// then leaves the open corridor (rho_lower + d, rho_upper - d) the amplitude
// is halved until it fits and the achieved size is reported instead.
FluidState generate_initial_data(const RunConfig& config, const ModelParams& params,
                                 double* achieved_c0 = nullptr);

// Binary snapshot: "MHD0", format version and n as 4-byte unsigned, L and t
// as 8-byte floats, then seven n^3 arrays (rho, u1, u2, u3, H1, H2, H3) in
// row-major order, little-endian doubles. Round-trips bit-exactly.
void write_snapshot(const FluidState& state, const std::filesystem::path& path);
FluidState read_snapshot(const std::filesystem::path& path);
// Restart-style read: the stored grid must match the expected one.
FluidState read_snapshot(const std::filesystem::path& path, const GridSpec& expect);

// Full experiment: time loop with diagnostics/particle/snapshot cadences,
// run.csv + particles.csv + snapshots + summary.json in config.output.
// Returns the process exit code: 0 success, 3 blow-up (non-finite state,
// nonpositive density, or div H beyond tolerance; partial output is flushed).
// Configuration problems throw ConfigError; the CLI maps them to exit 2.
int run(const RunConfig& config);

}  // namespace mhd
