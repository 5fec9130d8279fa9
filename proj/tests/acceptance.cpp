// Acceptance gate. Runs the eight release criteria end to end against the
// library exactly as a user would drive it, prints one PASS/FAIL line per
// criterion with the measured numbers, and exits nonzero if any line fails.
// Wall-clock limits are part of the criteria and are enforced, so this binary
// is expected to take several minutes: the Lagrangian cross-check alone
// integrates a 64^3 run over five time units.

#include <unistd.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <fcntl.h>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "mhd/diagnostics.hpp"
#include "mhd/dynamics.hpp"
#include "mhd/io.hpp"
#include "mhd/lagrangian.hpp"
#include "mhd/rng.hpp"

using namespace mhd;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void line(bool ok, int criterion, const char* fmt, ...) {
  if (!ok) ++failures;
  std::printf("%s criterion %d: ", ok ? "PASS" : "FAIL", criterion);
  va_list ap;
  va_start(ap, fmt);
  std::vprintf(fmt, ap);
  va_end(ap);
  std::printf("\n");
  std::fflush(stdout);
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

ModelParams gamma_params() {
  return make_model_params(0.1, 0.1, 1.0, {0.3, 0.2, 0.1}, GammaLaw{1.0, 1.4}, 0.5, 1.5, 0.25);
}

ScalarField band_limited(const GridSpec& g, std::uint64_t seed, int kmax, double amp) {
  Spectrum s = fft(white_noise(g, seed, 0.0, amp));
  const int n = g.n;
  auto signed_of = [n](int i) { return i <= n / 2 ? i : i - n; };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k <= n / 2; ++k) {
        const int ki = std::abs(signed_of(i)), kj = std::abs(signed_of(j));
        if (ki > kmax || kj > kmax || k > kmax) s.c[s.index(i, j, k)] = 0.0;
      }
  return ifft(s);
}

FluidState random_band_state(const GridSpec& g, const ModelParams& p, std::uint64_t seed) {
  FluidState s(g);
  s.rho = band_limited(g, seed, 10, 0.05);
  s.rho.values() += p.rho_tilde;
  for (int j = 0; j < 3; ++j) {
    s.u[j] = band_limited(g, seed + 10 + j, 10, 0.05);
    s.H[j] = band_limited(g, seed + 20 + j, 10, 0.05);
    s.H[j].values() += p.H_tilde[j];
  }
  return s;
}

// The initial data shared by the energy-balance and Lagrangian criteria: a
// seeded band-limited perturbation scaled to a triple-norm size of 1e-2. The
// band is kept flat out to mode 9 so the dt^4 part of the energy-balance
// residual is as large as possible relative to the ~1e-15 round-off floor of
// the ledger; at size 1e-2 that floor is what limits how far the residual can
// be halved before the convergence ratio turns into noise.
FluidState small_data_state(const ModelParams& p, int n) {
  RunConfig c;
  c.n = n;
  c.seed = 2031;
  c.target_c0 = 1e-2;
  c.init_max_mode = 9;
  c.spectral_decay_rate = 0.0;
  return generate_initial_data(c, p);
}

// --- criterion 1 (and the identity half of criterion 7) ---

struct IdentityWorst {
  double mom = 0.0;
  double poisson = 0.0;
  double wv = 0.0;
  double div_curl = 0.0;
  double seconds = 0.0;
  bool within(double mom_tol, double poisson_tol, double wv_tol, double dc_tol) const {
    return mom <= mom_tol && poisson <= poisson_tol && wv <= wv_tol && div_curl <= dc_tol;
  }
};

IdentityWorst identity_suite(const ModelParams& p) {
  Timer timer;
  IdentityWorst worst;
  const GridSpec g(32, 2.0 * std::numbers::pi);
  RhsOptions raw;
  raw.dealias = false;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    FluidState s = random_band_state(g, p, 100 * seed);
    StateDerivative d = rhs(s, p, raw);
    worst.mom = std::max(worst.mom, momentum_decomposition_residual(s, d, p));
    worst.poisson = std::max(worst.poisson, poisson_flux_residual(s, d, p));
    WvReport rep = auxiliary_wv(s, p);
    worst.wv = std::max(worst.wv, rep.identity_residual);
    double num2 = 0.0, den2 = 0.0;
    for (int j = 0; j < 3; ++j) {
      ScalarField dc = divergence(curl(rep.v[j]));
      const double nj = lp_norm(dc, 2.0), dj = lp_norm(rep.v[j], 2.0);
      num2 += nj * nj;
      den2 += dj * dj;
    }
    worst.div_curl = std::max(worst.div_curl, std::sqrt(num2 / den2));
  }
  worst.seconds = timer.seconds();
  return worst;
}

// --- criterion 2 (and the fixed-point half of criterion 7) ---

struct EquilibriumResult {
  double max_field_dev = 0.0;  // max-norm deviation from the uniform state
  double max_diag = 0.0;       // largest |value| among diagnostics that must vanish
  bool extrema_exact = true;   // recorded rho_min/rho_max equal rho_tilde bitwise
  double seconds = 0.0;
};

EquilibriumResult equilibrium_suite(const ModelParams& p, int steps, double dt) {
  Timer timer;
  EquilibriumResult res;
  const GridSpec g(32, 2.0 * std::numbers::pi);
  FluidState s = equilibrium_state(g, p);
  AFunctionalAccumulator acc;

  auto field_dev = [&]() {
    double dev = (s.rho.values() - p.rho_tilde).abs().maxCoeff();
    for (int j = 0; j < 3; ++j) {
      dev = std::max(dev, s.u[j].values().abs().maxCoeff());
      dev = std::max(dev, (s.H[j].values() - p.H_tilde[j]).abs().maxCoeff());
    }
    return dev;
  };
  auto record = [&]() {
    StateDerivative d = rhs(s, p);
    DiagnosticsRecord r = collect_diagnostics(s, d, p);
    for (double v : {r.energy_potential, r.energy_kinetic, r.energy_magnetic, r.dissipation,
                     r.norm_h2_rho, r.norm_h2_u, r.norm_h2_b, r.norm_l2_rho_t, r.norm_l2_u_t,
                     r.norm_l2_b_t, r.res_momentum_decomposition, r.res_poisson_flux,
                     r.res_wv_identity, r.div_h_l2, r.lyapunov_wv})
      res.max_diag = std::max(res.max_diag, std::abs(v));
    if (r.rho_min != p.rho_tilde || r.rho_max != p.rho_tilde) res.extrema_exact = false;
    acc = a_functional_update(acc, s, d, p);
    res.max_diag = std::max(res.max_diag, std::abs(acc.value()));
  };

  record();
  for (int i = 0; i < steps; ++i) {
    s = step_rk4(s, p, dt).state;
    res.max_field_dev = std::max(res.max_field_dev, field_dev());
    if ((i + 1) % 10 == 0 || i + 1 == steps) record();
  }
  res.seconds = timer.seconds();
  return res;
}

// --- criterion 5 helpers: spectral refinement of a state onto a finer grid ---

ScalarField upsample_scalar(const ScalarField& f, const GridSpec& g2) {
  const GridSpec& g1 = f.grid();
  Spectrum a = fft(f);
  Spectrum b(g2);
  const int n1 = g1.n;
  const double scale = static_cast<double>(g2.size()) / static_cast<double>(g1.size());
  for (int i1 = 0; i1 < n1; ++i1) {
    const int mi = i1 <= n1 / 2 ? i1 : i1 - n1;
    if (std::abs(mi) == n1 / 2) continue;  // drop the Nyquist plane
    const int i2 = mi >= 0 ? mi : mi + g2.n;
    for (int j1 = 0; j1 < n1; ++j1) {
      const int mj = j1 <= n1 / 2 ? j1 : j1 - n1;
      if (std::abs(mj) == n1 / 2) continue;
      const int j2 = mj >= 0 ? mj : mj + g2.n;
      for (int k1 = 0; k1 < n1 / 2; ++k1)
        b.c[b.index(i2, j2, k1)] = scale * a.c[a.index(i1, j1, k1)];
    }
  }
  return ifft(b);
}

FluidState upsample_state(const FluidState& s, int n2) {
  GridSpec g2(n2, s.grid().length);
  FluidState out(g2);
  out.t = s.t;
  out.rho = upsample_scalar(s.rho, g2);
  for (int j = 0; j < 3; ++j) {
    out.u[j] = upsample_scalar(s.u[j], g2);
    out.H[j] = upsample_scalar(s.H[j], g2);
  }
  return out;
}

// One tracked Lagrangian run: carries tracer densities through the flux ODE
// alongside the field step and keeps the worst disagreement against the grid
// density, plus the corridor and master-functional observations.
struct TrackedRun {
  double worst_err = 0.0;
  double rho_min = std::numeric_limits<double>::infinity();
  double rho_max = -std::numeric_limits<double>::infinity();
  double a_final = 0.0;
  bool a_monotone = true;
  double seconds = 0.0;
};

TrackedRun lagrangian_run(const FluidState& init, const ModelParams& p, int steps, double t_end,
                          bool with_a_functional) {
  Timer timer;
  TrackedRun tr;
  const double dt = t_end / steps;
  FluidState s = init;
  // Half the tracers sit on the seeding lattice (grid nodes), the other half
  // at generic off-node positions. The small-data velocity moves particles by
  // far less than a cell over the whole run, so node-seeded tracers alone
  // would never probe the interior of a cell where the interpolation error
  // actually lives.
  std::vector<Eigen::Vector3d> offset_seeds;
  const double l4 = init.grid().length / 4.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k)
        offset_seeds.emplace_back(i * l4 + 0.123, j * l4 + 0.271, k * l4 + 0.357);
  ParticleSet parts = seed_particles(s, 4, offset_seeds);
  StepOptions so;
  so.want_stages = true;
  AFunctionalAccumulator acc;
  double prev_a = 0.0;

  auto sample_err = [&]() {
    ScalarSampler samp(s.rho, Interp::Trilinear);
    for (std::size_t i = 0; i < parts.size(); ++i) {
      const double carried = std::exp(parts.log_rho_carried[i]);
      const double interp = samp(parts.positions[i]);
      tr.worst_err = std::max(tr.worst_err, std::abs(carried - interp) / p.rho_tilde);
    }
  };

  sample_err();
  tr.rho_min = s.rho.values().minCoeff();
  tr.rho_max = s.rho.values().maxCoeff();
  for (int i = 0; i < steps; ++i) {
    StepResult r = step_rk4(s, p, dt, so);
    parts = carry_log_density(parts, *r.stages, p, dt);
    s = std::move(r.state);
    tr.rho_min = std::min(tr.rho_min, s.rho.values().minCoeff());
    tr.rho_max = std::max(tr.rho_max, s.rho.values().maxCoeff());
    if ((i + 1) % 10 == 0 || i + 1 == steps) sample_err();
    if (with_a_functional && ((i + 1) % 5 == 0 || i + 1 == steps)) {
      StateDerivative d = rhs(s, p);
      acc = a_functional_update(acc, s, d, p);
      if (acc.value() < prev_a) tr.a_monotone = false;
      prev_a = acc.value();
    }
  }
  tr.a_final = acc.value();
  tr.seconds = timer.seconds();
  return tr;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// run() reports a summary on stdout; keep the acceptance log to one line per
// criterion by parking stdout on /dev/null around the call.
int run_quietly(const RunConfig& c) {
  std::fflush(stdout);
  int saved = dup(STDOUT_FILENO);
  int devnull = open("/dev/null", O_WRONLY);
  dup2(devnull, STDOUT_FILENO);
  int rc = -1;
  try {
    rc = run(c);
  } catch (...) {
    rc = -1;
  }
  std::fflush(stdout);
  dup2(saved, STDOUT_FILENO);
  close(devnull);
  close(saved);
  return rc;
}

}  // namespace

int main() {
  const ModelParams gp = gamma_params();

  // 1: algebraic identities at round-off on random band-limited states.
  {
    IdentityWorst w = identity_suite(gp);
    line(w.within(1e-10, 1e-10, 1e-11, 1e-12) && w.seconds < 60.0, 1,
         "identity suite on 20 band-limited states (n=32, modes <= 10, dealias off): "
         "momentum decomposition <= %.2e, poisson flux <= %.2e, wv identity <= %.2e, "
         "|div curl v|/|v| <= %.2e (%.1f s)",
         w.mom, w.poisson, w.wv, w.div_curl, w.seconds);
  }

  // 2: the uniform state is an exact fixed point of the discrete dynamics.
  {
    EquilibriumResult r = equilibrium_suite(gp, 1000, 0.01);
    line(r.max_field_dev <= 1e-12 && r.max_diag == 0.0 && r.extrema_exact, 2,
         "equilibrium fixed point over 1000 RK4 steps: max field deviation %.2e, "
         "largest diagnostic magnitude %.2e, density extrema exact: %s (%.1f s)",
         r.max_field_dev, r.max_diag, r.extrema_exact ? "yes" : "no", r.seconds);
  }

  // 3 + 4: fourth-order energy balance closure, with conservation watched
  // throughout the same runs.
  {
    Timer timer;
    // Step counts rather than dt values so each rung lands on T=1 exactly.
    // The coarse rung sits just under the CFL cap: starting coarser leaves the
    // ladder visibly contaminated by the dt^5 term of the acoustic error, and
    // starting finer pushes the last rung into the round-off floor.
    const std::array<int, 3> ladder{63, 126, 252};
    std::array<double, 3> residual{};
    double max_div_h = 0.0, max_mass_drift = 0.0;
    for (std::size_t c = 0; c < ladder.size(); ++c) {
      FluidState s = small_data_state(gp, 32);
      const double e0 = energy_ledger(s, gp).total();
      const double mass0 = integral(s.rho);
      double dissipated = 0.0;
      const double dt = 1.0 / ladder[c];
      for (int i = 0; i < ladder[c]; ++i) {
        StepResult r = step_rk4(s, gp, dt);
        dissipated += r.dissipation_increment;
        s = std::move(r.state);
        max_div_h = std::max(max_div_h, lp_norm(divergence(s.H), 2.0));
        max_mass_drift = std::max(max_mass_drift, std::abs(integral(s.rho) - mass0) /
                                                      std::abs(mass0));
      }
      residual[c] = std::abs(energy_ledger(s, gp).total() - e0 + dissipated);
    }
    const double r01 = residual[0] / residual[1];
    const double r12 = residual[1] / residual[2];
    const double elapsed = timer.seconds();
    const bool ratios_ok = r01 >= 13.0 && r01 <= 19.0 && r12 >= 13.0 && r12 <= 19.0;
    line(ratios_ok && elapsed < 300.0, 3,
         "energy balance closure on the small-data run (T=1): residual %.3e -> %.3e -> %.3e "
         "for dt 1/63, 1/126, 1/252, halving ratios %.2f and %.2f (target 16 +- 3) (%.1f s)",
         residual[0], residual[1], residual[2], r01, r12, elapsed);
    line(max_div_h <= 1e-8 && max_mass_drift <= 1e-12, 4,
         "conservation throughout those runs: max |div H|_L2 %.2e (<= 1e-8), "
         "max relative mass drift %.2e (<= 1e-12)",
         max_div_h, max_mass_drift);
  }

  // 5 + 6: carried vs interpolated tracer density over T=5, refined 32 -> 64,
  // with the corridor and master functional watched on the n=32 run.
  {
    Timer timer;
    FluidState s32 = small_data_state(gp, 32);
    FluidState s64 = upsample_state(s32, 64);

    // The coarse nodes are a subset of the fine ones; refinement must
    // reproduce the same band-limited field there.
    double node_err = 0.0;
    for (int i = 0; i < 32; ++i)
      for (int j = 0; j < 32; ++j)
        for (int k = 0; k < 32; ++k)
          node_err = std::max(node_err, std::abs(s64.rho(2 * i, 2 * j, 2 * k) - s32.rho(i, j, k)));

    TrackedRun t32 = lagrangian_run(s32, gp, 500, 5.0, true);
    const int steps64 = static_cast<int>(std::ceil(5.0 / cfl_dt(s64, gp)));
    TrackedRun t64 = lagrangian_run(s64, gp, steps64, 5.0, false);
    const double ratio = t32.worst_err / t64.worst_err;
    const double elapsed = timer.seconds();
    line(node_err <= 1e-12 && t32.worst_err <= 1e-3 && ratio >= 4.0 && elapsed < 600.0, 5,
         "Lagrangian density cross-check (T=5): worst |carried - interpolated|/rho_tilde "
         "%.3e at n=32 (<= 1e-3), %.3e at n=64, reduction %.2fx (>= 4 expected), "
         "refinement node agreement %.1e (%.1f s)",
         t32.worst_err, t64.worst_err, ratio, node_err, elapsed);
    line(t32.rho_min >= gp.rho_lower && t32.rho_max <= gp.rho_upper && t32.a_monotone &&
             std::isfinite(t32.a_final),
         6,
         "corridor and master functional on the n=32 run: rho in [%.4f, %.4f] within "
         "[%.1f, %.1f]; A(t) nondecreasing: %s, final value %.6e",
         t32.rho_min, t32.rho_max, gp.rho_lower, gp.rho_upper, t32.a_monotone ? "yes" : "no",
         t32.a_final);
  }

  // 7: the non-monotone cubic law validates and leaves criteria 1-2 intact.
  {
    bool constructed = false;
    IdentityWorst w;
    EquilibriumResult r;
    try {
      NonMonotone law(1.0, 0.9, 1.3);
      constructed = true;
      // corridor margin must stay below the law's slack around [0.9, 1.3]
      ModelParams np =
          make_model_params(0.1, 0.1, 1.0, {0.3, 0.2, 0.1}, law, 0.5, 1.5, 0.1);
      w = identity_suite(np);
      r = equilibrium_suite(np, 1000, 0.01);
    } catch (const std::exception& e) {
      line(false, 7, "non-monotone pressure law rejected: %s", e.what());
    }
    if (constructed) {
      line(w.within(1e-10, 1e-10, 1e-11, 1e-12) && r.max_field_dev <= 1e-12 &&
               r.max_diag == 0.0 && r.extrema_exact,
           7,
           "non-monotone cubic law (rho'=0.9, rho''=1.3) validated; identity suite worst "
           "%.2e/%.2e/%.2e/%.2e, equilibrium deviation %.2e, diagnostics %.2e (%.1f s)",
           w.mom, w.poisson, w.wv, w.div_curl, r.max_field_dev, r.max_diag,
           w.seconds + r.seconds);
    }
  }

  // 8: fixed seed, byte-identical CSV output.
  {
    RunConfig rc;
    rc.n = 32;
    rc.seed = 7;
    rc.t_end = 0.1;
    rc.dt = 0.01;
    rc.diagnostics_every = 1;
    rc.particles_every = 1;
    rc.snapshot_every = 1000000;
    const fs::path base = fs::temp_directory_path();
    const fs::path dir_a = base / "mhd0_accept_det_a";
    const fs::path dir_b = base / "mhd0_accept_det_b";
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
    rc.output = dir_a.string();
    const int rc_a = run_quietly(rc);
    rc.output = dir_b.string();
    const int rc_b = run_quietly(rc);
    const bool runs_ok = rc_a == 0 && rc_b == 0;
    const bool run_csv_same = runs_ok && slurp(dir_a / "run.csv") == slurp(dir_b / "run.csv");
    const bool particles_same =
        runs_ok && slurp(dir_a / "particles.csv") == slurp(dir_b / "particles.csv");
    const std::uintmax_t run_bytes = runs_ok ? fs::file_size(dir_a / "run.csv") : 0;
    const std::uintmax_t part_bytes = runs_ok ? fs::file_size(dir_a / "particles.csv") : 0;
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
    line(runs_ok && run_csv_same && particles_same, 8,
         "determinism: two seeded runs produced %s run.csv (%ju bytes) and %s particles.csv "
         "(%ju bytes)",
         run_csv_same ? "byte-identical" : "DIFFERING", run_bytes,
         particles_same ? "byte-identical" : "DIFFERING", part_bytes);
  }

  if (failures == 0) {
    std::printf("all 8 criteria passed\n");
    return 0;
  }
  std::printf("%d criterion(s) failed\n", failures);
  return 1;
}
