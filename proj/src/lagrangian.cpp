#include "mhd/lagrangian.hpp"

#include <algorithm>
#include <cmath>

#include "mhd/errors.hpp"

namespace mhd {

namespace {

Eigen::Vector3d wrap(Eigen::Vector3d x, double length) {
  for (int a = 0; a < 3; ++a) {
    x[a] = std::fmod(x[a], length);
    if (x[a] < 0.0) x[a] += length;
  }
  return x;
}

// Single integrator for both entry points. The position arithmetic does not
// depend on whether the carry branch runs, so advect and carry_log_density
// produce bit-identical trajectories by construction.
ParticleSet advance(const ParticleSet& particles, const std::array<StageData, 4>& stages,
                    const ModelParams* carry, double dt, Interp mode) {
  if (dt < 0.0) throw ConfigError("particle step: dt must be nonnegative");
  const double length = stages[0].u[0].grid().length;

  std::array<VectorSampler, 4> vel;
  std::array<ScalarSampler, 4> flux;
  for (int s = 0; s < 4; ++s) {
    vel[s] = VectorSampler(stages[s].u, mode);
    if (carry) flux[s] = ScalarSampler(stages[s].flux, mode);
  }
  const double p_ref = carry ? carry->p_tilde() : 0.0;
  const double visc = carry ? carry->mu + carry->lambda_ : 1.0;

  constexpr double stage_frac[4] = {0.0, 0.5, 0.5, 1.0};
  ParticleSet out = particles;
  for (std::size_t p = 0; p < particles.size(); ++p) {
    const Eigen::Vector3d x0 = particles.positions[p];
    const double y0 = particles.log_rho_carried[p];
    std::array<Eigen::Vector3d, 4> kx;
    std::array<double, 4> ky{}, kw{};
    for (int s = 0; s < 4; ++s) {
      const Eigen::Vector3d xs = s == 0 ? x0 : Eigen::Vector3d(x0 + stage_frac[s] * dt * kx[s - 1]);
      kx[s] = vel[s](xs);
      if (carry) {
        const double ys = s == 0 ? y0 : y0 + stage_frac[s] * dt * ky[s - 1];
        const double f = flux[s](xs);
        kw[s] = f;
        ky[s] = -(pressure(carry->pressure_law, std::exp(ys)) - p_ref + f) / visc;
      }
    }
    out.positions[p] = wrap(x0 + dt / 6.0 * (kx[0] + 2.0 * kx[1] + 2.0 * kx[2] + kx[3]), length);
    if (!out.positions[p].allFinite()) throw BlowupError("particle", "particle position left the finite range");
    if (carry) {
      out.log_rho_carried[p] = y0 + dt / 6.0 * (ky[0] + 2.0 * ky[1] + 2.0 * ky[2] + ky[3]);
      out.flux_integral[p] += dt / 6.0 * (kw[0] + 2.0 * kw[1] + 2.0 * kw[2] + kw[3]);
      if (!std::isfinite(out.log_rho_carried[p]) || !std::isfinite(out.flux_integral[p]))
        throw BlowupError("particle", "carried density left the admissible range");
    }
  }
  return out;
}

}  // namespace

ParticleSet seed_particles(const FluidState& state, int per_axis,
                           const std::vector<Eigen::Vector3d>& extra, Interp mode) {
  if (per_axis < 1) throw ConfigError("seed_particles: per_axis must be positive");
  const GridSpec& g = state.grid();
  const double spacing = g.length / per_axis;

  ParticleSet out;
  out.positions.reserve(static_cast<std::size_t>(per_axis) * per_axis * per_axis + extra.size());
  for (int i = 0; i < per_axis; ++i)
    for (int j = 0; j < per_axis; ++j)
      for (int k = 0; k < per_axis; ++k)
        out.positions.emplace_back(i * spacing, j * spacing, k * spacing);
  for (const Eigen::Vector3d& x : extra) out.positions.push_back(wrap(x, g.length));

  const ScalarSampler rho(state.rho, mode);
  out.log_rho_carried.reserve(out.positions.size());
  out.flux_integral.assign(out.positions.size(), 0.0);
  out.seed_ids.resize(out.positions.size());
  for (std::size_t p = 0; p < out.positions.size(); ++p) {
    const double r = rho(out.positions[p]);
    if (!(r > 0.0) || !std::isfinite(r))
      throw BlowupError("rho", "seed_particles: nonpositive density at a seed point");
    out.log_rho_carried.push_back(std::log(r));
    out.seed_ids[p] = static_cast<int>(p);
  }
  return out;
}

ParticleSet advect(const ParticleSet& particles, const std::array<StageData, 4>& stages, double dt,
                   Interp mode) {
  return advance(particles, stages, nullptr, dt, mode);
}

ParticleSet carry_log_density(const ParticleSet& particles, const std::array<StageData, 4>& stages,
                              const ModelParams& params, double dt, Interp mode) {
  return advance(particles, stages, &params, dt, mode);
}

CorridorCertificate corridor_certificate(const std::vector<ParticleSet>& history,
                                         const ModelParams& params, double rho_min_seen,
                                         double rho_max_seen) {
  if (history.empty()) throw ConfigError("corridor_certificate: empty history");
  const std::size_t count = history.front().size();
  for (const ParticleSet& ps : history)
    if (ps.size() != count)
      throw ConfigError("corridor_certificate: particle count changed mid-history");

  CorridorCertificate cert;
  cert.max_log_excursion.assign(count, 0.0);
  cert.max_flux_window.assign(count, 0.0);
  const double log_ref = std::log(params.rho_tilde);
  for (std::size_t p = 0; p < count; ++p) {
    double flux_lo = history.front().flux_integral[p];
    double flux_hi = flux_lo;
    for (const ParticleSet& ps : history) {
      cert.max_log_excursion[p] =
          std::max(cert.max_log_excursion[p], std::abs(ps.log_rho_carried[p] - log_ref));
      flux_lo = std::min(flux_lo, ps.flux_integral[p]);
      flux_hi = std::max(flux_hi, ps.flux_integral[p]);
    }
    // |int_{t_i}^{t_j} F| over all windows is the spread of the cumulative.
    cert.max_flux_window[p] = flux_hi - flux_lo;
  }
  cert.rho_min_seen = rho_min_seen;
  cert.rho_max_seen = rho_max_seen;
  cert.corridor_ok = rho_min_seen >= params.rho_lower && rho_max_seen <= params.rho_upper;
  return cert;
}

}  // namespace mhd
