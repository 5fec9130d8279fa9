#include "mhd/diagnostics.hpp"

#include <cmath>
#include <stdexcept>

#include "mhd/errors.hpp"
#include "mhd/pressure.hpp"

namespace mhd {

namespace {

double safe_ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

double l2_diff(const VectorField& a, const VectorField& b) {
  VectorField d(a.grid());
  for (int j = 0; j < 3; ++j) d[j].values() = a[j].values() - b[j].values();
  return lp_norm(d, 2.0);
}

ScalarField half_square_magnitude(const VectorField& v) {
  ScalarField out(v.grid());
  out.values() =
      0.5 * (v[0].values().square() + v[1].values().square() + v[2].values().square());
  return out;
}

TensorField outer_product(const VectorField& v) {
  TensorField out(v.grid());
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 3; ++k) out.entry(j, k).values() = v[j].values() * v[k].values();
  return out;
}

// grad(|v|^2/2) - div(v^j v), the force contribution of a magnetic field in
// the sign convention of the momentum equation (negated below where needed).
void magnetic_terms(const VectorField& v, VectorField& grad_half_sq, VectorField& div_outer) {
  grad_half_sq = gradient(half_square_magnitude(v));
  div_outer = divergence(outer_product(v));
}

}  // namespace

ScalarField effective_flux(const FluidState& state, const ModelParams& params) {
  ScalarField divu = divergence(state.u);
  ScalarField p = pressure(params.pressure_law, state.rho);
  ScalarField out(state.grid());
  out.values() =
      (params.mu + params.lambda_) * divu.values() - (p.values() - params.p_tilde());
  return out;
}

TensorField vorticity(const FluidState& state) {
  TensorField grad_u = gradient(state.u);
  TensorField out(state.grid());
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 3; ++k)
      out.entry(j, k).values() = grad_u.entry(j, k).values() - grad_u.entry(k, j).values();
  return out;
}

double momentum_decomposition_residual(const FluidState& state, const StateDerivative& deriv,
                                       const ModelParams& params) {
  const GridSpec& g = state.grid();
  VectorField lhs = rho_u_dot(state, deriv);

  VectorField grad_f = gradient(effective_flux(state, params));
  VectorField div_omega = divergence(vorticity(state));
  VectorField grad_hsq(g), div_hh(g);
  magnetic_terms(state.H, grad_hsq, div_hh);

  VectorField decomposition(g);
  for (int j = 0; j < 3; ++j)
    decomposition[j].values() = grad_f[j].values() + params.mu * div_omega[j].values() -
                                grad_hsq[j].values() + div_hh[j].values();

  const double num = l2_diff(lhs, decomposition);
  const double den = std::max(lp_norm(lhs, 2.0), lp_norm(decomposition, 2.0));
  return safe_ratio(num, den);
}

double poisson_flux_residual(const FluidState& state, const StateDerivative& deriv,
                             const ModelParams& params) {
  const GridSpec& g = state.grid();
  VectorField acc = rho_u_dot(state, deriv);

  VectorField grad_hsq(g), div_hh(g);
  magnetic_terms(state.H, grad_hsq, div_hh);
  VectorField g_full(g);
  for (int j = 0; j < 3; ++j)
    g_full[j].values() = acc[j].values() + grad_hsq[j].values() - div_hh[j].values();

  // Fluctuation form of the same flux; the two differ by terms linear in B
  // that form (curl B) x H_tilde + H_tilde div B. Verifying that pins down
  // the bookkeeping between the two conventions.
  VectorField b = b_fluctuation(state, params);
  VectorField grad_bsq(g), div_bb(g);
  magnetic_terms(b, grad_bsq, div_bb);
  VectorField g_fluct(g);
  for (int j = 0; j < 3; ++j)
    g_fluct[j].values() = acc[j].values() + grad_bsq[j].values() - div_bb[j].values();

  VectorField curl_b = curl(b);
  ScalarField div_b = divergence(b);
  const Eigen::Vector3d& ht = params.H_tilde;
  VectorField correction(g);
  correction[0].values() = curl_b[1].values() * ht[2] - curl_b[2].values() * ht[1] +
                           ht[0] * div_b.values();
  correction[1].values() = curl_b[2].values() * ht[0] - curl_b[0].values() * ht[2] +
                           ht[1] * div_b.values();
  correction[2].values() = curl_b[0].values() * ht[1] - curl_b[1].values() * ht[0] +
                           ht[2] * div_b.values();

  VectorField mismatch(g);
  for (int j = 0; j < 3; ++j)
    mismatch[j].values() =
        g_fluct[j].values() - g_full[j].values() - correction[j].values();
  if (lp_norm(mismatch, 2.0) > 1e-9 * (1.0 + lp_norm(g_full, 2.0)))
    throw std::logic_error("poisson_flux_residual: magnetic flux forms disagree");

  ScalarField lap_f = laplacian(effective_flux(state, params));
  ScalarField div_g = divergence(g_full);
  ScalarField diff(g);
  diff.values() = lap_f.values() - div_g.values();
  const double num = lp_norm(diff, 2.0);
  const double den = std::max(lp_norm(lap_f, 2.0), lp_norm(div_g, 2.0));
  return safe_ratio(num, den);
}

EnergyLedger energy_ledger(const FluidState& state, const ModelParams& params) {
  const GridSpec& g = state.grid();
  EnergyLedger out;
  out.potential = integral(g_potential(params.pressure_law, params.rho_tilde, state.rho));

  ScalarField kin(g);
  kin.values() = 0.5 * state.rho.values() *
                 (state.u[0].values().square() + state.u[1].values().square() +
                  state.u[2].values().square());
  out.kinetic = integral(kin);

  out.magnetic = integral(half_square_magnitude(b_fluctuation(state, params)));

  TensorField grad_u = gradient(state.u);
  ScalarField divu = divergence(state.u);
  ScalarField diss(g);
  diss.values() = params.lambda_ * divu.values().square();
  for (int m = 0; m < 9; ++m)
    diss.values() += params.mu * grad_u.comp[m].values().square();
  out.dissipation = integral(diss);
  return out;
}

WvReport auxiliary_wv(const FluidState& state, const ModelParams& params) {
  const GridSpec& g = state.grid();
  const double visc = params.mu + params.lambda_;

  VectorField grad_f = gradient(effective_flux(state, params));
  VectorField grad_divu = gradient(divergence(state.u));
  VectorField b = b_fluctuation(state, params);

  WvReport rep;
  for (int j = 0; j < 3; ++j) {
    VectorField grad_bj = gradient(b[j]);
    rep.w[j] = VectorField(g);
    rep.v[j] = VectorField(g);
    for (int c = 0; c < 3; ++c) {
      rep.w[j][c].values() = grad_f[c].values() - 3.0 * grad_bj[c].values();
      rep.v[j][c].values() = visc * grad_divu[c].values() - 3.0 * grad_bj[c].values();
    }
  }

  ScalarField dp = pressure(params.pressure_law, state.rho);
  dp.values() -= params.p_tilde();
  VectorField grad_dp = gradient(dp);

  double num = 0.0, scale = lp_norm(grad_dp, 2.0);
  for (int j = 0; j < 3; ++j) {
    VectorField resid(g);
    for (int c = 0; c < 3; ++c)
      resid[c].values() =
          rep.v[j][c].values() - rep.w[j][c].values() - grad_dp[c].values();
    num = std::max(num, lp_norm(resid, 2.0));
    scale = std::max(scale, lp_norm(rep.w[j], 2.0) + lp_norm(rep.v[j], 2.0));
  }
  rep.identity_residual = safe_ratio(num, scale);

  auto weighted = [&](const VectorField& a) {
    ScalarField dens(g);
    dens.values() = 0.5 * state.rho.values() *
                    (a[0].values().square() + a[1].values().square() +
                     a[2].values().square());
    return integral(dens);
  };
  double lyap = 0.0;
  for (int j = 0; j < 3; ++j) lyap += weighted(rep.w[j]) + weighted(rep.v[j]);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      if (i == j) continue;
      VectorField ws(g), vs(g);
      for (int c = 0; c < 3; ++c) {
        ws[c].values() = rep.w[i][c].values() + rep.w[j][c].values();
        vs[c].values() = rep.v[i][c].values() + rep.v[j][c].values();
      }
      lyap += weighted(ws) + weighted(vs);
    }
  rep.lyapunov = lyap;
  return rep;
}

double sobolev_ratio(const ScalarField& f, int r) {
  if (r != 3 && r != 4 && r != 6)
    throw ConfigError("sobolev_ratio: exponent must be 3, 4, or 6");
  const double grad_l2 = lp_norm(gradient(f), 2.0);
  if (grad_l2 == 0.0) throw ConfigError("sobolev_ratio: constant field");
  const double f_lr = lp_norm(f, static_cast<double>(r));
  const double f_l2 = lp_norm(f, 2.0);
  const double alpha = (6.0 - r) / (2.0 * r);
  const double beta = (3.0 * r - 6.0) / (2.0 * r);
  return f_lr / (std::pow(f_l2, alpha) * std::pow(grad_l2, beta));
}

EllipticNormReport elliptic_norm_report(const FluidState& state, const StateDerivative& deriv,
                                        const ModelParams& params) {
  const GridSpec& g = state.grid();
  EllipticNormReport rep;

  ScalarField f = effective_flux(state, params);
  rep.grad_f_l2 = lp_norm(gradient(f), 2.0);
  const double lap_f_l2 = lp_norm(laplacian(f), 2.0);

  rep.lap_u_l2 = lp_norm(vector_laplacian(state.u), 2.0);
  double d3_sq = 0.0;
  for (int j = 0; j < 3; ++j)
    d3_sq += std::pow(lp_norm(gradient(laplacian(state.u[j])), 2.0), 2);
  rep.d3_u_l2 = std::sqrt(d3_sq);

  TensorField omega = vorticity(state);
  double grad_omega_sq = 0.0, lap_omega_sq = 0.0;
  for (int m = 0; m < 9; ++m) {
    grad_omega_sq += std::pow(lp_norm(gradient(omega.comp[m]), 2.0), 2);
    lap_omega_sq += std::pow(lp_norm(laplacian(omega.comp[m]), 2.0), 2);
  }

  ScalarField p = pressure(params.pressure_law, state.rho);
  const double grad_p_l2 = lp_norm(gradient(p), 2.0);
  const double lap_p_l2 = lp_norm(laplacian(p), 2.0);

  VectorField b = b_fluctuation(state, params);
  TensorField grad_b = gradient(b);
  const double grad_b_l2 = lp_norm(grad_b, 2.0);
  const double grad_b_l4 = lp_norm(grad_b, 4.0);
  VectorField lap_b = vector_laplacian(b);
  const double lap_b_l2 = lp_norm(lap_b, 2.0);

  Array b_mag = (b[0].values().square() + b[1].values().square() +
                 b[2].values().square()).sqrt();
  auto mixed_norm = [&](const Array& mag) {
    ScalarField prod(g);
    prod.values() = mag * b_mag;
    return lp_norm(prod, 2.0);
  };
  Array grad_b_mag = Array::Zero(b_mag.size());
  for (int m = 0; m < 9; ++m) grad_b_mag += grad_b.comp[m].values().square();
  grad_b_mag = grad_b_mag.sqrt();
  Array lap_b_mag = (lap_b[0].values().square() + lap_b[1].values().square() +
                     lap_b[2].values().square()).sqrt();
  const double grad_b_times_b = mixed_norm(grad_b_mag);
  const double lap_b_times_b = mixed_norm(lap_b_mag);

  const double rho_udot_l2 = lp_norm(rho_u_dot(state, deriv), 2.0);

  auto sq = [](double x) { return x * x; };
  rep.rhs_lap_u = sq(rep.grad_f_l2) + grad_omega_sq + sq(grad_p_l2) + sq(grad_b_times_b) +
                  sq(grad_b_l2);
  rep.rhs_d3_u = sq(lap_f_l2) + lap_omega_sq + sq(lap_p_l2) + sq(lap_b_l2) +
                 sq(lap_b_times_b) + std::pow(grad_b_l4, 4);
  rep.rhs_grad_f = sq(rho_udot_l2) + sq(grad_b_times_b) + sq(grad_b_l2);

  rep.ratio_lap_u = safe_ratio(sq(rep.lap_u_l2), rep.rhs_lap_u);
  rep.ratio_d3_u = safe_ratio(sq(rep.d3_u_l2), rep.rhs_d3_u);
  rep.ratio_grad_f = safe_ratio(sq(rep.grad_f_l2), rep.rhs_grad_f);
  rep.degenerate = rep.rhs_lap_u == 0.0 && rep.rhs_d3_u == 0.0 && rep.rhs_grad_f == 0.0;
  return rep;
}

bool DiagnosticsRecord::finite() const {
  for (double x : {t, energy_potential, energy_kinetic, energy_magnetic, dissipation,
                   norm_h2_rho, norm_h2_u, norm_h2_b, norm_l2_rho_t, norm_l2_u_t,
                   norm_l2_b_t, res_momentum_decomposition, res_poisson_flux,
                   res_wv_identity, div_h_l2, rho_min, rho_max, lyapunov_wv})
    if (!std::isfinite(x)) return false;
  return true;
}

DiagnosticsRecord collect_diagnostics(const FluidState& state, const StateDerivative& deriv,
                                      const ModelParams& params) {
  const GridSpec& g = state.grid();
  DiagnosticsRecord rec;
  rec.t = state.t;

  const EnergyLedger e = energy_ledger(state, params);
  rec.energy_potential = e.potential;
  rec.energy_kinetic = e.kinetic;
  rec.energy_magnetic = e.magnetic;
  rec.dissipation = e.dissipation;

  ScalarField rho_fluct(g);
  rho_fluct.values() = state.rho.values() - params.rho_tilde;
  rec.norm_h2_rho = sobolev_norm(rho_fluct, 2);
  rec.norm_h2_u = sobolev_norm(state.u, 2);
  rec.norm_h2_b = sobolev_norm(b_fluctuation(state, params), 2);

  rec.norm_l2_rho_t = lp_norm(deriv.d_rho, 2.0);
  rec.norm_l2_u_t = lp_norm(u_t(state, deriv), 2.0);
  rec.norm_l2_b_t = lp_norm(deriv.d_H, 2.0);

  rec.res_momentum_decomposition = momentum_decomposition_residual(state, deriv, params);
  rec.res_poisson_flux = poisson_flux_residual(state, deriv, params);
  const WvReport wv = auxiliary_wv(state, params);
  rec.res_wv_identity = wv.identity_residual;
  rec.lyapunov_wv = wv.lyapunov;

  rec.div_h_l2 = lp_norm(divergence(state.H), 2.0);
  rec.rho_min = state.rho.values().minCoeff();
  rec.rho_max = state.rho.values().maxCoeff();
  return rec;
}

std::vector<double> energy_balance_residual(const std::vector<DiagnosticsRecord>& records) {
  if (records.size() < 2)
    throw ConfigError("energy_balance_residual: need at least two records");
  std::vector<double> out(records.size());
  const double e0 = records[0].energy_potential + records[0].energy_kinetic +
                    records[0].energy_magnetic;
  double integral_d = 0.0;
  out[0] = 0.0;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const double dt = records[i].t - records[i - 1].t;
    integral_d += 0.5 * dt * (records[i].dissipation + records[i - 1].dissipation);
    const double e = records[i].energy_potential + records[i].energy_kinetic +
                     records[i].energy_magnetic;
    out[i] = e - e0 + integral_d;
  }
  return out;
}

std::vector<double> energy_balance_residual(const std::vector<DiagnosticsRecord>& records,
                                            const std::vector<double>& dissipation_integrals) {
  if (records.size() < 2)
    throw ConfigError("energy_balance_residual: need at least two records");
  if (dissipation_integrals.size() != records.size())
    throw ConfigError("energy_balance_residual: integral series must match records");
  std::vector<double> out(records.size());
  const double e0 = records[0].energy_potential + records[0].energy_kinetic +
                    records[0].energy_magnetic;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const double e = records[i].energy_potential + records[i].energy_kinetic +
                     records[i].energy_magnetic;
    out[i] = e - e0 + (dissipation_integrals[i] - dissipation_integrals[0]);
  }
  return out;
}

AFunctionalAccumulator a_functional_update(AFunctionalAccumulator acc, const FluidState& state,
                                           const StateDerivative& deriv,
                                           const ModelParams& params) {
  const GridSpec& g = state.grid();
  ScalarField rho_fluct(g);
  rho_fluct.values() = state.rho.values() - params.rho_tilde;

  auto sq = [](double x) { return x * x; };
  const double sup_term = sq(sobolev_norm(rho_fluct, 2)) + sq(sobolev_norm(state.u, 2)) +
                          sq(sobolev_norm(b_fluctuation(state, params), 2)) +
                          sq(lp_norm(deriv.d_rho, 2.0)) +
                          sq(lp_norm(u_t(state, deriv), 2.0)) +
                          sq(lp_norm(deriv.d_H, 2.0));

  const double integrand = sq(sobolev_norm(gradient(state.u), 2)) +
                           sq(sobolev_norm(u_t(state, deriv), 1));

  if (acc.has_sample) {
    if (state.t < acc.last_t)
      throw ConfigError("a_functional_update: samples must advance in time");
    acc.running_integral += 0.5 * (state.t - acc.last_t) * (integrand + acc.last_integrand);
  }
  acc.running_sup = std::max(acc.running_sup, sup_term);
  acc.last_t = state.t;
  acc.last_integrand = integrand;
  acc.has_sample = true;
  return acc;
}

}  // namespace mhd
