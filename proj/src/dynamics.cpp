#include "mhd/dynamics.hpp"

#include <cmath>
#include <limits>

#include "mhd/errors.hpp"

namespace mhd {

namespace {

void check_state(const FluidState& s) {
  if (!s.rho.finite()) throw BlowupError("rho", "non-finite density");
  if (!(s.rho.values().minCoeff() > 0.0)) throw BlowupError("rho", "non-positive density");
  if (!s.u.finite()) throw BlowupError("u", "non-finite velocity");
  if (!s.H.finite()) throw BlowupError("H", "non-finite magnetic field");
}

}  // namespace

// Assembly notes, fixed by the identity requirements downstream:
//  * Mass and induction keep the divergence flux form (discrete conservation
//    of mass, exact preservation of div H by antisymmetry of the exchange
//    tensor under j<->k together with commuting multipliers).
//  * Momentum transport is assembled advectively,
//        d_m = u d_rho - rho (u.grad)u + forces,
//    so that rho*u_dot == forces holds pointwise by cancellation, with no
//    appeal to a discrete product rule (which aliasing breaks). The flux
//    decomposition and Poisson identities then hold at round-off.
//  * Every magnetic term is expressed in the fluctuation B = H - H_tilde.
//    The two forms are equal by expanding (H_tilde + B) componentwise, and
//    the fluctuation form makes the uniform state an exact fixed point:
//    every term carries a factor that is identically zero there.
StateDerivative rhs(const FluidState& state, const ModelParams& params, const RhsOptions& opts) {
  check_state(state);
  const GridSpec& g = state.grid();
  require_same_grid(g, state.u.grid(), "rhs");
  const double mu = params.mu, lambda = params.lambda_;
  const Eigen::Vector3d& Ht = params.H_tilde;

  // Fluctuation field and forward transforms of the primitive unknowns.
  VectorField B(g);
  for (int j = 0; j < 3; ++j) B[j].values() = state.H[j].values() - Ht[j];

  std::array<Spectrum, 3> uh, Bh;
  for (int j = 0; j < 3; ++j) {
    uh[j] = fft(state.u[j]);
    Bh[j] = fft(B[j]);
  }

  // Velocity gradient grids (advective transport + dissipation rate) and
  // div u, combined spectrally.
  TensorField grad_u(g);
  for (int j = 0; j < 3; ++j) {
    for (int axis = 0; axis < 3; ++axis) {
      Spectrum d(g);
      for_each_mode(g, [&](std::size_t m, double k1, double k2, double k3) {
        const double ka = axis == 0 ? k1 : axis == 1 ? k2 : k3;
        d.c[m] = std::complex<double>(0.0, ka) * uh[j].c[m];
      });
      grad_u.entry(j, axis) = ifft(d);
    }
  }
  Spectrum divu_h(g);
  for_each_mode(g, [&](std::size_t m, double k1, double k2, double k3) {
    divu_h.c[m] = std::complex<double>(0.0, k1) * uh[0].c[m] +
                  std::complex<double>(0.0, k2) * uh[1].c[m] +
                  std::complex<double>(0.0, k3) * uh[2].c[m];
  });
  ScalarField divu = ifft(divu_h);

  // Dissipation rate at this state: integral(mu |grad u|^2 + lambda (div u)^2).
  Array diss = lambda * divu.values().square();
  for (int m = 0; m < 9; ++m) diss += mu * grad_u.comp[m].values().square();
  const double h3 = g.h() * g.h() * g.h();
  const double dissipation_rate = diss.sum() * h3;

  // Viscous force mu*Lap(u) + lambda*grad(div u), one inverse transform per
  // component.
  VectorField viscous(g);
  for (int j = 0; j < 3; ++j) {
    Spectrum v(g);
    for_each_mode(g, [&](std::size_t m, double k1, double k2, double k3) {
      const double ksq = k1 * k1 + k2 * k2 + k3 * k3;
      const double kj = j == 0 ? k1 : j == 1 ? k2 : k3;
      v.c[m] = -mu * ksq * uh[j].c[m] + std::complex<double>(0.0, kj) * lambda * divu_h.c[m];
    });
    viscous[j] = ifft(v);
  }

  // Pressure fluctuation and its gradient.
  ScalarField dP = pressure(params.pressure_law, state.rho);
  dP.values() -= params.p_tilde();
  Spectrum dP_h = fft(dP);
  VectorField gradP(g);
  for (int j = 0; j < 3; ++j) {
    Spectrum d(g);
    for_each_mode(g, [&](std::size_t m, double k1, double k2, double k3) {
      const double kj = j == 0 ? k1 : j == 1 ? k2 : k3;
      d.c[m] = std::complex<double>(0.0, kj) * dP_h.c[m];
    });
    gradP[j] = ifft(d);
  }

  // Effective viscous flux, reused by diagnostics and particle stages.
  ScalarField flux(g);
  flux.values() = (mu + lambda) * divu.values() - dP.values();

  StateDerivative out;
  out.dissipation = dissipation_rate;
  out.flux = std::move(flux);

  // Mass: d_rho = -div(rho u), flux product optionally dealiased.
  {
    std::array<Spectrum, 3> mh;
    for (int j = 0; j < 3; ++j) {
      ScalarField mj(g);
      mj.values() = state.rho.values() * state.u[j].values();
      mh[j] = fft(mj);
      if (opts.dealias) dealias_inplace(mh[j]);
    }
    Spectrum d(g);
    for_each_mode(g, [&](std::size_t m, double k1, double k2, double k3) {
      d.c[m] = -(std::complex<double>(0.0, k1) * mh[0].c[m] +
                 std::complex<double>(0.0, k2) * mh[1].c[m] +
                 std::complex<double>(0.0, k3) * mh[2].c[m]);
    });
    out.d_rho = ifft(d);
  }

  // Lorentz force in fluctuation form:
  //   quadratic: div(B^j B) - grad(|B|^2 / 2), products optionally dealiased;
  //   linear:    (H_tilde . grad)B - grad(B . H_tilde) + H_tilde div B,
  // assembled per mode from the transforms of B.
  VectorField lorentz(g);
  {
    std::array<std::array<Spectrum, 3>, 3> bb;  // fft(B^j B^k), symmetric
    for (int j = 0; j < 3; ++j)
      for (int k = j; k < 3; ++k) {
        ScalarField pr(g);
        pr.values() = B[j].values() * B[k].values();
        bb[j][k] = fft(pr);
        if (opts.dealias) dealias_inplace(bb[j][k]);
        if (k != j) bb[k][j] = bb[j][k];
      }
    ScalarField bsq(g);
    bsq.values() =
        0.5 * (B[0].values().square() + B[1].values().square() + B[2].values().square());
    Spectrum bsq_h = fft(bsq);
    if (opts.dealias) dealias_inplace(bsq_h);

    for (int j = 0; j < 3; ++j) {
      Spectrum f(g);
      for_each_mode(g, [&](std::size_t m, double k1, double k2, double k3) {
        const std::array<double, 3> kk{k1, k2, k3};
        const std::complex<double> I(0.0, 1.0);
        std::complex<double> acc = -I * kk[j] * bsq_h.c[m];
        for (int k = 0; k < 3; ++k) acc += I * kk[k] * bb[j][k].c[m];
        // Linear-in-B background terms.
        const std::complex<double> divB =
            I * (kk[0] * Bh[0].c[m] + kk[1] * Bh[1].c[m] + kk[2] * Bh[2].c[m]);
        const std::complex<double> ht_dot_k(0.0, Ht[0] * kk[0] + Ht[1] * kk[1] + Ht[2] * kk[2]);
        const std::complex<double> ht_dot_B =
            Ht[0] * Bh[0].c[m] + Ht[1] * Bh[1].c[m] + Ht[2] * Bh[2].c[m];
        acc += ht_dot_k * Bh[j].c[m] - I * kk[j] * ht_dot_B + Ht[j] * divB;
        f.c[m] = acc;
      });
      lorentz[j] = ifft(f);
    }
  }

  // Momentum, advectively: d_m = u d_rho - rho (u.grad)u + forces.
  for (int j = 0; j < 3; ++j) {
    Array conv = state.u[0].values() * grad_u.entry(j, 0).values() +
                 state.u[1].values() * grad_u.entry(j, 1).values() +
                 state.u[2].values() * grad_u.entry(j, 2).values();
    ScalarField dm(g);
    dm.values() = state.u[j].values() * out.d_rho.values() - state.rho.values() * conv -
                  gradP[j].values() + viscous[j].values() + lorentz[j].values();
    out.d_m[j] = std::move(dm);
  }

  // Induction: d_H^j = -sum_k D_k(H^j u^k - u^j H^k), split into the
  // quadratic exchange in B (A^{jk} = B^j u^k - u^j B^k, antisymmetric,
  // one transform per independent entry reused with both signs so the
  // double divergence cancels exactly) and the linear background part
  // (H_tilde . grad)u - H_tilde div u.
  {
    // a01, a02, a12
    std::array<Spectrum, 3> a;
    int slot = 0;
    for (int j = 0; j < 3; ++j)
      for (int k = j + 1; k < 3; ++k, ++slot) {
        ScalarField pr(g);
        pr.values() = B[j].values() * state.u[k].values() - state.u[j].values() * B[k].values();
        a[slot] = fft(pr);
        if (opts.dealias) dealias_inplace(a[slot]);
      }
    auto A = [&](int j, int k) -> std::pair<const Spectrum*, double> {
      if (j == k) return {nullptr, 0.0};
      if (j == 0 && k == 1) return {&a[0], 1.0};
      if (j == 0 && k == 2) return {&a[1], 1.0};
      if (j == 1 && k == 2) return {&a[2], 1.0};
      if (j == 1 && k == 0) return {&a[0], -1.0};
      if (j == 2 && k == 0) return {&a[1], -1.0};
      return {&a[2], -1.0};  // j == 2, k == 1
    };
    for (int j = 0; j < 3; ++j) {
      Spectrum d(g);
      for_each_mode(g, [&](std::size_t m, double k1, double k2, double k3) {
        const std::array<double, 3> kk{k1, k2, k3};
        const std::complex<double> I(0.0, 1.0);
        std::complex<double> acc(0.0, 0.0);
        for (int k = 0; k < 3; ++k) {
          auto [term, sign] = A(j, k);
          if (term) acc -= I * kk[k] * sign * term->c[m];
        }
        const std::complex<double> divu_m = divu_h.c[m];
        const std::complex<double> ht_dot_k(0.0, Ht[0] * kk[0] + Ht[1] * kk[1] + Ht[2] * kk[2]);
        acc += ht_dot_k * uh[j].c[m] - Ht[j] * divu_m;
        d.c[m] = acc;
      });
      out.d_H[j] = ifft(d);
    }
  }

  if (opts.forcing) (*opts.forcing)(state.t, out);
  return out;
}

VectorField u_t(const FluidState& state, const StateDerivative& deriv) {
  VectorField out(state.grid());
  for (int j = 0; j < 3; ++j)
    out[j].values() = (deriv.d_m[j].values() - state.u[j].values() * deriv.d_rho.values()) /
                      state.rho.values();
  return out;
}

VectorField convection(const FluidState& state) {
  TensorField grad_u = gradient(state.u);
  VectorField out(state.grid());
  for (int j = 0; j < 3; ++j)
    out[j].values() = state.u[0].values() * grad_u.entry(j, 0).values() +
                      state.u[1].values() * grad_u.entry(j, 1).values() +
                      state.u[2].values() * grad_u.entry(j, 2).values();
  return out;
}

VectorField u_dot(const FluidState& state, const StateDerivative& deriv) {
  VectorField ut = u_t(state, deriv);
  VectorField conv = convection(state);
  for (int j = 0; j < 3; ++j) ut[j].values() += conv[j].values();
  return ut;
}

VectorField rho_u_dot(const FluidState& state, const StateDerivative& deriv) {
  VectorField conv = convection(state);
  VectorField out(state.grid());
  for (int j = 0; j < 3; ++j)
    out[j].values() = deriv.d_m[j].values() - state.u[j].values() * deriv.d_rho.values() +
                      state.rho.values() * conv[j].values();
  return out;
}

namespace {

FluidState stage_state(const GridSpec& g, double t, const ScalarField& rho0,
                       const VectorField& m0, const VectorField& H0,
                       const StateDerivative& k, double coeff) {
  FluidState s(g);
  s.t = t;
  s.rho = rho0;
  s.rho.values() += coeff * k.d_rho.values();
  if (!(s.rho.values().minCoeff() > 0.0))
    throw BlowupError("rho", "step_rk4: density lost positivity in a stage");
  for (int j = 0; j < 3; ++j) {
    Array mj = m0[j].values() + coeff * k.d_m[j].values();
    s.u[j].values() = mj / s.rho.values();
    s.H[j].values() = H0[j].values() + coeff * k.d_H[j].values();
  }
  return s;
}

}  // namespace

StepResult step_rk4(const FluidState& state, const ModelParams& params, double dt,
                    const StepOptions& opts) {
  if (!(dt >= 0.0)) throw ConfigError("step_rk4: dt must be nonnegative");
  StepResult out;
  if (dt == 0.0) {
    out.state = state;
    return out;
  }

  const GridSpec& g = state.grid();
  VectorField m0(g);
  for (int j = 0; j < 3; ++j) m0[j].values() = state.rho.values() * state.u[j].values();

  std::array<StateDerivative, 4> k;
  std::array<StageData, 4> stages;

  FluidState current = state;
  const std::array<double, 3> advance{0.5 * dt, 0.5 * dt, dt};
  for (int i = 0; i < 4; ++i) {
    k[i] = rhs(current, params, opts.rhs);
    if (opts.want_stages) stages[i] = StageData{current.t, current.u, k[i].flux};
    if (i < 3)
      current = stage_state(g, state.t + (i < 2 ? 0.5 : 1.0) * dt, state.rho, m0, state.H, k[i],
                            advance[i]);
  }

  FluidState next(g);
  next.t = state.t + dt;
  const double w = dt / 6.0;
  next.rho = state.rho;
  next.rho.values() += w * (k[0].d_rho.values() + 2.0 * k[1].d_rho.values() +
                            2.0 * k[2].d_rho.values() + k[3].d_rho.values());
  if (!next.rho.finite() || !(next.rho.values().minCoeff() > 0.0))
    throw BlowupError("rho", "step_rk4: density became non-positive or non-finite");
  for (int j = 0; j < 3; ++j) {
    Array mj = m0[j].values() + w * (k[0].d_m[j].values() + 2.0 * k[1].d_m[j].values() +
                                     2.0 * k[2].d_m[j].values() + k[3].d_m[j].values());
    next.u[j].values() = mj / next.rho.values();
    next.H[j].values() = state.H[j].values() +
                         w * (k[0].d_H[j].values() + 2.0 * k[1].d_H[j].values() +
                              2.0 * k[2].d_H[j].values() + k[3].d_H[j].values());
  }
  if (!next.u.finite()) throw BlowupError("u", "step_rk4: velocity became non-finite");
  if (!next.H.finite()) throw BlowupError("H", "step_rk4: magnetic field became non-finite");

  out.state = std::move(next);
  out.dissipation_increment =
      w * (k[0].dissipation + 2.0 * k[1].dissipation + 2.0 * k[2].dissipation +
           k[3].dissipation);
  if (opts.want_stages) out.stages = std::move(stages);
  return out;
}

double cfl_dt(const FluidState& state, const ModelParams& params, double c_cfl, double c_visc) {
  check_state(state);
  const double h = state.grid().h();

  ScalarField dp = pressure_derivative(params.pressure_law, state.rho);
  Array hsq = state.H[0].values().square() + state.H[1].values().square() +
              state.H[2].values().square();
  Array cf = (dp.values().max(0.0) + hsq / state.rho.values()).sqrt();
  Array umag = (state.u[0].values().square() + state.u[1].values().square() +
                state.u[2].values().square())
                   .sqrt();
  const double vmax = (umag + cf).maxCoeff();

  const double dt_visc =
      c_visc * h * h * state.rho.values().minCoeff() / (params.mu + params.lambda_);
  if (vmax <= 0.0) return dt_visc;
  return std::min(c_cfl * h / vmax, dt_visc);
}

DivergenceReport check_solenoidal(const FluidState& state) {
  DivergenceReport r;
  r.div_l2 = lp_norm(divergence(state.H), 2.0);
  r.tolerance = 1e-8 * (1.0 + sobolev_norm(state.H, 1));
  r.ok = r.div_l2 <= r.tolerance;
  return r;
}

}  // namespace mhd
