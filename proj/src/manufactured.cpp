#include "mhd/manufactured.hpp"

#include <cmath>

#include "manufactured_terms.inc"

namespace mhd {

namespace {

// Wave and background constants; tools/make_manufactured.py carries the same
// values when generating the source terms.
constexpr double kSigma = 0.9;
constexpr double kARho = 0.05;
constexpr double kAU1 = 0.07;
constexpr double kAU2 = 0.06;
constexpr double kAH = 0.08;
constexpr double kHt1 = 0.3, kHt2 = 0.2, kHt3 = 0.1;

}  // namespace

FluidState ManufacturedCase::state_at(double t) const {
  FluidState s(grid, t);
  const int n = grid.n;
  const double h = grid.h();
  for (int i = 0; i < n; ++i) {
    const double phi = i * h - kSigma * t;
    const double sn = std::sin(phi), cs = std::cos(phi);
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const std::size_t m = s.rho.index(i, j, k);
        s.rho.values()[m] = params.rho_tilde + kARho * sn;
        s.u[0].values()[m] = kAU1 * sn;
        s.u[1].values()[m] = kAU2 * sn;
        s.H[0].values()[m] = kHt1;
        s.H[1].values()[m] = kHt2 + kAH * cs;
        s.H[2].values()[m] = kHt3;
      }
  }
  return s;
}

Forcing ManufacturedCase::forcing() const {
  const GridSpec g = grid;
  return [g](double t, StateDerivative& d) {
    const int n = g.n;
    const double h = g.h();
    for (int i = 0; i < n; ++i) {
      const double phi = i * h - kSigma * t;
      const double sn = std::sin(phi), cs = std::cos(phi);
      const double fr = src_rho(sn, cs);
      const double fm1 = src_m1(sn, cs), fm2 = src_m2(sn, cs), fm3 = src_m3(sn, cs);
      const double fh1 = src_h1(sn, cs), fh2 = src_h2(sn, cs), fh3 = src_h3(sn, cs);
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          const std::size_t m = d.d_rho.index(i, j, k);
          d.d_rho.values()[m] += fr;
          d.d_m[0].values()[m] += fm1;
          d.d_m[1].values()[m] += fm2;
          d.d_m[2].values()[m] += fm3;
          d.d_H[0].values()[m] += fh1;
          d.d_H[1].values()[m] += fh2;
          d.d_H[2].values()[m] += fh3;
        }
    }
  };
}

ManufacturedCase make_manufactured_case(const GridSpec& grid) {
  ManufacturedCase c{grid, make_model_params(0.05, 0.05, 1.0, Eigen::Vector3d(kHt1, kHt2, kHt3),
                                             GammaLaw{1.0, 2.0}, 0.5, 1.5, 0.25)};
  return c;
}

}  // namespace mhd
