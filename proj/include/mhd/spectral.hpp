#pragma once

#include <Eigen/Dense>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "mhd/field.hpp"

namespace mhd {

// Fourier coefficients in the real-to-complex half-spectrum layout:
// dims (n, n, n/2+1), row-major, third axis halved by Hermitian symmetry.
// fft() is the unnormalized DFT sum; ifft() divides by n^3.
struct Spectrum {
  GridSpec grid;
  std::vector<std::complex<double>> c;

  Spectrum() = default;
  explicit Spectrum(const GridSpec& g)
      : grid(g), c(static_cast<std::size_t>(g.n) * g.n * (g.n / 2 + 1)) {}

  int nk() const { return grid.n / 2 + 1; }
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * grid.n + j) * nk() + k;
  }
  std::complex<double>& at(int i, int j, int k) { return c[index(i, j, k)]; }
  const std::complex<double>& at(int i, int j, int k) const { return c[index(i, j, k)]; }
};

Spectrum fft(const ScalarField& f);
ScalarField ifft(const Spectrum& s);

// Signed wavenumber 2*pi*m/L for storage index m, with the Nyquist index
// (m = n/2) mapped to zero. Zeroing Nyquist makes every first-derivative
// multiplier antisymmetric in k, which is what makes discrete integration
// by parts exact; the Laplacian below uses the same table so that
// divergence(gradient(f)) == laplacian(f) holds structurally.
double wavenumber(const GridSpec& g, int m);
const std::vector<double>& wavenumbers(const GridSpec& g);  // cached per grid

// Visits every stored mode in layout order, passing the flat index and the
// signed (Nyquist-zeroed) wavenumbers. This is the one loop from which all
// multiplier-based operators are built, so derivative conventions can never
// drift apart.
template <typename F>
void for_each_mode(const GridSpec& g, F&& f) {
  const auto& kt = wavenumbers(g);
  const int n = g.n;
  const int nk = n / 2 + 1;
  const double k3_unit = 2.0 * std::numbers::pi / g.length;
  std::size_t idx = 0;
  for (int i = 0; i < n; ++i) {
    const double k1 = kt[static_cast<std::size_t>(i)];
    for (int j = 0; j < n; ++j) {
      const double k2 = kt[static_cast<std::size_t>(j)];
      for (int k = 0; k < nk; ++k, ++idx) {
        const double k3 = (k == n / 2) ? 0.0 : k3_unit * k;
        f(idx, k1, k2, k3);
      }
    }
  }
}

// 2/3-rule truncation: zero every mode with |signed index| > floor(n/3)
// on any axis (the Nyquist plane is inside the discarded band).
int dealias_cutoff(const GridSpec& g);
void dealias_inplace(Spectrum& s);
ScalarField dealias(const ScalarField& f);

VectorField gradient(const ScalarField& f);
TensorField gradient(const VectorField& v);    // entry(j,k) = d u^j / d x_k
ScalarField divergence(const VectorField& v);
VectorField divergence(const TensorField& t);  // component j = sum_k d T^{j,k}/d x_k
VectorField curl(const VectorField& v);
ScalarField laplacian(const ScalarField& f);
VectorField vector_laplacian(const VectorField& v);

// Unique zero-mean phi with laplacian(phi) = rhs. The input must satisfy the
// torus gauge condition |mean(rhs)| <= 1e-10 * RMS(rhs), else a gauge error
// is thrown. Pure-Nyquist modes (annihilated by the discrete Laplacian) are
// mapped to zero.
ScalarField solve_poisson(const ScalarField& rhs);

double integral(const ScalarField& f);  // grid sum * h^3 (trapezoid on the torus)
double mean(const ScalarField& f);

double lp_norm(const ScalarField& f, double p);  // p in {1,2,3,4,6,inf}
double lp_norm(const VectorField& v, double p);  // pointwise Euclidean magnitude
double lp_norm(const TensorField& t, double p);  // pointwise Frobenius magnitude
double l2_norm_spectral(const ScalarField& f);   // Parseval route, consistency checks

// sqrt of the sum over multi-indices |alpha| <= k of ||D^alpha f||_L2^2,
// 0 <= k <= 3, with the same Nyquist-zeroed spectral derivatives as gradient.
// Vector/tensor overloads sum the squares over components.
double sobolev_norm(const ScalarField& f, int k);
double sobolev_norm(const VectorField& v, int k);
double sobolev_norm(const TensorField& t, int k);

enum class Interp { Trilinear, Spectral };

// Off-grid evaluation; positions are wrapped into the periodic box.
// Trilinear is node-exact and O(h^2); Spectral evaluates the band-limited
// trigonometric interpolant (exact for resolvable fields, O(n^3) per point).
double sample_at(const ScalarField& f, const Eigen::Vector3d& x, Interp mode = Interp::Trilinear);
Eigen::Vector3d sample_at(const VectorField& v, const Eigen::Vector3d& x,
                          Interp mode = Interp::Trilinear);
std::vector<double> sample_at(const ScalarField& f, std::span<const Eigen::Vector3d> xs,
                              Interp mode = Interp::Trilinear);

// Amortizes the forward transform for repeated spectral evaluation. For the
// trilinear mode it just references the field, which must outlive the sampler.
class ScalarSampler {
 public:
  ScalarSampler() = default;
  ScalarSampler(const ScalarField& f, Interp mode);
  double operator()(const Eigen::Vector3d& x) const;

 private:
  const ScalarField* field_ = nullptr;
  Interp mode_ = Interp::Trilinear;
  Spectrum spec_;
};

class VectorSampler {
 public:
  VectorSampler() = default;
  VectorSampler(const VectorField& v, Interp mode);
  Eigen::Vector3d operator()(const Eigen::Vector3d& x) const;

 private:
  std::array<ScalarSampler, 3> comp_;
};

}  // namespace mhd
