#include "mhd/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <numbers>

namespace mhd {

namespace {

// One FFTW plan pair per grid size, created on first use and kept for the
// process lifetime. FFTW_ESTIMATE keeps planning deterministic (no runtime
// timing), which we rely on for byte-identical reruns. The shared scratch
// buffers make this cache single-threaded by design.
struct PlanEntry {
  double* real = nullptr;
  fftw_complex* cplx = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

PlanEntry& plan_for(int n) {
  static std::map<int, PlanEntry> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  PlanEntry e;
  const std::size_t nr = static_cast<std::size_t>(n) * n * n;
  const std::size_t nc = static_cast<std::size_t>(n) * n * (n / 2 + 1);
  e.real = fftw_alloc_real(nr);
  e.cplx = fftw_alloc_complex(nc);
  e.fwd = fftw_plan_dft_r2c_3d(n, n, n, e.real, e.cplx, FFTW_ESTIMATE);
  e.bwd = fftw_plan_dft_c2r_3d(n, n, n, e.cplx, e.real, FFTW_ESTIMATE);
  return cache.emplace(n, e).first->second;
}

double signed_index(int n, int m) { return m <= n / 2 ? m : m - n; }

}  // namespace

Spectrum fft(const ScalarField& f) {
  const int n = f.grid().n;
  PlanEntry& e = plan_for(n);
  std::memcpy(e.real, f.values().data(), f.grid().size() * sizeof(double));
  fftw_execute(e.fwd);
  Spectrum s(f.grid());
  // std::complex<double> is layout-compatible with fftw_complex (double[2]).
  std::memcpy(static_cast<void*>(s.c.data()), e.cplx, s.c.size() * sizeof(fftw_complex));
  return s;
}

ScalarField ifft(const Spectrum& s) {
  const int n = s.grid.n;
  PlanEntry& e = plan_for(n);
  std::memcpy(e.cplx, static_cast<const void*>(s.c.data()), s.c.size() * sizeof(fftw_complex));
  fftw_execute(e.bwd);
  ScalarField f(s.grid);
  const double scale = 1.0 / static_cast<double>(s.grid.size());
  Eigen::Map<const Array> out(e.real, static_cast<Eigen::Index>(s.grid.size()));
  f.values() = out * scale;
  return f;
}

double wavenumber(const GridSpec& g, int m) {
  if (m == g.n / 2) return 0.0;
  return 2.0 * std::numbers::pi * signed_index(g.n, m) / g.length;
}

const std::vector<double>& wavenumbers(const GridSpec& g) {
  static std::map<std::pair<int, double>, std::vector<double>> cache;
  auto key = std::make_pair(g.n, g.length);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::vector<double> k(static_cast<std::size_t>(g.n));
  for (int m = 0; m < g.n; ++m) k[static_cast<std::size_t>(m)] = wavenumber(g, m);
  return cache.emplace(std::move(key), std::move(k)).first->second;
}

int dealias_cutoff(const GridSpec& g) { return g.n / 3; }

void dealias_inplace(Spectrum& s) {
  const int n = s.grid.n;
  const int cut = dealias_cutoff(s.grid);
  const int nk = s.nk();
  for (int i = 0; i < n; ++i) {
    const bool ki = std::abs(signed_index(n, i)) > cut;
    for (int j = 0; j < n; ++j) {
      const bool kj = ki || std::abs(signed_index(n, j)) > cut;
      std::complex<double>* row = &s.c[s.index(i, j, 0)];
      if (kj) {
        std::fill(row, row + nk, std::complex<double>(0.0, 0.0));
      } else {
        for (int k = cut + 1; k < nk; ++k) row[k] = 0.0;
      }
    }
  }
}

ScalarField dealias(const ScalarField& f) {
  Spectrum s = fft(f);
  dealias_inplace(s);
  return ifft(s);
}

namespace {

// Applies d/dx_axis to the coefficients: multiply by i * k_axis.
void differentiate_inplace(Spectrum& s, int axis) {
  const int n = s.grid.n;
  const auto& kt = wavenumbers(s.grid);
  const int nk = s.nk();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      std::complex<double>* row = &s.c[s.index(i, j, 0)];
      if (axis == 2) {
        for (int k = 0; k < nk; ++k) {
          const double kk = (k == n / 2) ? 0.0 : 2.0 * std::numbers::pi * k / s.grid.length;
          row[k] = std::complex<double>(0.0, kk) * row[k];
        }
      } else {
        const double ka = kt[static_cast<std::size_t>(axis == 0 ? i : j)];
        const std::complex<double> ik(0.0, ka);
        for (int k = 0; k < nk; ++k) row[k] *= ik;
      }
    }
  }
}

// Multiplies by -|k|^2 built from the same Nyquist-zeroed table as the
// first derivatives, so div(grad(f)) agrees with laplacian(f) exactly.
void laplacian_inplace(Spectrum& s) {
  const int n = s.grid.n;
  const auto& kt = wavenumbers(s.grid);
  const int nk = s.nk();
  for (int i = 0; i < n; ++i) {
    const double k1 = kt[static_cast<std::size_t>(i)];
    for (int j = 0; j < n; ++j) {
      const double k2 = kt[static_cast<std::size_t>(j)];
      std::complex<double>* row = &s.c[s.index(i, j, 0)];
      for (int k = 0; k < nk; ++k) {
        const double k3 = (k == n / 2) ? 0.0 : 2.0 * std::numbers::pi * k / s.grid.length;
        row[k] *= -(k1 * k1 + k2 * k2 + k3 * k3);
      }
    }
  }
}

}  // namespace

VectorField gradient(const ScalarField& f) {
  Spectrum base = fft(f);
  VectorField g(f.grid());
  for (int axis = 0; axis < 3; ++axis) {
    Spectrum s = base;
    differentiate_inplace(s, axis);
    g[axis] = ifft(s);
  }
  return g;
}

TensorField gradient(const VectorField& v) {
  TensorField t(v.grid());
  for (int j = 0; j < 3; ++j) {
    Spectrum base = fft(v[j]);
    for (int axis = 0; axis < 3; ++axis) {
      Spectrum s = base;
      differentiate_inplace(s, axis);
      t.entry(j, axis) = ifft(s);
    }
  }
  return t;
}

ScalarField divergence(const VectorField& v) {
  Spectrum acc = fft(v[0]);
  differentiate_inplace(acc, 0);
  for (int axis = 1; axis < 3; ++axis) {
    Spectrum s = fft(v[axis]);
    differentiate_inplace(s, axis);
    for (std::size_t m = 0; m < acc.c.size(); ++m) acc.c[m] += s.c[m];
  }
  return ifft(acc);
}

VectorField divergence(const TensorField& t) {
  VectorField d(t.grid());
  for (int j = 0; j < 3; ++j) {
    Spectrum acc = fft(t.entry(j, 0));
    differentiate_inplace(acc, 0);
    for (int axis = 1; axis < 3; ++axis) {
      Spectrum s = fft(t.entry(j, axis));
      differentiate_inplace(s, axis);
      for (std::size_t m = 0; m < acc.c.size(); ++m) acc.c[m] += s.c[m];
    }
    d[j] = ifft(acc);
  }
  return d;
}

VectorField curl(const VectorField& v) {
  std::array<std::array<Spectrum, 3>, 3> dv;  // dv[j][axis] = d v^j / d x_axis
  for (int j = 0; j < 3; ++j) {
    Spectrum base = fft(v[j]);
    for (int axis = 0; axis < 3; ++axis) {
      dv[j][axis] = base;
      differentiate_inplace(dv[j][axis], axis);
    }
  }
  VectorField w(v.grid());
  for (int j = 0; j < 3; ++j) {
    const int a = (j + 1) % 3;
    const int b = (j + 2) % 3;
    Spectrum s = dv[b][a];
    for (std::size_t m = 0; m < s.c.size(); ++m) s.c[m] -= dv[a][b].c[m];
    w[j] = ifft(s);
  }
  return w;
}

ScalarField laplacian(const ScalarField& f) {
  Spectrum s = fft(f);
  laplacian_inplace(s);
  return ifft(s);
}

VectorField vector_laplacian(const VectorField& v) {
  VectorField out(v.grid());
  for (int j = 0; j < 3; ++j) out[j] = laplacian(v[j]);
  return out;
}

ScalarField solve_poisson(const ScalarField& rhs) {
  const double m = mean(rhs);
  const double rms = std::sqrt(rhs.values().square().mean());
  if (std::abs(m) > 1e-10 * rms)
    throw ConfigError("solve_poisson: rhs violates the zero-mean gauge");

  Spectrum s = fft(rhs);
  const int n = s.grid.n;
  const auto& kt = wavenumbers(s.grid);
  const int nk = s.nk();
  for (int i = 0; i < n; ++i) {
    const double k1 = kt[static_cast<std::size_t>(i)];
    for (int j = 0; j < n; ++j) {
      const double k2 = kt[static_cast<std::size_t>(j)];
      std::complex<double>* row = &s.c[s.index(i, j, 0)];
      for (int k = 0; k < nk; ++k) {
        const double k3 = (k == n / 2) ? 0.0 : 2.0 * std::numbers::pi * k / s.grid.length;
        const double k2sum = k1 * k1 + k2 * k2 + k3 * k3;
        if (k2sum > 0.0)
          row[k] /= -k2sum;
        else
          row[k] = 0.0;  // mean gauge, plus modes the Laplacian annihilates
      }
    }
  }
  return ifft(s);
}

double integral(const ScalarField& f) {
  const double h = f.grid().h();
  return f.values().sum() * h * h * h;
}

double mean(const ScalarField& f) { return f.values().mean(); }

namespace {

double lp_of_magnitude(const Array& mag_sq, const GridSpec& g, double p) {
  const double h3 = g.h() * g.h() * g.h();
  if (std::isinf(p)) return std::sqrt(mag_sq.maxCoeff());
  if (p == 2.0) return std::sqrt(mag_sq.sum() * h3);
  if (p == 1.0) return mag_sq.sqrt().sum() * h3;
  return std::pow(mag_sq.pow(p / 2.0).sum() * h3, 1.0 / p);
}

}  // namespace

double lp_norm(const ScalarField& f, double p) {
  return lp_of_magnitude(f.values().square(), f.grid(), p);
}

double lp_norm(const VectorField& v, double p) {
  Array mag_sq = v[0].values().square() + v[1].values().square() + v[2].values().square();
  return lp_of_magnitude(mag_sq, v.grid(), p);
}

double lp_norm(const TensorField& t, double p) {
  Array mag_sq = t.comp[0].values().square();
  for (int m = 1; m < 9; ++m) mag_sq += t.comp[m].values().square();
  return lp_of_magnitude(mag_sq, t.grid(), p);
}

namespace {

// Sum over the half spectrum of mult * |coef|^2 * w(k), where w is the
// Sobolev multi-index weight of order `order` and mult accounts for the
// Hermitian half not stored (k3 strictly inside (0, n/2) counts twice).
double weighted_power(const Spectrum& s, int order) {
  const int n = s.grid.n;
  const auto& kt = wavenumbers(s.grid);
  const int nk = s.nk();
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double a = kt[static_cast<std::size_t>(i)] * kt[static_cast<std::size_t>(i)];
    for (int j = 0; j < n; ++j) {
      const double b = kt[static_cast<std::size_t>(j)] * kt[static_cast<std::size_t>(j)];
      const std::complex<double>* row = &s.c[s.index(i, j, 0)];
      for (int k = 0; k < nk; ++k) {
        const double kz = (k == n / 2) ? 0.0 : 2.0 * std::numbers::pi * k / s.grid.length;
        const double c = kz * kz;
        // Elementary symmetric functions of (k1^2, k2^2, k3^2).
        const double e1 = a + b + c;
        const double e2 = a * b + a * c + b * c;
        const double e3 = a * b * c;
        double w = 1.0;
        if (order >= 1) w += e1;
        if (order >= 2) w += e1 * e1 - e2;            // sum over |alpha| = 2
        if (order >= 3) w += e1 * (e1 * e1 - 2.0 * e2) + e3;  // |alpha| = 3
        const double mult = (k == 0 || k == n / 2) ? 1.0 : 2.0;
        total += mult * std::norm(row[k]) * w;
      }
    }
  }
  return total;
}

double parseval_scale(const GridSpec& g) {
  const double vol = g.length * g.length * g.length;
  const double nn = static_cast<double>(g.size());
  return vol / (nn * nn);
}

}  // namespace

double l2_norm_spectral(const ScalarField& f) {
  Spectrum s = fft(f);
  return std::sqrt(weighted_power(s, 0) * parseval_scale(f.grid()));
}

double sobolev_norm(const ScalarField& f, int k) {
  if (k < 0 || k > 3) throw ConfigError("sobolev_norm: order must be 0..3");
  Spectrum s = fft(f);
  return std::sqrt(weighted_power(s, k) * parseval_scale(f.grid()));
}

double sobolev_norm(const VectorField& v, int k) {
  double sq = 0.0;
  for (int j = 0; j < 3; ++j) {
    const double nj = sobolev_norm(v[j], k);
    sq += nj * nj;
  }
  return std::sqrt(sq);
}

double sobolev_norm(const TensorField& t, int k) {
  double sq = 0.0;
  for (int m = 0; m < 9; ++m) {
    const double nm = sobolev_norm(t.comp[m], k);
    sq += nm * nm;
  }
  return std::sqrt(sq);
}

namespace {

double wrap_unit(double x, double span) {
  double y = x - span * std::floor(x / span);
  if (y >= span) y = 0.0;  // guard against x/span rounding up
  return y;
}

double trilinear(const ScalarField& f, const Eigen::Vector3d& x) {
  const GridSpec& g = f.grid();
  const int n = g.n;
  int idx[3];
  double frac[3];
  for (int a = 0; a < 3; ++a) {
    const double u = wrap_unit(x[a], g.length) / g.h();
    double fl = std::floor(u);
    double fr = u - fl;
    // Snap to the node when within rounding distance so samples at grid
    // points reproduce stored values exactly.
    if (fr < 1e-9) {
      fr = 0.0;
    } else if (fr > 1.0 - 1e-9) {
      fl += 1.0;
      fr = 0.0;
    }
    idx[a] = static_cast<int>(fl) % n;
    if (idx[a] < 0) idx[a] += n;
    frac[a] = fr;
  }
  const int i1 = (idx[0] + 1) % n, j1 = (idx[1] + 1) % n, k1 = (idx[2] + 1) % n;
  const double fx = frac[0], fy = frac[1], fz = frac[2];
  auto lerp = [](double a, double b, double t) { return a + (b - a) * t; };
  const double c00 = lerp(f(idx[0], idx[1], idx[2]), f(i1, idx[1], idx[2]), fx);
  const double c10 = lerp(f(idx[0], j1, idx[2]), f(i1, j1, idx[2]), fx);
  const double c01 = lerp(f(idx[0], idx[1], k1), f(i1, idx[1], k1), fx);
  const double c11 = lerp(f(idx[0], j1, k1), f(i1, j1, k1), fx);
  return lerp(lerp(c00, c10, fy), lerp(c01, c11, fy), fz);
}

// Evaluates the trigonometric interpolant at an arbitrary point from the
// half spectrum. Nyquist modes keep their positive wavenumber here (unlike
// the derivative tables): that choice reproduces stored values exactly at
// grid nodes, and resolvable fields have no Nyquist content anyway.
double spectral_eval(const Spectrum& s, const Eigen::Vector3d& x) {
  const int n = s.grid.n;
  const int nk = s.nk();
  const double two_pi_over_L = 2.0 * std::numbers::pi / s.grid.length;

  static thread_local std::vector<std::complex<double>> ph1, ph2, ph3;
  ph1.resize(static_cast<std::size_t>(n));
  ph2.resize(static_cast<std::size_t>(n));
  ph3.resize(static_cast<std::size_t>(nk));
  for (int m = 0; m < n; ++m) {
    const double k = two_pi_over_L * signed_index(n, m);
    ph1[static_cast<std::size_t>(m)] = std::polar(1.0, k * x[0]);
    ph2[static_cast<std::size_t>(m)] = std::polar(1.0, k * x[1]);
  }
  for (int m = 0; m < nk; ++m) {
    const double k = two_pi_over_L * m;
    const double weight = (m == 0 || m == n / 2) ? 1.0 : 2.0;
    ph3[static_cast<std::size_t>(m)] = weight * std::polar(1.0, k * x[2]);
  }

  std::complex<double> total(0.0, 0.0);
  for (int i = 0; i < n; ++i) {
    std::complex<double> plane(0.0, 0.0);
    for (int j = 0; j < n; ++j) {
      const std::complex<double>* row = &s.c[s.index(i, j, 0)];
      std::complex<double> line(0.0, 0.0);
      for (int k = 0; k < nk; ++k) line += row[k] * ph3[static_cast<std::size_t>(k)];
      plane += line * ph2[static_cast<std::size_t>(j)];
    }
    total += plane * ph1[static_cast<std::size_t>(i)];
  }
  return total.real() / static_cast<double>(s.grid.size());
}

}  // namespace

double sample_at(const ScalarField& f, const Eigen::Vector3d& x, Interp mode) {
  if (mode == Interp::Trilinear) return trilinear(f, x);
  Spectrum s = fft(f);
  return spectral_eval(s, x);
}

Eigen::Vector3d sample_at(const VectorField& v, const Eigen::Vector3d& x, Interp mode) {
  return Eigen::Vector3d(sample_at(v[0], x, mode), sample_at(v[1], x, mode),
                         sample_at(v[2], x, mode));
}

std::vector<double> sample_at(const ScalarField& f, std::span<const Eigen::Vector3d> xs,
                              Interp mode) {
  std::vector<double> out;
  out.reserve(xs.size());
  ScalarSampler sampler(f, mode);
  for (const auto& x : xs) out.push_back(sampler(x));
  return out;
}

ScalarSampler::ScalarSampler(const ScalarField& f, Interp mode) : field_(&f), mode_(mode) {
  if (mode_ == Interp::Spectral) spec_ = fft(f);
}

double ScalarSampler::operator()(const Eigen::Vector3d& x) const {
  if (mode_ == Interp::Spectral) return spectral_eval(spec_, x);
  return trilinear(*field_, x);
}

VectorSampler::VectorSampler(const VectorField& v, Interp mode)
    : comp_{ScalarSampler(v[0], mode), ScalarSampler(v[1], mode), ScalarSampler(v[2], mode)} {}

Eigen::Vector3d VectorSampler::operator()(const Eigen::Vector3d& x) const {
  return Eigen::Vector3d(comp_[0](x), comp_[1](x), comp_[2](x));
}

}  // namespace mhd
