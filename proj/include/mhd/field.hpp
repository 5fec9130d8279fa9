#pragma once

#include <Eigen/Dense>
#include <array>

#include "mhd/grid.hpp"

namespace mhd {

using Array = Eigen::ArrayXd;

// Real samples on the periodic grid, row-major over (x1, x2, x3): x3 fastest.
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(const GridSpec& g, double fill = 0.0)
      : grid_(g), values_(Array::Constant(static_cast<Eigen::Index>(g.size()), fill)) {}

  const GridSpec& grid() const { return grid_; }
  Array& values() { return values_; }
  const Array& values() const { return values_; }

  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * grid_.n + j) * grid_.n + k;
  }
  double& operator()(int i, int j, int k) { return values_[static_cast<Eigen::Index>(index(i, j, k))]; }
  double operator()(int i, int j, int k) const { return values_[static_cast<Eigen::Index>(index(i, j, k))]; }

  bool finite() const { return values_.isFinite().all(); }

 private:
  GridSpec grid_;
  Array values_;
};

struct VectorField {
  std::array<ScalarField, 3> comp;

  VectorField() = default;
  explicit VectorField(const GridSpec& g, double fill = 0.0)
      : comp{ScalarField(g, fill), ScalarField(g, fill), ScalarField(g, fill)} {}

  const GridSpec& grid() const { return comp[0].grid(); }
  ScalarField& operator[](int j) { return comp[j]; }
  const ScalarField& operator[](int j) const { return comp[j]; }
  bool finite() const { return comp[0].finite() && comp[1].finite() && comp[2].finite(); }
};

// 3x3 field; entry(j,k) holds T^{j,k}, e.g. the velocity gradient du^j/dx_k.
struct TensorField {
  std::array<ScalarField, 9> comp;

  TensorField() = default;
  explicit TensorField(const GridSpec& g, double fill = 0.0) {
    comp.fill(ScalarField(g, fill));
  }

  const GridSpec& grid() const { return comp[0].grid(); }
  ScalarField& entry(int j, int k) { return comp[3 * j + k]; }
  const ScalarField& entry(int j, int k) const { return comp[3 * j + k]; }
};

inline void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what) {
  if (!(a == b)) throw ConfigError(std::string(what) + ": grid mismatch");
}

}  // namespace mhd
