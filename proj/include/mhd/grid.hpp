#pragma once

#include <cstddef>

#include "mhd/errors.hpp"

namespace mhd {

// Uniform periodic box [0,L)^3 sampled at n points per axis, spacing h = L/n.
struct GridSpec {
  int n = 0;
  double length = 0.0;

  GridSpec() = default;
  GridSpec(int n_, double length_) : n(n_), length(length_) {
    if (n < 8 || n % 2 != 0) throw ConfigError("grid: n must be even and >= 8");
    if (!(length > 0.0)) throw ConfigError("grid: box length must be positive");
  }

  double h() const { return length / n; }
  std::size_t size() const { return static_cast<std::size_t>(n) * n * n; }

  // Fields are compatible for arithmetic iff (n, L) match exactly.
  bool operator==(const GridSpec&) const = default;
};

}  // namespace mhd
