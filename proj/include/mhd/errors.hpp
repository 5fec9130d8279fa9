#pragma once

#include <stdexcept>
#include <string>

namespace mhd {

// Invalid configuration or parameter set. The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Solution left the physical regime (NaN/Inf, rho <= 0, div H drift).
// Carries the name of the offending field; the CLI maps this to exit code 3.
struct BlowupError : std::runtime_error {
  BlowupError(std::string field, const std::string& what)
      : std::runtime_error(what), field_name(std::move(field)) {}
  std::string field_name;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace mhd
