#pragma once

#include <stdexcept>
#include <string>

namespace dep {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shape disagreement between tensors or layers.
struct DimensionError : Error {
  using Error::Error;
};

// Invalid scalar argument (eps <= 0, empty scale list, ...).
struct ParameterError : Error {
  using Error::Error;
};

// Malformed file contents (TNSR, PPM, CSV).
struct FormatError : Error {
  using Error::Error;
};

// Inconsistent data (label out of range, id mismatch, class mismatch).
struct DataError : Error {
  using Error::Error;
};

// Bad configuration file, key, or value.
struct ConfigError : Error {
  using Error::Error;
};

// Numerical failure at runtime (NaN gradient, diverging optimization).
struct NumericError : Error {
  using Error::Error;
};

// API misuse (non-scalar loss handed to backward, mixed graphs).
struct ContractError : Error {
  using Error::Error;
};

}  // namespace dep
