#pragma once

#include <stdexcept>
#include <string>

namespace gears {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A (mu_c, mu_r) pair without an integer (m1, m2) preimage.
struct NonPhysical : Error {
  using Error::Error;
};

/// Quantum spectra are only implemented for I1 == I2.
struct UnsupportedInertia : Error {
  using Error::Error;
};

struct ConvergenceFailure : Error {
  using Error::Error;
};

struct StepTooLarge : Error {
  using Error::Error;
};

/// Probability leaked onto the boundary of a truncated basis.
struct TruncationBreach : Error {
  using Error::Error;
};

struct InternalInconsistency : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace gears
