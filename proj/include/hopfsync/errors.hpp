#pragma once

#include <stdexcept>
#include <string>

namespace hopfsync {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters, configuration, or ranges supplied by the caller.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Numerical instability: a state component left the configured bound
/// or became non-finite during integration.
class BlowupError : public Error {
 public:
  using Error::Error;
};

/// A sample sits exactly at the fixed point, so its phase is undefined.
class DegenerateSampleError : public Error {
 public:
  using Error::Error;
};

class EmptySeriesError : public Error {
 public:
  using Error::Error;
};

/// Filter cutoff at or above the Nyquist frequency.
class BadCutoffError : public Error {
 public:
  using Error::Error;
};

/// Series too short for a spectral estimate.
class TooShortError : public Error {
 public:
  using Error::Error;
};

/// Spectrum has no interior maximum; input is noise-dominated or trivial.
class NoPeakError : public Error {
 public:
  using Error::Error;
};

/// Parameter range contains no eigenvalue sign change.
class EmptyRangeError : public Error {
 public:
  using Error::Error;
};

class AllCellsFailedError : public Error {
 public:
  using Error::Error;
};

}  // namespace hopfsync
