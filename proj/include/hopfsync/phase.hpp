#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "hopfsync/errors.hpp"

namespace hopfsync {

/// Natural phase of a planar point: atan2(y, x) in (-pi, pi]. Full-quadrant
/// by construction, so no branch bookkeeping is needed off the limit cycle.
inline double natural_phase(double x, double y) { return std::atan2(y, x); }

/// Wraps an angle into [0, 2pi).
inline double wrap_cyclic(double phi) {
  double w = std::fmod(phi, 2.0 * M_PI);
  if (w < 0.0) w += 2.0 * M_PI;
  if (w >= 2.0 * M_PI) w = 0.0;  // fmod can land exactly on 2pi after the add
  return w;
}

/// Wraps an angle difference into (-pi, pi]. remainder() returns [-pi, pi];
/// the single fixup keeps the interval half-open on the left, and maps the
/// exact negation of a wrapped value to its negation (sign symmetry).
inline double wrap_difference(double dphi) {
  double w = std::remainder(dphi, 2.0 * M_PI);
  if (w == -M_PI) w = M_PI;
  return w;
}

struct PhaseSeries {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<double> phi1;  // cyclic phases in [0, 2pi)
  std::vector<double> phi2;
};

/// Cyclic phases of two filtered coordinate pairs. Throws EmptySeriesError on
/// empty input, ConfigError on length mismatch, and DegenerateSampleError when
/// a sample sits exactly on the fixed point (no phase is defined there).
inline PhaseSeries cyclic_phases(const std::vector<double>& x1,
                                 const std::vector<double>& y1,
                                 const std::vector<double>& x2,
                                 const std::vector<double>& y2,
                                 double t0 = 0.0, double dt = 0.0) {
  const std::size_t n = x1.size();
  if (n == 0) throw EmptySeriesError("cyclic_phases: empty series");
  if (y1.size() != n || x2.size() != n || y2.size() != n)
    throw ConfigError("cyclic_phases: length mismatch");
  PhaseSeries out;
  out.t0 = t0;
  out.dt = dt;
  out.phi1.resize(n);
  out.phi2.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    if ((x1[k] == 0.0 && y1[k] == 0.0) || (x2[k] == 0.0 && y2[k] == 0.0))
      throw DegenerateSampleError("cyclic_phases: sample at the fixed point");
    out.phi1[k] = wrap_cyclic(natural_phase(x1[k], y1[k]));
    out.phi2[k] = wrap_cyclic(natural_phase(x2[k], y2[k]));
  }
  return out;
}

/// Pointwise wrapped phase differences phi1 - phi2 in (-pi, pi].
inline std::vector<double> phase_differences(const PhaseSeries& ps) {
  if (ps.phi1.size() != ps.phi2.size())
    throw ConfigError("phase_differences: length mismatch");
  std::vector<double> d(ps.phi1.size());
  for (std::size_t k = 0; k < d.size(); ++k)
    d[k] = wrap_difference(ps.phi1[k] - ps.phi2[k]);
  return d;
}

}  // namespace hopfsync
