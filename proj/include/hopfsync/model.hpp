#pragma once

#include <array>
#include <cmath>

#include "hopfsync/errors.hpp"

namespace hopfsync {

/// Parameters of the coupled lambda-omega pair.
///
/// The amplitude gain is lambda(r) = lambda0 + alpha*r^2 + gamma*r^4 and the
/// angular frequency is omega(r) = omega0 + omega1*r^2. Oscillator i receives
/// diffusive input d_i*(x_j - x_i) and additive noise of intensity delta_i on
/// its x equation only.
struct ModelParams {
  double lambda0 = -0.5;
  double alpha = -0.2;
  double gamma = -0.2;
  double omega0 = 2.0;
  double omega1 = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;

  /// Couplings and noise intensities must be non-negative (excitatory only);
  /// the base frequency must be positive (it sets the rotation period and the
  /// default filter cutoff).
  void validate() const {
    if (!(d1 >= 0.0) || !(d2 >= 0.0))
      throw ConfigError("coupling strengths d1, d2 must be non-negative");
    if (!(delta1 >= 0.0) || !(delta2 >= 0.0))
      throw ConfigError("noise intensities delta1, delta2 must be non-negative");
    if (!(omega0 > 0.0)) throw ConfigError("omega0 must be positive");
    for (double v : {lambda0, alpha, gamma, omega0, omega1, d1, d2, delta1, delta2})
      if (!std::isfinite(v)) throw ConfigError("model parameters must be finite");
  }

  /// Relabels the oscillators: swaps (d1, delta1) with (d2, delta2).
  [[nodiscard]] ModelParams swapped() const {
    ModelParams q = *this;
    q.d1 = d2;
    q.d2 = d1;
    q.delta1 = delta2;
    q.delta2 = delta1;
    return q;
  }
};

struct State {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;
};

using Vec4 = std::array<double, 4>;
using Mat4 = std::array<std::array<double, 4>, 4>;

/// Amplitude gain lambda(r).
inline double lambda_gain(double r, const ModelParams& p) {
  const double r2 = r * r;
  return p.lambda0 + p.alpha * r2 + p.gamma * r2 * r2;
}

/// Angular frequency omega(r).
inline double omega_freq(double r, const ModelParams& p) {
  return p.omega0 + p.omega1 * r * r;
}

namespace detail {

// One oscillator's deterministic field given its own (x, y), the partner's
// (xo, yo), and its coupling strength. Shared by both oscillators so that
// relabeling permutes the outputs bit-exactly.
inline void oscillator_drift(double x, double y, double xo, double yo, double d,
                             const ModelParams& p, double& dx, double& dy) {
  const double r2 = x * x + y * y;
  const double lam = p.lambda0 + r2 * (p.alpha + p.gamma * r2);
  const double omg = p.omega0 + p.omega1 * r2;
  dx = lam * x - omg * y + d * (xo - x);
  dy = omg * x + lam * y + d * (yo - y);
}

}  // namespace detail

/// Deterministic part of the vector field for (x1, y1, x2, y2).
/// The noise term belongs to the integrator and is not included here.
inline Vec4 drift(const State& s, const ModelParams& p) {
  Vec4 f;
  detail::oscillator_drift(s.x1, s.y1, s.x2, s.y2, p.d1, p, f[0], f[1]);
  detail::oscillator_drift(s.x2, s.y2, s.x1, s.y1, p.d2, p, f[2], f[3]);
  return f;
}

/// Jacobian of drift at the origin. lambda(0) = lambda0 and omega(0) = omega0,
/// so each oscillator contributes a rotation block and the coupling enters as
/// d_i on the off-diagonal and -d_i on the diagonal.
inline Mat4 jacobian_origin(const ModelParams& p) {
  const double l = p.lambda0;
  const double w = p.omega0;
  return Mat4{{{l - p.d1, -w, p.d1, 0.0},
               {w, l - p.d1, 0.0, p.d1},
               {p.d2, 0.0, l - p.d2, -w},
               {0.0, p.d2, w, l - p.d2}}};
}

}  // namespace hopfsync
