#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "hopfsync/errors.hpp"

namespace hopfsync {

/// Second-order Butterworth low-pass coefficients via the bilinear transform.
/// cutoff is in rad/time; it must lie below the Nyquist rate pi/dt.
struct Biquad {
  double b0, b1, b2;  // numerator
  double a1, a2;      // denominator (a0 normalized to 1)

  static Biquad lowpass(double cutoff, double dt) {
    if (!(cutoff > 0.0) || !std::isfinite(cutoff))
      throw BadCutoffError("cutoff must be positive and finite");
    if (!(cutoff < M_PI / dt))
      throw BadCutoffError("cutoff at or above the Nyquist rate");
    const double wc = std::tan(0.5 * cutoff * dt);  // prewarped
    const double k = std::sqrt(2.0);
    const double norm = 1.0 / (1.0 + k * wc + wc * wc);
    Biquad q{};
    q.b0 = wc * wc * norm;
    q.b1 = 2.0 * q.b0;
    q.b2 = q.b0;
    q.a1 = 2.0 * (wc * wc - 1.0) * norm;
    q.a2 = (1.0 - k * wc + wc * wc) * norm;
    return q;
  }

  void apply_in_place(std::vector<double>& x) const {
    double w1 = 0.0, w2 = 0.0;  // direct form II state
    for (double& v : x) {
      const double w0 = v - a1 * w1 - a2 * w2;
      v = b0 * w0 + b1 * w1 + b2 * w2;
      w2 = w1;
      w1 = w0;
    }
  }
};

namespace detail {

// Odd reflection about the end points removes the step the filter state
// would otherwise see, which keeps edge transients out of the kept samples.
inline std::vector<double> reflect_pad(const std::vector<double>& x,
                                       std::size_t pad) {
  const std::size_t n = x.size();
  std::vector<double> out;
  out.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i)
    out.push_back(2.0 * x.front() - x[std::min(i, n - 1)]);
  out.insert(out.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i)
    out.push_back(2.0 * x.back() - x[n - 1 - std::min(i, n - 1)]);
  return out;
}

}  // namespace detail

/// Zero-phase low-pass: the biquad is run forward and then backward over a
/// reflection-padded copy, so the pass band keeps its phase and the stop
/// band is attenuated twice. Throws EmptySeriesError / BadCutoffError.
inline std::vector<double> lowpass_filtfilt(const std::vector<double>& x,
                                            double cutoff, double dt) {
  if (x.empty()) throw EmptySeriesError("lowpass_filtfilt: empty series");
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw ConfigError("lowpass_filtfilt: dt must be positive");
  const Biquad q = Biquad::lowpass(cutoff, dt);
  if (x.size() == 1) return x;

  // Pad by roughly three filter time constants, capped by series length.
  const auto want = static_cast<std::size_t>(std::ceil(3.0 * 2.0 * M_PI / (cutoff * dt)));
  const std::size_t pad = std::min<std::size_t>(std::max<std::size_t>(want, 16), x.size() - 1);

  std::vector<double> padded = detail::reflect_pad(x, pad);
  q.apply_in_place(padded);
  std::reverse(padded.begin(), padded.end());
  q.apply_in_place(padded);
  std::reverse(padded.begin(), padded.end());

  return std::vector<double>(padded.begin() + static_cast<std::ptrdiff_t>(pad),
                             padded.begin() + static_cast<std::ptrdiff_t>(pad + x.size()));
}

}  // namespace hopfsync
