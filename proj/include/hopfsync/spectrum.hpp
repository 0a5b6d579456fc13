#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "hopfsync/errors.hpp"

namespace hopfsync {

struct Spectrum {
  std::vector<double> omega;  // angular frequency, rad/time
  std::vector<double> power;  // one-sided density, variance per rad/time
  double domega = 0.0;
};

namespace detail {

// FFTW plan creation and destruction mutate global planner state and are not
// thread safe; execution of a private plan is.
inline std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}

class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    in_ = fftw_alloc_real(n);
    out_ = fftw_alloc_complex(n / 2 + 1);
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_, out_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    {
      std::lock_guard<std::mutex> lock(fftw_plan_mutex());
      fftw_destroy_plan(plan_);
    }
    fftw_free(in_);
    fftw_free(out_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  double* input() { return in_; }
  // Returns |X_k|^2 for k = 0 .. n/2.
  void execute(std::vector<double>& mag2) {
    fftw_execute(plan_);
    const std::size_t half = n_ / 2;
    mag2.resize(half + 1);
    for (std::size_t k = 0; k <= half; ++k)
      mag2[k] = out_[k][0] * out_[k][0] + out_[k][1] * out_[k][1];
  }

 private:
  std::size_t n_;
  double* in_;
  fftw_complex* out_;
  fftw_plan plan_;
};

}  // namespace detail

/// Welch power spectral density of a uniformly sampled series. Segments of
/// length min(segment, n) with 50% overlap, periodic Hann window, per-segment
/// mean removal, one-sided normalization in angular frequency so that the
/// integral of the density approximates the series variance.
/// Throws TooShortError for fewer than 256 samples.
inline Spectrum power_spectrum(const std::vector<double>& x, double dt,
                               std::size_t segment = 2048) {
  if (x.size() < 256) throw TooShortError("power_spectrum: need at least 256 samples");
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw ConfigError("power_spectrum: dt must be positive");
  if (segment < 16) throw ConfigError("power_spectrum: segment must be >= 16");

  const std::size_t n = x.size();
  const std::size_t L = std::min<std::size_t>(segment, n);
  const std::size_t hop = L / 2;
  const std::size_t half = L / 2;

  // Periodic Hann; mean of w^2 is exactly 3/8.
  std::vector<double> w(L);
  for (std::size_t k = 0; k < L; ++k)
    w[k] = 0.5 * (1.0 - std::cos(2.0 * M_PI * static_cast<double>(k) /
                                 static_cast<double>(L)));
  const double u = 0.375;

  detail::RealFft fft(L);
  std::vector<double> mag2;
  std::vector<double> acc(half + 1, 0.0);
  std::size_t segments = 0;
  for (std::size_t start = 0; start + L <= n; start += hop) {
    double mean = 0.0;
    for (std::size_t k = 0; k < L; ++k) mean += x[start + k];
    mean /= static_cast<double>(L);
    for (std::size_t k = 0; k < L; ++k)
      fft.input()[k] = (x[start + k] - mean) * w[k];
    fft.execute(mag2);
    for (std::size_t k = 0; k <= half; ++k) acc[k] += mag2[k];
    ++segments;
    if (start + L == n) break;
  }

  Spectrum s;
  s.domega = 2.0 * M_PI / (static_cast<double>(L) * dt);
  s.omega.resize(half + 1);
  s.power.resize(half + 1);
  const double scale = dt / (2.0 * M_PI * static_cast<double>(L) * u *
                             static_cast<double>(segments));
  for (std::size_t k = 0; k <= half; ++k) {
    s.omega[k] = static_cast<double>(k) * s.domega;
    // One-sided: interior bins carry the mirrored negative-frequency power.
    const double fold = (k == 0 || (L % 2 == 0 && k == half)) ? 1.0 : 2.0;
    s.power[k] = scale * fold * acc[k];
  }
  return s;
}

/// Signal-to-noise ratio beta = h_p * omega_p / Delta omega: peak height
/// times peak frequency over the width at h_p * exp(-1/2). The peak
/// location is refined parabolically over the three bins around the
/// maximum; the width is found by linear interpolation on both flanks and
/// clamped at the spectrum edges. Throws NoPeakError when the maximum sits
/// on the boundary.
inline double snr_beta(const Spectrum& s) {
  const std::size_t n = s.power.size();
  if (n < 3) throw NoPeakError("snr_beta: spectrum too short");
  std::size_t imax = 0;
  for (std::size_t k = 1; k < n; ++k)
    if (s.power[k] > s.power[imax]) imax = k;
  if (imax == 0 || imax + 1 == n)
    throw NoPeakError("snr_beta: spectral maximum at the boundary");

  const double ym = s.power[imax - 1];
  const double y0 = s.power[imax];
  const double yp = s.power[imax + 1];
  const double denom = ym - 2.0 * y0 + yp;
  double shift = 0.0;
  if (denom < 0.0) shift = 0.5 * (ym - yp) / denom;
  shift = std::clamp(shift, -0.5, 0.5);
  const double omega_p = s.omega[imax] + shift * s.domega;
  const double h_p = y0 - 0.25 * (ym - yp) * shift;

  const double level = h_p * std::exp(-0.5);
  // Left flank: walk down until the power drops below the level.
  double left = s.omega.front();
  for (std::size_t k = imax; k-- > 0;) {
    if (s.power[k] <= level) {
      const double frac = (level - s.power[k]) / (s.power[k + 1] - s.power[k]);
      left = s.omega[k] + frac * s.domega;
      break;
    }
    if (k == 0) left = s.omega.front();
  }
  double right = s.omega.back();
  for (std::size_t k = imax + 1; k < n; ++k) {
    if (s.power[k] <= level) {
      const double frac = (s.power[k - 1] - level) / (s.power[k - 1] - s.power[k]);
      right = s.omega[k - 1] + frac * s.domega;
      break;
    }
  }
  const double width = std::max(right - left, s.domega * 1e-6);
  return h_p * omega_p / width;
}

}  // namespace hopfsync
