#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "hopfsync/errors.hpp"
#include "hopfsync/phase.hpp"

namespace hopfsync {

/// Mean absolute wrapped phase difference, in [0, pi].
inline double abs_crp_difference(const std::vector<double>& dphi) {
  if (dphi.empty()) throw EmptySeriesError("abs_crp_difference: empty series");
  double acc = 0.0;
  for (double d : dphi) acc += std::abs(d);
  return acc / static_cast<double>(dphi.size());
}

/// Mean phase coherence R = |<exp(i dphi)>|, in [0, 1]. R = 1 iff the
/// difference is constant; R near 0 for a uniform difference distribution.
inline double mean_phase_coherence(const std::vector<double>& dphi) {
  if (dphi.empty()) throw EmptySeriesError("mean_phase_coherence: empty series");
  double c = 0.0, s = 0.0;
  for (double d : dphi) {
    c += std::cos(d);
    s += std::sin(d);
  }
  const double n = static_cast<double>(dphi.size());
  return std::hypot(c / n, s / n);
}

struct Histogram {
  std::vector<double> centers;  // bin centers over (-pi, pi]
  std::vector<double> density;  // normalized so sum(density) * width = 1
  double width = 0.0;
};

/// Histogram of phase differences over (-pi, pi] with equal-width bins,
/// normalized as a probability density.
inline Histogram phase_diff_density(const std::vector<double>& dphi,
                                    std::size_t bins = 64) {
  if (dphi.empty()) throw EmptySeriesError("phase_diff_density: empty series");
  if (bins == 0) throw ConfigError("phase_diff_density: bins must be positive");
  Histogram h;
  h.width = 2.0 * M_PI / static_cast<double>(bins);
  h.centers.resize(bins);
  h.density.assign(bins, 0.0);
  for (std::size_t b = 0; b < bins; ++b)
    h.centers[b] = -M_PI + (static_cast<double>(b) + 0.5) * h.width;
  for (double d : dphi) {
    // Wrap defensively so unwrapped inputs still land in the right bin; the
    // wrapped value lies in (-pi, pi] and the right edge belongs to the last
    // bin.
    const double w = wrap_difference(d);
    auto b = static_cast<std::size_t>((w + M_PI) / h.width);
    if (b >= bins) b = bins - 1;
    h.density[b] += 1.0;
  }
  const double norm = 1.0 / (static_cast<double>(dphi.size()) * h.width);
  for (double& v : h.density) v *= norm;
  return h;
}

/// Entropy-based synchronization index rho = (S_max - S) / S_max with S the
/// Shannon entropy of the binned phase-difference distribution and
/// S_max = ln(bins). rho = 1 for a single occupied bin, 0 for uniform.
inline double sync_index_from(const Histogram& h) {
  const std::size_t bins = h.density.size();
  if (bins < 2) throw ConfigError("sync_index: need at least 2 bins");
  // Summing the occupied masses in sorted order makes the entropy bit-exactly
  // invariant under any bin permutation (mirrored histograms included).
  std::vector<double> masses;
  masses.reserve(bins);
  for (double v : h.density) {
    const double pk = v * h.width;  // probability mass of the bin
    if (pk > 0.0) masses.push_back(pk);
  }
  std::sort(masses.begin(), masses.end());
  double entropy = 0.0;
  for (double pk : masses) entropy -= pk * std::log(pk);
  const double smax = std::log(static_cast<double>(bins));
  double rho = (smax - entropy) / smax;
  // Exact-arithmetic bounds are [0, 1]; clamp the last-ulp noise.
  if (rho < 0.0) rho = 0.0;
  if (rho > 1.0) rho = 1.0;
  return rho;
}

inline double sync_index(const std::vector<double>& dphi, std::size_t bins = 64) {
  if (bins < 2) throw ConfigError("sync_index: need at least 2 bins");
  return sync_index_from(phase_diff_density(dphi, bins));
}

/// Circular mean and circular standard deviation of wrapped differences.
/// The std is sqrt(-2 ln R1) with R1 the resultant length; it diverges as
/// the distribution flattens.
struct CircularStats {
  double mean;
  double std;
};

inline CircularStats circular_stats(const std::vector<double>& dphi) {
  if (dphi.empty()) throw EmptySeriesError("circular_stats: empty series");
  double c = 0.0, s = 0.0;
  for (double d : dphi) {
    c += std::cos(d);
    s += std::sin(d);
  }
  const double n = static_cast<double>(dphi.size());
  c /= n;
  s /= n;
  const double r = std::hypot(c, s);
  CircularStats out{std::atan2(s, c), 0.0};
  out.std = (r > 0.0) ? std::sqrt(std::max(0.0, -2.0 * std::log(std::min(r, 1.0))))
                      : std::numeric_limits<double>::infinity();
  return out;
}

/// Circular statistics of a binned distribution, weighting each bin center
/// by its probability mass.
inline CircularStats circular_stats_from(const Histogram& h) {
  if (h.centers.empty()) throw EmptySeriesError("circular_stats_from: empty histogram");
  double c = 0.0, s = 0.0;
  for (std::size_t b = 0; b < h.centers.size(); ++b) {
    const double pk = h.density[b] * h.width;
    c += pk * std::cos(h.centers[b]);
    s += pk * std::sin(h.centers[b]);
  }
  const double r = std::hypot(c, s);
  CircularStats out{std::atan2(s, c), 0.0};
  out.std = (r > 0.0) ? std::sqrt(std::max(0.0, -2.0 * std::log(std::min(r, 1.0))))
                      : std::numeric_limits<double>::infinity();
  return out;
}

/// Synchronization summary of one trial. beta is present only when a
/// spectral analysis was requested.
struct SyncMetrics {
  double abs_dphi = 0.0;
  double R = 0.0;
  double rho = 0.0;
  std::optional<double> beta;
};

// Convenience overloads on aligned phase pairs.
inline double abs_crp_difference(const PhaseSeries& ps) {
  return abs_crp_difference(phase_differences(ps));
}
inline double mean_phase_coherence(const PhaseSeries& ps) {
  return mean_phase_coherence(phase_differences(ps));
}
inline Histogram phase_diff_density(const PhaseSeries& ps, std::size_t bins = 64) {
  return phase_diff_density(phase_differences(ps), bins);
}
inline double sync_index(const PhaseSeries& ps, std::size_t bins = 64) {
  return sync_index(phase_differences(ps), bins);
}

}  // namespace hopfsync
