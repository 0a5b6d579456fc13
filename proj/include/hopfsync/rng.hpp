#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "hopfsync/model.hpp"

namespace hopfsync {

namespace detail {

// SplitMix64 finalizer; used to turn structured keys into well-mixed seeds.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t chain(std::uint64_t h, std::uint64_t v) {
  return mix64(h ^ v);
}

}  // namespace detail

/// Deterministic stream of standard-normal draws. A fully specified uniform
/// engine (mt19937_64) feeds a Box-Muller transform, so identical seeds give
/// bit-identical draw sequences on every platform with the same libm.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] so the log is finite; u2 in [0, 1).
    const double u1 = 1.0 - uniform01();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

/// Seed for one oscillator's noise stream, derived from the trial identity
/// and the oscillator's own (coupling, noise intensity) pair. Keying streams
/// by parameter values rather than grid position makes ensembles independent
/// of execution order, keeps shared cells identical when a sweep grid is
/// enlarged, and gives relabeled configurations the swapped streams.
inline std::uint64_t stream_seed(std::uint64_t master, std::uint64_t trial,
                                 double coupling, double intensity,
                                 std::uint64_t tiebreak) {
  using detail::chain;
  std::uint64_t h = detail::mix64(master);
  h = chain(h, trial);
  h = chain(h, std::bit_cast<std::uint64_t>(coupling));
  h = chain(h, std::bit_cast<std::uint64_t>(intensity));
  h = chain(h, tiebreak);
  return h;
}

/// The pair of per-oscillator noise streams owned by one trial.
class TrialStreams {
 public:
  TrialStreams(std::uint64_t master, std::uint64_t trial, const ModelParams& p)
      : s1_(seed_for(master, trial, p.d1, p.delta1, tiebreak(p, 1))),
        s2_(seed_for(master, trial, p.d2, p.delta2, tiebreak(p, 2))) {}

  GaussianStream& oscillator1() { return s1_; }
  GaussianStream& oscillator2() { return s2_; }

 private:
  // Identical parameter pairs would collide to one stream; fall back to the
  // oscillator index so the two noises stay independent.
  static std::uint64_t tiebreak(const ModelParams& p, std::uint64_t index) {
    return (p.d1 == p.d2 && p.delta1 == p.delta2) ? index : 0;
  }

  static std::uint64_t seed_for(std::uint64_t master, std::uint64_t trial,
                                double d, double delta, std::uint64_t tb) {
    return stream_seed(master, trial, d, delta, tb);
  }

  GaussianStream s1_;
  GaussianStream s2_;
};

/// One step's pair of unit-variance Wiener increments (before sqrt(dt) scaling).
struct NoisePair {
  double eta1;
  double eta2;
};

/// Draws n independent N(0,1) pairs, one per integration step.
inline std::vector<NoisePair> wiener_increments(TrialStreams& streams, std::size_t n) {
  std::vector<NoisePair> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k)
    out.push_back({streams.oscillator1().next(), streams.oscillator2().next()});
  return out;
}

}  // namespace hopfsync
