#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hopfsync/errors.hpp"
#include "hopfsync/model.hpp"
#include "hopfsync/rng.hpp"

namespace hopfsync {

/// Euler-Maruyama run configuration. Integration starts at t = 0; samples
/// earlier than t_burn are discarded so the returned trajectory covers
/// [t_burn, t_end].
struct SimConfig {
  double dt = 0.01;
  double t_end = 100.0;
  double t_burn = 15.0;
  std::uint64_t seed = 0;
  double ic_sigma = 0.008;
  double blowup_bound = 1e6;

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive");
    if (!std::isfinite(t_end) || !std::isfinite(t_burn))
      throw ConfigError("time range must be finite");
    if (!(t_burn >= 0.0) || !(t_burn < t_end))
      throw ConfigError("require 0 <= t_burn < t_end");
    if (!(ic_sigma >= 0.0)) throw ConfigError("ic_sigma must be non-negative");
    if (!(blowup_bound > 0.0)) throw ConfigError("blowup_bound must be positive");
  }

  std::size_t step_count() const {
    return static_cast<std::size_t>(std::llround(t_end / dt));
  }

  /// First retained step index: smallest k with k*dt >= t_burn (one-step slop).
  std::size_t burn_steps() const {
    return static_cast<std::size_t>(std::ceil(t_burn / dt - 1e-9));
  }
};

/// Uniformly sampled time series of the four-dimensional state, stored as
/// one column per coordinate. Sample k corresponds to time t0 + k*dt.
struct Trajectory {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<double> x1, y1, x2, y2;

  std::size_t size() const { return x1.size(); }
  double time(std::size_t k) const { return t0 + static_cast<double>(k) * dt; }
  State state(std::size_t k) const { return {x1[k], y1[k], x2[k], y2[k]}; }
};

/// Four independent Gaussian draws with standard deviation ic_sigma,
/// one (x, y) pair per oscillator stream.
inline State sample_initial_state(TrialStreams& streams, double ic_sigma) {
  State s;
  s.x1 = ic_sigma * streams.oscillator1().next();
  s.y1 = ic_sigma * streams.oscillator1().next();
  s.x2 = ic_sigma * streams.oscillator2().next();
  s.y2 = ic_sigma * streams.oscillator2().next();
  return s;
}

/// Deterministic Euler-Maruyama stepper over precomputed noise increments.
///
/// Per step: x_i += f_x_i*dt + delta_i*sqrt(dt)*eta_i, y_i += f_y_i*dt.
/// The y equations carry no noise. Throws BlowupError when a component
/// leaves [-bound, bound] or turns non-finite.
inline Trajectory integrate_core(const ModelParams& p, const SimConfig& cfg,
                                 const State& initial,
                                 std::span<const NoisePair> increments) {
  const std::size_t n_steps = cfg.step_count();
  const std::size_t k_burn = cfg.burn_steps();
  if (increments.size() < n_steps)
    throw ConfigError("integrate_core: not enough noise increments");

  Trajectory traj;
  traj.dt = cfg.dt;
  traj.t0 = static_cast<double>(k_burn) * cfg.dt;
  const std::size_t retained = n_steps - k_burn + 1;
  traj.x1.reserve(retained);
  traj.y1.reserve(retained);
  traj.x2.reserve(retained);
  traj.y2.reserve(retained);

  const double sqrt_dt = std::sqrt(cfg.dt);
  const double noise1 = p.delta1 * sqrt_dt;
  const double noise2 = p.delta2 * sqrt_dt;

  State s = initial;
  auto retain = [&](const State& v) {
    traj.x1.push_back(v.x1);
    traj.y1.push_back(v.y1);
    traj.x2.push_back(v.x2);
    traj.y2.push_back(v.y2);
  };
  auto check = [&](const State& v, std::size_t k) {
    const double b = cfg.blowup_bound;
    const bool ok = std::isfinite(v.x1) && std::isfinite(v.y1) &&
                    std::isfinite(v.x2) && std::isfinite(v.y2) &&
                    std::abs(v.x1) <= b && std::abs(v.y1) <= b &&
                    std::abs(v.x2) <= b && std::abs(v.y2) <= b;
    if (!ok)
      throw BlowupError("state exceeded bound " + std::to_string(b) + " at t=" +
                        std::to_string(static_cast<double>(k) * cfg.dt));
  };

  check(s, 0);
  if (k_burn == 0) retain(s);
  for (std::size_t k = 0; k < n_steps; ++k) {
    double f0, f1, f2, f3;
    detail::oscillator_drift(s.x1, s.y1, s.x2, s.y2, p.d1, p, f0, f1);
    detail::oscillator_drift(s.x2, s.y2, s.x1, s.y1, p.d2, p, f2, f3);
    s.x1 += f0 * cfg.dt + noise1 * increments[k].eta1;
    s.y1 += f1 * cfg.dt;
    s.x2 += f2 * cfg.dt + noise2 * increments[k].eta2;
    s.y2 += f3 * cfg.dt;
    check(s, k + 1);
    if (k + 1 >= k_burn) retain(s);
  }
  return traj;
}

/// Integrates the coupled SDEs from a Gaussian initial state drawn from the
/// given trial streams. A (params, config, streams) triple fully determines
/// the result.
inline Trajectory integrate(const ModelParams& p, const SimConfig& cfg,
                            TrialStreams& streams) {
  p.validate();
  cfg.validate();
  const State ic = sample_initial_state(streams, cfg.ic_sigma);
  const auto increments = wiener_increments(streams, cfg.step_count());
  return integrate_core(p, cfg, ic, increments);
}

/// Convenience overload deriving the trial streams from (seed, trial index).
inline Trajectory integrate(const ModelParams& p, const SimConfig& cfg,
                            std::uint64_t trial = 0) {
  TrialStreams streams(cfg.seed, trial, p);
  return integrate(p, cfg, streams);
}

}  // namespace hopfsync
