#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "hopfsync/errors.hpp"
#include "hopfsync/filter.hpp"
#include "hopfsync/integrator.hpp"
#include "hopfsync/metrics.hpp"
#include "hopfsync/model.hpp"
#include "hopfsync/phase.hpp"
#include "hopfsync/rng.hpp"
#include "hopfsync/spectrum.hpp"
#include "hopfsync/version.hpp"

namespace hopfsync {

enum class ParamId { lambda0, d1, d2, delta1, delta2 };

inline const char* to_string(ParamId id) {
  switch (id) {
    case ParamId::lambda0: return "lambda0";
    case ParamId::d1: return "d1";
    case ParamId::d2: return "d2";
    case ParamId::delta1: return "delta1";
    case ParamId::delta2: return "delta2";
  }
  return "?";
}

inline ParamId param_from_string(const std::string& s) {
  if (s == "lambda0") return ParamId::lambda0;
  if (s == "d1") return ParamId::d1;
  if (s == "d2") return ParamId::d2;
  if (s == "delta1") return ParamId::delta1;
  if (s == "delta2") return ParamId::delta2;
  throw ConfigError("unknown sweep parameter '" + s + "'");
}

inline void apply_param(ModelParams& p, ParamId id, double value) {
  switch (id) {
    case ParamId::lambda0: p.lambda0 = value; return;
    case ParamId::d1: p.d1 = value; return;
    case ParamId::d2: p.d2 = value; return;
    case ParamId::delta1: p.delta1 = value; return;
    case ParamId::delta2: p.delta2 = value; return;
  }
}

enum class Spacing { linear, log };

inline const char* to_string(Spacing s) {
  return s == Spacing::linear ? "linear" : "log";
}

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  if (n == 0) throw ConfigError("linspace: need at least one point");
  if (n == 1) return {lo};
  std::vector<double> v(n);
  for (std::size_t k = 0; k < n; ++k)
    v[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
  v.front() = lo;
  v.back() = hi;
  return v;
}

inline std::vector<double> logspace(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0) || !(hi > 0.0))
    throw ConfigError("logspace: endpoints must be positive");
  if (n == 0) throw ConfigError("logspace: need at least one point");
  if (n == 1) return {lo};
  std::vector<double> v(n);
  const double ratio = hi / lo;
  for (std::size_t k = 0; k < n; ++k)
    v[k] = lo * std::pow(ratio, static_cast<double>(k) / static_cast<double>(n - 1));
  v.front() = lo;
  v.back() = hi;
  return v;
}

struct Axis {
  ParamId id = ParamId::delta2;
  std::vector<double> values;
  Spacing spacing = Spacing::log;
};

inline Axis make_axis(ParamId id, double lo, double hi, std::size_t n, Spacing sp) {
  Axis a;
  a.id = id;
  a.spacing = sp;
  a.values = (sp == Spacing::log) ? logspace(lo, hi, n) : linspace(lo, hi, n);
  return a;
}

/// Settings of the analysis stage shared by every trial of a sweep. The
/// filter cutoff defaults to four times the carrier frequency; the bin count
/// and PSD segment length are recorded in output metadata because the
/// entropy index and beta depend on them.
struct AnalysisConfig {
  std::optional<double> filter_cutoff;  // rad/time; absent = 4 * omega0
  std::size_t bins = 64;
  std::size_t psd_segment = 2048;
  bool compute_beta = false;

  double cutoff_for(const ModelParams& p) const {
    return filter_cutoff ? *filter_cutoff : 4.0 * p.omega0;
  }

  void validate() const {
    if (bins < 2) throw ConfigError("analysis: bins must be >= 2");
    if (psd_segment < 16) throw ConfigError("analysis: psd_segment must be >= 16");
    if (filter_cutoff && (!(*filter_cutoff > 0.0) || !std::isfinite(*filter_cutoff)))
      throw ConfigError("analysis: filter_cutoff must be positive");
  }
};

/// One- or two-axis parameter grid with the shared base configuration.
/// Cells are indexed row-major, first axis outermost.
struct SweepGrid {
  std::vector<Axis> axes;
  ModelParams base;
  SimConfig sim;
  AnalysisConfig analysis;
  std::size_t n_trials = 200;

  void validate() const {
    if (axes.empty() || axes.size() > 2)
      throw ConfigError("sweep grid: need one or two axes");
    if (axes.size() == 2 && axes[0].id == axes[1].id)
      throw ConfigError("sweep grid: axis parameters must be distinct");
    for (const Axis& a : axes) {
      if (a.values.empty()) throw ConfigError("sweep grid: empty axis");
      for (std::size_t k = 0; k + 1 < a.values.size(); ++k)
        if (!(a.values[k] < a.values[k + 1]))
          throw ConfigError("sweep grid: axis values must be strictly increasing");
      for (double v : a.values)
        if (!std::isfinite(v)) throw ConfigError("sweep grid: non-finite axis value");
    }
    if (n_trials == 0) throw ConfigError("sweep grid: n_trials must be >= 1");
    base.validate();
    sim.validate();
    analysis.validate();
  }

  std::size_t cell_count() const {
    std::size_t n = 1;
    for (const Axis& a : axes) n *= a.values.size();
    return n;
  }

  std::vector<double> coords_for(std::size_t flat) const {
    std::vector<double> c(axes.size());
    if (axes.size() == 1) {
      c[0] = axes[0].values[flat];
    } else {
      const std::size_t inner = axes[1].values.size();
      c[0] = axes[0].values[flat / inner];
      c[1] = axes[1].values[flat % inner];
    }
    return c;
  }

  ModelParams params_for(std::size_t flat) const {
    ModelParams p = base;
    const auto c = coords_for(flat);
    for (std::size_t a = 0; a < axes.size(); ++a) apply_param(p, axes[a].id, c[a]);
    return p;
  }
};

namespace detail {

inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

// Runs fn(i) for i in [0, n) on up to `threads` workers. Work items must
// write results into caller-owned slots indexed by i; the merge order is
// therefore fixed by index and the outcome is independent of scheduling.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  if (n == 0) return;
  const unsigned t = static_cast<unsigned>(
      std::min<std::size_t>(resolve_threads(threads), n));
  if (t <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(t);
  for (unsigned k = 0; k < t; ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace detail

/// One trial of the full pipeline with the phase-difference density kept:
/// integrate, low-pass both coordinates of both oscillators, extract cyclic
/// phases, reduce to the synchronization metrics. Trials whose filtered
/// amplitude falls below 1e-12 anywhere are rejected as degenerate (no
/// sustained oscillation to assign a phase to).
struct TrialAnalysis {
  SyncMetrics metrics;
  Histogram density;
};

inline TrialAnalysis run_trial_analysis(const ModelParams& p, const SimConfig& sim,
                                        const AnalysisConfig& an, std::uint64_t trial) {
  an.validate();
  TrialStreams streams(sim.seed, trial, p);
  const Trajectory tr = integrate(p, sim, streams);

  const double cutoff = an.cutoff_for(p);
  const auto fx1 = lowpass_filtfilt(tr.x1, cutoff, tr.dt);
  const auto fy1 = lowpass_filtfilt(tr.y1, cutoff, tr.dt);
  const auto fx2 = lowpass_filtfilt(tr.x2, cutoff, tr.dt);
  const auto fy2 = lowpass_filtfilt(tr.y2, cutoff, tr.dt);

  for (std::size_t k = 0; k < fx1.size(); ++k) {
    if (std::hypot(fx1[k], fy1[k]) < 1e-12 || std::hypot(fx2[k], fy2[k]) < 1e-12)
      throw DegenerateSampleError("run_trial: amplitude below 1e-12 at t=" +
                                  std::to_string(tr.time(k)));
  }

  const PhaseSeries ps = cyclic_phases(fx1, fy1, fx2, fy2, tr.t0, tr.dt);
  const auto dphi = phase_differences(ps);

  TrialAnalysis out;
  out.density = phase_diff_density(dphi, an.bins);
  out.metrics.abs_dphi = abs_crp_difference(dphi);
  out.metrics.R = mean_phase_coherence(dphi);
  out.metrics.rho = sync_index_from(out.density);
  if (an.compute_beta)
    out.metrics.beta = snr_beta(power_spectrum(fx1, tr.dt, an.psd_segment));
  return out;
}

inline SyncMetrics run_trial(const ModelParams& p, const SimConfig& sim,
                             const AnalysisConfig& an, std::uint64_t trial) {
  return run_trial_analysis(p, sim, an, trial).metrics;
}

/// Trial-ensemble average with standard errors. Per-trial metrics are
/// accumulated in trial-index order, so the result is bit-identical for any
/// worker count or completion order.
struct EnsembleResult {
  SyncMetrics mean;
  double stderr_abs_dphi = 0.0;
  double stderr_R = 0.0;
  double stderr_rho = 0.0;
  std::size_t n_ok = 0;
  std::size_t n_failed = 0;
};

inline EnsembleResult ensemble_average(const ModelParams& p, const SimConfig& sim,
                                       const AnalysisConfig& an, std::size_t n_trials,
                                       unsigned threads = 1) {
  if (n_trials == 0) throw ConfigError("ensemble_average: n_trials must be >= 1");
  p.validate();
  sim.validate();
  an.validate();

  std::vector<std::optional<SyncMetrics>> results(n_trials);
  std::vector<std::string> failures(n_trials);
  detail::parallel_for(n_trials, threads, [&](std::size_t t) {
    try {
      results[t] = run_trial(p, sim, an, t);
    } catch (const Error& e) {
      failures[t] = e.what();
    }
  });

  EnsembleResult out;
  std::string first_failure;
  for (std::size_t t = 0; t < n_trials; ++t) {
    if (results[t]) {
      ++out.n_ok;
    } else {
      ++out.n_failed;
      if (first_failure.empty()) first_failure = failures[t];
    }
  }
  if (static_cast<double>(out.n_failed) >
      0.01 * static_cast<double>(n_trials)) {
    throw Error("ensemble_average: " + std::to_string(out.n_failed) + " of " +
                std::to_string(n_trials) + " trials failed (" + first_failure + ")");
  }

  double sum_a = 0.0, sum_r = 0.0, sum_rho = 0.0, sum_beta = 0.0;
  std::size_t n_beta = 0;
  for (std::size_t t = 0; t < n_trials; ++t) {
    if (!results[t]) continue;
    sum_a += results[t]->abs_dphi;
    sum_r += results[t]->R;
    sum_rho += results[t]->rho;
    if (results[t]->beta) {
      sum_beta += *results[t]->beta;
      ++n_beta;
    }
  }
  const double n = static_cast<double>(out.n_ok);
  out.mean.abs_dphi = sum_a / n;
  out.mean.R = sum_r / n;
  out.mean.rho = sum_rho / n;
  if (n_beta > 0) out.mean.beta = sum_beta / static_cast<double>(n_beta);

  if (out.n_ok > 1) {
    double va = 0.0, vr = 0.0, vrho = 0.0;
    for (std::size_t t = 0; t < n_trials; ++t) {
      if (!results[t]) continue;
      const double da = results[t]->abs_dphi - out.mean.abs_dphi;
      const double dr = results[t]->R - out.mean.R;
      const double drho = results[t]->rho - out.mean.rho;
      va += da * da;
      vr += dr * dr;
      vrho += drho * drho;
    }
    const double denom = n * (n - 1.0);
    out.stderr_abs_dphi = std::sqrt(va / denom);
    out.stderr_R = std::sqrt(vr / denom);
    out.stderr_rho = std::sqrt(vrho / denom);
  }
  return out;
}

struct CellResult {
  std::vector<double> coords;
  bool ok = false;
  std::string error;
  EnsembleResult ens;
};

struct SweepResult {
  SweepGrid grid;
  std::vector<CellResult> cells;  // row-major, first axis outermost
  std::string version;
};

/// Evaluates the ensemble average at every grid cell. Cells are independent
/// work items; a failed cell carries its error text and the sweep continues.
inline SweepResult sweep(const SweepGrid& grid, unsigned threads = 0) {
  grid.validate();
  SweepResult res;
  res.grid = grid;
  res.version = kVersion;
  res.cells.resize(grid.cell_count());
  detail::parallel_for(res.cells.size(), threads, [&](std::size_t c) {
    CellResult& cell = res.cells[c];
    cell.coords = grid.coords_for(c);
    try {
      const ModelParams p = grid.params_for(c);
      cell.ens = ensemble_average(p, grid.sim, grid.analysis, grid.n_trials, 1);
      cell.ok = true;
    } catch (const Error& e) {
      cell.ok = false;
      cell.error = e.what();
    }
  });
  return res;
}

inline constexpr const char* kTieBreakRule =
    "smaller coordinate sum, then smaller first coordinate";

struct OptimaReport {
  double min_abs_dphi = 0.0;
  std::vector<ParamId> axis_ids;
  std::vector<double> argmin;
  std::size_t argmin_flat = 0;
  double optimal_noise_ratio = 0.0;  // delta1/delta2 of the argmin cell
};

/// Cell minimizing the averaged absolute CRP difference. Ties break toward
/// the smaller coordinate sum, then the smaller first coordinate (the rule
/// is exported as kTieBreakRule for output metadata).
inline OptimaReport find_optimum(const SweepResult& res) {
  const CellResult* best = nullptr;
  std::size_t best_idx = 0;
  auto coord_sum = [](const std::vector<double>& c) {
    double s = 0.0;
    for (double v : c) s += v;
    return s;
  };
  for (std::size_t i = 0; i < res.cells.size(); ++i) {
    const CellResult& cell = res.cells[i];
    if (!cell.ok) continue;
    if (!best) {
      best = &cell;
      best_idx = i;
      continue;
    }
    const double a = cell.ens.mean.abs_dphi;
    const double b = best->ens.mean.abs_dphi;
    bool better = a < b;
    if (a == b) {
      const double sa = coord_sum(cell.coords);
      const double sb = coord_sum(best->coords);
      better = sa < sb || (sa == sb && cell.coords[0] < best->coords[0]);
    }
    if (better) {
      best = &cell;
      best_idx = i;
    }
  }
  if (!best) throw AllCellsFailedError("find_optimum: every cell failed");

  OptimaReport r;
  r.min_abs_dphi = best->ens.mean.abs_dphi;
  for (const Axis& a : res.grid.axes) r.axis_ids.push_back(a.id);
  r.argmin = best->coords;
  r.argmin_flat = best_idx;
  const ModelParams p = res.grid.params_for(best_idx);
  r.optimal_noise_ratio = p.delta1 / p.delta2;
  return r;
}

/// Per-(d1, d2) optimum over an inner noise grid. Outer cells run in
/// sequence; the inner sweep parallelizes its own cells.
struct OptimumMapRow {
  double d1 = 0.0;
  double d2 = 0.0;
  bool ok = false;
  std::string error;
  OptimaReport report;
};

inline std::vector<OptimumMapRow> optimum_map(
    const std::vector<double>& d1_values, const std::vector<double>& d2_values,
    const Axis& noise1, const Axis& noise2, const ModelParams& base,
    const SimConfig& sim, const AnalysisConfig& an, std::size_t n_trials,
    unsigned threads = 0) {
  if (d1_values.empty() || d2_values.empty())
    throw ConfigError("optimum_map: empty coupling grid");
  std::vector<OptimumMapRow> rows;
  rows.reserve(d1_values.size() * d2_values.size());
  for (double d1 : d1_values) {
    for (double d2 : d2_values) {
      OptimumMapRow row;
      row.d1 = d1;
      row.d2 = d2;
      SweepGrid g;
      g.axes = {noise1, noise2};
      g.base = base;
      g.base.d1 = d1;
      g.base.d2 = d2;
      g.sim = sim;
      g.analysis = an;
      g.n_trials = n_trials;
      try {
        row.report = find_optimum(sweep(g, threads));
        row.ok = true;
      } catch (const Error& e) {
        row.error = e.what();
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

/// Noise-grid optimum per lambda0 in the excitable regime (all lambda0 < 0).
struct LambdaOptimumRow {
  double lambda0 = 0.0;
  double min_abs_dphi = 0.0;
  double optimal_sum = 0.0;  // delta1* + delta2*
  OptimaReport report;
};

inline std::vector<LambdaOptimumRow> optimum_vs_lambda(
    const std::vector<double>& lambda0_list, const Axis& noise1,
    const Axis& noise2, const ModelParams& base, const SimConfig& sim,
    const AnalysisConfig& an, std::size_t n_trials, unsigned threads = 0) {
  if (lambda0_list.empty()) throw ConfigError("optimum_vs_lambda: empty lambda0 list");
  for (double l0 : lambda0_list)
    if (!(l0 < 0.0))
      throw ConfigError("optimum_vs_lambda: lambda0 must be negative (excitable regime)");
  std::vector<LambdaOptimumRow> rows;
  rows.reserve(lambda0_list.size());
  for (double l0 : lambda0_list) {
    SweepGrid g;
    g.axes = {noise1, noise2};
    g.base = base;
    g.base.lambda0 = l0;
    g.sim = sim;
    g.analysis = an;
    g.n_trials = n_trials;
    const SweepResult res = sweep(g, threads);
    LambdaOptimumRow row;
    row.lambda0 = l0;
    row.report = find_optimum(res);
    row.min_abs_dphi = row.report.min_abs_dphi;
    const ModelParams p = res.grid.params_for(row.report.argmin_flat);
    row.optimal_sum = p.delta1 + p.delta2;
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Single-oscillator SNR curve: beta versus noise intensity with couplings
/// forced to zero. Each trial reuses one noise path for the whole grid
/// (streams are keyed by the zeroed parameter pair, so every delta sees the
/// same increments), which makes the curve smooth in delta.
struct SnrPoint {
  double delta = 0.0;
  std::optional<double> beta;  // absent when the averaged spectrum has no peak
  std::size_t n_ok = 0;
};

namespace detail {

/// Centered boxcar average with a window truncated at the edges. Used to
/// stabilize the peak-width readout on trial-averaged spectra.
inline std::vector<double> boxcar_smooth(const std::vector<double>& p, int half_width) {
  if (half_width <= 0) return p;
  const int n = static_cast<int>(p.size());
  std::vector<double> out(p.size());
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    int count = 0;
    for (int j = std::max(0, i - half_width); j <= std::min(n - 1, i + half_width); ++j) {
      sum += p[static_cast<std::size_t>(j)];
      ++count;
    }
    out[static_cast<std::size_t>(i)] = sum / static_cast<double>(count);
  }
  return out;
}

}  // namespace detail

/// beta vs noise intensity for a single (uncoupled) oscillator. A per-trial
/// Welch estimate carries too few segments for a stable peak-width readout,
/// so the spectra of all successful trials are averaged bin-wise first and
/// beta is extracted once per grid point from that averaged spectrum. The
/// raw x1 series feeds the spectrum: the phase-extraction lowpass would clip
/// the upper flank of broad peaks and bias the width at strong noise.
inline std::vector<SnrPoint> snr_curve(const std::vector<double>& deltas,
                                       const ModelParams& base, const SimConfig& sim,
                                       const AnalysisConfig& an, std::size_t n_trials,
                                       unsigned threads = 0) {
  if (deltas.empty()) throw ConfigError("snr_curve: empty delta grid");
  for (double d : deltas)
    if (!(d >= 0.0) || !std::isfinite(d))
      throw ConfigError("snr_curve: noise intensities must be non-negative");
  if (n_trials == 0) throw ConfigError("snr_curve: n_trials must be >= 1");
  sim.validate();
  an.validate();

  ModelParams p0 = base;
  p0.d1 = 0.0;
  p0.d2 = 0.0;
  p0.delta1 = 0.0;
  p0.delta2 = 0.0;
  p0.validate();
  const std::size_t n_steps = sim.step_count();

  // Per-trial spectra are kept and folded in trial-index order afterwards so
  // the result is bit-identical for every worker count.
  struct TrialSpectrum {
    std::vector<double> power;
    std::vector<double> omega;
    double domega = 0.0;
  };
  std::vector<std::vector<TrialSpectrum>> spectra(
      deltas.size(), std::vector<TrialSpectrum>(n_trials));
  detail::parallel_for(n_trials, threads, [&](std::size_t t) {
    TrialStreams streams(sim.seed, t, p0);
    const State ic = sample_initial_state(streams, sim.ic_sigma);
    const auto increments = wiener_increments(streams, n_steps);
    for (std::size_t i = 0; i < deltas.size(); ++i) {
      ModelParams p = p0;
      p.delta1 = deltas[i];
      try {
        const Trajectory tr = integrate_core(p, sim, ic, increments);
        Spectrum sp = power_spectrum(tr.x1, tr.dt, an.psd_segment);
        spectra[i][t] = TrialSpectrum{std::move(sp.power), std::move(sp.omega), sp.domega};
      } catch (const Error&) {
        // unstable run: this trial contributes nothing at this intensity
      }
    }
  });

  std::vector<SnrPoint> points(deltas.size());
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    points[i].delta = deltas[i];
    Spectrum avg;
    for (std::size_t t = 0; t < n_trials; ++t) {
      const auto& sp = spectra[i][t];
      if (sp.power.empty()) continue;
      if (avg.power.empty()) {
        avg.power.assign(sp.power.size(), 0.0);
        avg.omega = sp.omega;
        avg.domega = sp.domega;
      }
      for (std::size_t k = 0; k < sp.power.size(); ++k) avg.power[k] += sp.power[k];
      ++points[i].n_ok;
    }
    if (points[i].n_ok == 0) continue;
    for (auto& v : avg.power) v /= static_cast<double>(points[i].n_ok);
    // A 5-bin boxcar keeps the e^{-1/2} flank crossings from being dominated
    // by residual estimator noise; the curve's ordering is what matters, and
    // the smoothing bias is common to every grid point.
    avg.power = detail::boxcar_smooth(avg.power, 2);
    try {
      points[i].beta = snr_beta(avg);
    } catch (const NoPeakError&) {
      // boundary-dominated averaged spectrum: recorded as an empty value
    }
  }
  return points;
}

}  // namespace hopfsync
