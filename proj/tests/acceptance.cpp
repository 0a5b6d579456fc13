// Acceptance gate: exercises the end-to-end claims the library is built
// around, one criterion per line. Each criterion prints [PASS] or [FAIL]
// (with the reasons) and its wall time; the process exit code is the number
// of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hopfsync/hopfsync.hpp"

using namespace hopfsync;

namespace {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform(double lo, double hi) {
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

 private:
  std::mt19937_64 engine_;
};

struct Check {
  std::vector<std::string> failures;

  void require(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }

  template <typename... Args>
  void requiref(bool ok, const char* fmt, Args... args) {
    if (ok) return;
    char buf[256];
    std::snprintf(buf, sizeof(buf), fmt, args...);
    failures.emplace_back(buf);
  }
};

int g_failed = 0;

void run_criterion(int index, const char* label, double limit_seconds,
                   const std::function<void(Check&)>& fn) {
  Check c;
  const auto start = std::chrono::steady_clock::now();
  try {
    fn(c);
  } catch (const std::exception& e) {
    c.failures.push_back(std::string("unexpected exception: ") + e.what());
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  c.requiref(elapsed <= limit_seconds, "runtime %.1f s exceeds the %.0f s limit",
             elapsed, limit_seconds);

  if (c.failures.empty()) {
    std::printf("[PASS] %d. %s (%.1f s)\n", index, label, elapsed);
  } else {
    ++g_failed;
    std::string joined;
    for (std::size_t i = 0; i < c.failures.size(); ++i) {
      if (i) joined += "; ";
      joined += c.failures[i];
    }
    std::printf("[FAIL] %d. %s: %s (%.1f s)\n", index, label, joined.c_str(),
                elapsed);
  }
  std::fflush(stdout);
}

// Amplitude at which the quartic gain balances lambda0 = 0.2:
// the positive root of 0.2 - 0.2 r^2 - 0.2 r^4 = 0.
constexpr double kAmplitudeAtPoint2 = 0.78615137775742328;

// ---------------------------------------------------------------------------

void criterion_hopf_points(Check& c) {
  Rng rng(0);
  for (int rep = 0; rep < 100; ++rep) {
    ModelParams p;
    p.d1 = rng.uniform(0.0, 0.3);
    p.d2 = rng.uniform(0.0, 0.3);
    const auto pts = find_hopf_points(p, -0.5, 1.5);
    c.requiref(pts.size() == 2, "expected two bifurcation points for d1=%g d2=%g",
               p.d1, p.d2);
    if (pts.size() != 2) return;
    c.requiref(std::abs(pts[0]) <= 1e-9, "first point %g is not 0", pts[0]);
    c.requiref(std::abs(pts[1] - (p.d1 + p.d2)) <= 1e-9,
               "second point %g differs from d1+d2=%g", pts[1], p.d1 + p.d2);
  }

  ModelParams p;
  p.d1 = 0.05;
  p.d2 = 0.05;
  const auto pts = find_hopf_points(p, -0.5, 1.5);
  c.require(pts.size() == 2 && std::abs(pts.back() - 0.1) <= 1e-9,
            "equal couplings 0.05 must put the second point at 0.1");
}

void criterion_limit_cycle(Check& c) {
  const ModelParams p;  // uncoupled, noiseless defaults
  const auto amp = stable_orbit_amplitude(p, 0.2);
  c.require(amp.has_value(), "no stable orbit found above the bifurcation");
  if (amp) {
    for (double a : *amp)
      c.requiref(std::abs(a - kAmplitudeAtPoint2) <= 0.01 * kAmplitudeAtPoint2,
                 "orbit amplitude %.6f is outside 1%% of %.5f", a,
                 kAmplitudeAtPoint2);
  }

  SimConfig cfg;  // lambda0 = -0.5: the deterministic trajectory must die out
  const Trajectory tr = integrate(p, cfg, 0);
  double worst = 0.0;
  for (std::size_t k = 0; k < tr.size(); ++k) {
    if (tr.time(k) < 90.0) continue;
    worst = std::max({worst, std::abs(tr.x1[k]), std::abs(tr.y1[k]),
                      std::abs(tr.x2[k]), std::abs(tr.y2[k])});
  }
  c.requiref(worst < 1e-6, "damped trajectory still at %g past t=90", worst);
}

void criterion_snr_curve(Check& c) {
  const auto deltas = logspace(0.01, 5.0, 15);
  ModelParams base;
  base.lambda0 = -0.5;
  SimConfig sim;
  sim.seed = 12345;
  const AnalysisConfig an;
  const auto pts = snr_curve(deltas, base, sim, an, 20, 0);

  std::vector<double> beta;
  for (const auto& pt : pts) {
    c.requiref(pt.beta.has_value(), "no spectral peak at delta=%g", pt.delta);
    beta.push_back(pt.beta.value_or(0.0));
  }
  if (beta.size() != deltas.size()) return;

  std::size_t imax = 0;
  for (std::size_t k = 1; k < beta.size(); ++k)
    if (beta[k] > beta[imax]) imax = k;
  c.requiref(deltas[imax] >= 0.5 && deltas[imax] <= 2.0,
             "peak at delta=%g is outside [0.5, 2]", deltas[imax]);
  for (std::size_t k = 0; k < imax; ++k)
    c.requiref(beta[k] < beta[k + 1],
               "curve not rising before the peak at delta=%g", deltas[k + 1]);
  for (std::size_t k = imax; k + 1 < beta.size(); ++k)
    c.requiref(beta[k] > beta[k + 1],
               "curve not falling after the peak at delta=%g", deltas[k + 1]);
  c.requiref(beta.front() < 0.2 * beta[imax],
             "weak-noise beta %.3f is not below 20%% of the peak %.3f",
             beta.front(), beta[imax]);
}

ModelParams resonance_params() {
  ModelParams p;
  p.lambda0 = -0.5;
  p.d1 = 0.3;
  p.d2 = 0.01;
  p.delta1 = 0.05;
  return p;
}

std::optional<double> g_optimal_delta2;

void criterion_coherence_resonance(Check& c) {
  SweepGrid g;
  g.axes = {make_axis(ParamId::delta2, 0.01, 5.0, 15, Spacing::log)};
  g.base = resonance_params();
  g.sim = SimConfig{};
  g.n_trials = 50;
  const SweepResult res = sweep(g, 0);

  std::vector<double> abs_dphi, coherence;
  for (const auto& cell : res.cells) {
    c.require(cell.ok, "sweep cell failed: " + cell.error);
    if (!cell.ok) return;
    abs_dphi.push_back(cell.ens.mean.abs_dphi);
    coherence.push_back(cell.ens.mean.R);
  }

  std::size_t imin = 0, imaxR = 0;
  for (std::size_t k = 1; k < abs_dphi.size(); ++k) {
    if (abs_dphi[k] < abs_dphi[imin]) imin = k;
    if (coherence[k] > coherence[imaxR]) imaxR = k;
  }
  const double dip = abs_dphi[imin];
  c.requiref(dip <= 0.75 * abs_dphi.front() && dip <= 0.75 * abs_dphi.back(),
             "dip %.3f is not 25%% below the endpoints %.3f / %.3f", dip,
             abs_dphi.front(), abs_dphi.back());
  const double at = g.axes[0].values[imin];
  c.requiref(at >= 0.3 && at <= 2.0, "dip at delta2=%g is outside [0.3, 2]", at);
  c.requiref((imaxR > imin ? imaxR - imin : imin - imaxR) <= 1,
             "coherence peak (index %zu) is not within one step of the dip "
             "(index %zu)",
             imaxR, imin);
  if (c.failures.empty()) g_optimal_delta2 = at;
}

void criterion_density_narrowing(Check& c) {
  const double optimum = g_optimal_delta2.value_or(0.95);
  const double levels[3] = {0.05, optimum, 3.0};
  const SimConfig sim;
  const AnalysisConfig an;

  double mode[3], spread[3];
  for (int i = 0; i < 3; ++i) {
    ModelParams p = resonance_params();
    p.delta2 = levels[i];

    Histogram avg;
    for (std::uint64_t t = 0; t < 10; ++t) {
      const TrialAnalysis ta = run_trial_analysis(p, sim, an, t);
      if (avg.centers.empty()) {
        avg = ta.density;
      } else {
        for (std::size_t b = 0; b < avg.density.size(); ++b)
          avg.density[b] += ta.density.density[b];
      }
    }
    for (double& v : avg.density) v /= 10.0;

    std::size_t bmax = 0;
    for (std::size_t b = 1; b < avg.density.size(); ++b)
      if (avg.density[b] > avg.density[bmax]) bmax = b;
    mode[i] = avg.centers[bmax];
    spread[i] = circular_stats_from(avg).std;
  }

  c.requiref(std::abs(mode[1]) < std::abs(mode[0]),
             "mode %.3f at the optimum is not closer to 0 than %.3f at weak "
             "noise",
             mode[1], mode[0]);
  c.requiref(std::abs(mode[1]) < std::abs(mode[2]),
             "mode %.3f at the optimum is not closer to 0 than %.3f at strong "
             "noise",
             mode[1], mode[2]);
  c.requiref(spread[1] < spread[0],
             "circular std %.3f at the optimum is not below %.3f at weak noise",
             spread[1], spread[0]);
  c.requiref(spread[1] < spread[2],
             "circular std %.3f at the optimum is not below %.3f at strong noise",
             spread[1], spread[2]);
}

void criterion_excitability_ordering(Check& c) {
  std::vector<double> grid = logspace(0.01, 5.0, 15);
  grid.insert(std::lower_bound(grid.begin(), grid.end(), 0.1), 0.1);

  const double lambdas[3] = {-0.03, -0.5, -1.0};
  double at_weak[3], minimum[3];
  for (int i = 0; i < 3; ++i) {
    SweepGrid g;
    Axis a;
    a.id = ParamId::delta2;
    a.spacing = Spacing::log;
    a.values = grid;
    g.axes = {a};
    g.base = resonance_params();
    g.base.delta1 = 0.1;
    g.base.lambda0 = lambdas[i];
    g.sim = SimConfig{};
    g.n_trials = 30;
    const SweepResult res = sweep(g, 0);

    at_weak[i] = -1.0;
    minimum[i] = 1e300;
    for (const auto& cell : res.cells) {
      c.require(cell.ok, "sweep cell failed: " + cell.error);
      if (!cell.ok) return;
      if (cell.coords[0] == 0.1) at_weak[i] = cell.ens.mean.abs_dphi;
      minimum[i] = std::min(minimum[i], cell.ens.mean.abs_dphi);
    }
    c.require(at_weak[i] >= 0.0, "grid point delta2=0.1 missing");
  }

  c.requiref(at_weak[0] < at_weak[1] && at_weak[1] < at_weak[2],
             "weak-noise ordering violated: %.3f, %.3f, %.3f (expected "
             "increasing away from the bifurcation)",
             at_weak[0], at_weak[1], at_weak[2]);
  c.requiref(minimum[0] < minimum[2],
             "minimum %.3f near the bifurcation is not below %.3f far from it",
             minimum[0], minimum[2]);
}

void criterion_ratio_inversion(Check& c) {
  const std::vector<double> couplings = {0.01, 0.08, 0.155, 0.23, 0.3};
  const Axis n1 = make_axis(ParamId::delta1, 0.01, 0.3, 9, Spacing::log);
  const Axis n2 = make_axis(ParamId::delta2, 0.01, 0.3, 9, Spacing::log);
  ModelParams base;
  base.lambda0 = -0.5;
  const SimConfig sim;
  const AnalysisConfig an;

  const auto rows =
      optimum_map(couplings, couplings, n1, n2, base, sim, an, 30, 0);
  int violations = 0;
  for (const auto& row : rows) {
    c.require(row.ok, "coupling cell failed: " + row.error);
    if (!row.ok) return;
    const double ratio = row.report.optimal_noise_ratio;
    if (row.d1 > row.d2 && ratio >= 1.0) ++violations;
    if (row.d1 < row.d2 && ratio <= 1.0) ++violations;
    c.requiref(row.report.argmin[0] != row.report.argmin[1],
               "argmin at d1=%g d2=%g sits on the delta1=delta2 diagonal",
               row.d1, row.d2);
  }
  c.requiref(violations <= 2, "%d of 20 off-diagonal cells violate the ratio "
             "inversion (allowed: 2)",
             violations);
}

void criterion_property_suite(Check& c) {
  Rng rng(1);

  // Metric bounds on random phase pairs.
  for (int rep = 0; rep < 1000; ++rep) {
    std::vector<double> dphi(64);
    for (double& v : dphi)
      v = wrap_difference(rng.uniform(0.0, 2.0 * M_PI) -
                          rng.uniform(0.0, 2.0 * M_PI));
    const double a = abs_crp_difference(dphi);
    const double r = mean_phase_coherence(dphi);
    const double rho = sync_index(dphi, 16);
    c.require(a >= 0.0 && a <= M_PI, "mean absolute difference out of [0, pi]");
    c.require(r >= 0.0 && r <= 1.0, "coherence out of [0, 1]");
    c.require(rho >= 0.0 && rho <= 1.0, "entropy index out of [0, 1]");
    if (!c.failures.empty()) return;
  }

  auto random_params = [&rng]() {
    ModelParams p;
    p.lambda0 = rng.uniform(-1.0, 1.0);
    p.alpha = rng.uniform(-0.5, -0.01);
    p.gamma = rng.uniform(-0.5, -0.01);
    p.omega0 = rng.uniform(0.5, 3.0);
    p.omega1 = rng.uniform(-0.5, 0.5);
    p.d1 = rng.uniform(0.0, 0.4);
    p.d2 = rng.uniform(0.0, 0.4);
    p.delta1 = rng.uniform(0.0, 1.0);
    p.delta2 = rng.uniform(0.0, 1.0);
    return p;
  };

  // Origin Jacobian against central finite differences of the drift.
  for (int rep = 0; rep < 100; ++rep) {
    const ModelParams p = random_params();
    const Mat4 jac = jacobian_origin(p);
    const double h = 1e-5;
    for (std::size_t col = 0; col < 4; ++col) {
      double plus[4] = {0, 0, 0, 0}, minus[4] = {0, 0, 0, 0};
      plus[col] = h;
      minus[col] = -h;
      const Vec4 fp = drift(State{plus[0], plus[1], plus[2], plus[3]}, p);
      const Vec4 fm = drift(State{minus[0], minus[1], minus[2], minus[3]}, p);
      for (std::size_t row = 0; row < 4; ++row) {
        const double fd = (fp[row] - fm[row]) / (2.0 * h);
        c.requiref(std::abs(fd - jac[row][col]) < 1e-6,
                   "Jacobian entry (%zu,%zu) disagrees with finite differences",
                   row, col);
      }
    }
    if (!c.failures.empty()) return;
  }

  // Generic eigensolver against the closed-form spectrum.
  for (int rep = 0; rep < 100; ++rep) {
    const ModelParams p = random_params();
    const auto numeric = origin_eigenvalues(p);
    const auto exact = origin_eigenvalues_closed_form(p);
    for (std::size_t i = 0; i < 4; ++i)
      c.require(std::abs(numeric[i] - exact[i]) < 1e-9,
                "eigenvalue routes disagree beyond 1e-9");
    if (!c.failures.empty()) return;
  }

  // Exchange symmetry of the drift field (bit-exact).
  for (int rep = 0; rep < 200; ++rep) {
    const ModelParams p = random_params();
    const State s{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1),
                  rng.uniform(-1, 1)};
    const Vec4 f = drift(s, p);
    const Vec4 g = drift(State{s.x2, s.y2, s.x1, s.y1}, p.swapped());
    c.require(f[0] == g[2] && f[1] == g[3] && f[2] == g[0] && f[3] == g[1],
              "drift is not exchange-symmetric bit-for-bit");
    if (!c.failures.empty()) return;
  }

  // Exchange symmetry of full stochastic trajectories (bit-exact).
  {
    ModelParams p;
    p.lambda0 = -0.5;
    p.d1 = 0.3;
    p.d2 = 0.01;
    p.delta1 = 0.05;
    p.delta2 = 0.7;
    SimConfig cfg;
    cfg.t_end = 30.0;
    cfg.t_burn = 5.0;
    const Trajectory fwd = integrate(p, cfg, 5);
    const Trajectory swp = integrate(p.swapped(), cfg, 5);
    bool same = fwd.size() == swp.size();
    for (std::size_t k = 0; same && k < fwd.size(); ++k)
      same = fwd.x1[k] == swp.x2[k] && fwd.y1[k] == swp.y2[k] &&
             fwd.x2[k] == swp.x1[k] && fwd.y2[k] == swp.y1[k];
    c.require(same, "relabeled trajectory is not the mirror of the original");
  }

  // Exchange symmetry of a small noise heat map (bit-exact mirrored cells).
  {
    SweepGrid g;
    g.axes = {make_axis(ParamId::delta1, 0.2, 0.7, 2, Spacing::linear),
              make_axis(ParamId::delta2, 0.2, 0.7, 2, Spacing::linear)};
    g.base.lambda0 = -0.5;
    g.base.d1 = 0.1;
    g.base.d2 = 0.1;
    g.sim.t_end = 30.0;
    g.sim.t_burn = 5.0;
    g.n_trials = 2;
    const SweepResult res = sweep(g, 0);
    bool ok = res.cells.size() == 4;
    for (const auto& cell : res.cells) ok = ok && cell.ok;
    c.require(ok, "heat-map cells failed");
    if (ok) {
      c.require(res.cells[1].ens.mean.abs_dphi == res.cells[2].ens.mean.abs_dphi &&
                    res.cells[1].ens.mean.R == res.cells[2].ens.mean.R &&
                    res.cells[1].ens.mean.rho == res.cells[2].ens.mean.rho,
                "mirrored heat-map cells differ");
    }
  }

  // Determinism under thread-count variation.
  {
    ModelParams p;
    p.lambda0 = -0.5;
    p.d1 = 0.1;
    p.d2 = 0.1;
    p.delta1 = 0.3;
    p.delta2 = 0.3;
    SimConfig cfg;
    cfg.t_end = 30.0;
    cfg.t_burn = 5.0;
    const AnalysisConfig an;
    const auto e1 = ensemble_average(p, cfg, an, 8, 1);
    const auto e3 = ensemble_average(p, cfg, an, 8, 3);
    c.require(e1.mean.abs_dphi == e3.mean.abs_dphi &&
                  e1.mean.R == e3.mean.R && e1.mean.rho == e3.mean.rho &&
                  e1.stderr_abs_dphi == e3.stderr_abs_dphi,
              "ensemble average depends on the worker count");

    const auto s1 = snr_curve({0.5, 1.0}, p, cfg, an, 2, 1);
    const auto s2 = snr_curve({0.5, 1.0}, p, cfg, an, 2, 2);
    bool same = s1.size() == s2.size();
    for (std::size_t i = 0; same && i < s1.size(); ++i)
      same = s1[i].beta.has_value() == s2[i].beta.has_value() &&
             (!s1[i].beta || *s1[i].beta == *s2[i].beta);
    c.require(same, "snr curve depends on the worker count");
  }

  // Wiener-increment moments.
  {
    ModelParams p;
    p.delta1 = 0.4;
    p.delta2 = 0.9;
    TrialStreams streams(0, 0, p);
    const std::size_t n = 1000000;
    const auto inc = wiener_increments(streams, n);
    double m1 = 0.0, m2 = 0.0, v1 = 0.0, v2 = 0.0, cross = 0.0;
    for (const auto& w : inc) {
      m1 += w.eta1;
      m2 += w.eta2;
    }
    m1 /= static_cast<double>(n);
    m2 /= static_cast<double>(n);
    for (const auto& w : inc) {
      v1 += (w.eta1 - m1) * (w.eta1 - m1);
      v2 += (w.eta2 - m2) * (w.eta2 - m2);
      cross += (w.eta1 - m1) * (w.eta2 - m2);
    }
    v1 /= static_cast<double>(n);
    v2 /= static_cast<double>(n);
    cross /= static_cast<double>(n);
    c.requiref(std::abs(m1) < 0.005 && std::abs(m2) < 0.005,
               "increment means %.4f / %.4f are not near 0", m1, m2);
    c.requiref(std::abs(v1 - 1.0) < 0.01 && std::abs(v2 - 1.0) < 0.01,
               "increment variances %.4f / %.4f are not near 1", v1, v2);
    c.requiref(std::abs(cross) < 0.005,
               "streams are correlated: %.4f", cross);
  }
}

}  // namespace

int main() {
  std::printf("acceptance suite (library %s)\n", kVersion);
  run_criterion(1, "bifurcation-point locations", 1.0, criterion_hopf_points);
  run_criterion(2, "limit-cycle amplitude and decay", 5.0, criterion_limit_cycle);
  run_criterion(3, "snr curve unimodality", 120.0, criterion_snr_curve);
  run_criterion(4, "coherence-resonance dip", 300.0, criterion_coherence_resonance);
  run_criterion(5, "density narrowing at the optimum", 300.0,
                criterion_density_narrowing);
  run_criterion(6, "excitability ordering", 600.0, criterion_excitability_ordering);
  run_criterion(7, "optimal noise-ratio inversion", 1800.0,
                criterion_ratio_inversion);
  run_criterion(8, "property suite", 120.0, criterion_property_suite);

  if (g_failed == 0) {
    std::printf("acceptance: all 8 criteria passed\n");
  } else {
    std::printf("acceptance: %d of 8 criteria FAILED\n", g_failed);
  }
  return g_failed;
}
