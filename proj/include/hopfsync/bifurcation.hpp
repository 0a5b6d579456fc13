#pragma once

#include <algorithm>
#include <array>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hopfsync/errors.hpp"
#include "hopfsync/integrator.hpp"
#include "hopfsync/model.hpp"

namespace hopfsync {

/// Eigenvalues of the origin Jacobian, sorted by real part descending and
/// imaginary part ascending within equal real parts. Computed with a generic
/// dense eigensolver; the closed form below serves as the second route.
inline std::array<std::complex<double>, 4> origin_eigenvalues(const ModelParams& p) {
  const Mat4 j = jacobian_origin(p);
  Eigen::Matrix4d m;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) m(r, c) = j[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  Eigen::EigenSolver<Eigen::Matrix4d> solver(m, /*computeEigenvectors=*/false);
  std::array<std::complex<double>, 4> ev;
  for (int i = 0; i < 4; ++i) ev[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
  std::sort(ev.begin(), ev.end(), [](const auto& a, const auto& b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() < b.imag();
  });
  return ev;
}

/// Exact origin spectrum: {lambda0 +- i*omega0, (lambda0 - d1 - d2) +- i*omega0}.
/// Follows from rewriting the linearized pair as one complex 2x2 system whose
/// coupling matrix has eigenvalues 0 and -(d1 + d2).
inline std::array<std::complex<double>, 4> origin_eigenvalues_closed_form(
    const ModelParams& p) {
  const std::complex<double> base(p.lambda0, p.omega0);
  const std::complex<double> shifted(p.lambda0 - p.d1 - p.d2, p.omega0);
  std::array<std::complex<double>, 4> ev{base, std::conj(base), shifted,
                                         std::conj(shifted)};
  std::sort(ev.begin(), ev.end(), [](const auto& a, const auto& b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() < b.imag();
  });
  return ev;
}

namespace detail {

// Bisection for a sign change of f on [lo, hi]; f must be monotone here.
template <typename F>
double bisect(F f, double lo, double hi, double tol) {
  double flo = f(lo);
  if (flo == 0.0) return lo;
  double fhi = f(hi);
  if (fhi == 0.0) return hi;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((flo < 0.0) != (fm < 0.0)) {
      hi = mid;
      fhi = fm;
    } else {
      lo = mid;
      flo = fm;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// Locates every lambda0 in [lo, hi] where an eigenvalue pair's real part
/// crosses zero, by bisection on the analytic real parts lambda0 and
/// lambda0 - (d1 + d2). Crossings closer than 1e-6 are reported once.
/// Throws EmptyRangeError when the range brackets no crossing.
inline std::vector<double> find_hopf_points(const ModelParams& p, double lo,
                                            double hi, double tol = 1e-12) {
  if (!(lo < hi)) throw ConfigError("find_hopf_points: empty interval");
  const double sum = p.d1 + p.d2;
  std::vector<double> points;
  auto first = [](double l0) { return l0; };
  auto second = [sum](double l0) { return l0 - sum; };
  if (first(lo) <= 0.0 && first(hi) >= 0.0)
    points.push_back(detail::bisect(first, lo, hi, tol));
  if (sum >= 1e-6 && second(lo) <= 0.0 && second(hi) >= 0.0)
    points.push_back(detail::bisect(second, lo, hi, tol));
  if (points.empty())
    throw EmptyRangeError("no Hopf point in [" + std::to_string(lo) + ", " +
                          std::to_string(hi) + "]");
  std::sort(points.begin(), points.end());
  return points;
}

enum class BranchMode { symmetric, vary_d1, vary_d2 };

inline const char* to_string(BranchMode m) {
  switch (m) {
    case BranchMode::symmetric: return "symmetric";
    case BranchMode::vary_d1: return "vary-d1";
    case BranchMode::vary_d2: return "vary-d2";
  }
  return "?";
}

struct HopfPoint {
  double d1;
  double d2;
  double lambda0_hb1;
  std::optional<double> lambda0_hb2;  // absent when the couplings vanish
};

/// Two-parameter Hopf branches: for each coupling value on the grid, the
/// lambda0 of both Hopf points. Modes: symmetric (d1 = d2 = d), vary_d1
/// (d2 fixed), vary_d2 (d1 fixed).
inline std::vector<HopfPoint> two_parameter_branches(const ModelParams& base,
                                                     BranchMode mode,
                                                     const std::vector<double>& grid,
                                                     double fixed = 0.05) {
  if (grid.empty()) throw ConfigError("two_parameter_branches: empty grid");
  std::vector<HopfPoint> out;
  out.reserve(grid.size());
  for (double d : grid) {
    ModelParams p = base;
    switch (mode) {
      case BranchMode::symmetric: p.d1 = d; p.d2 = d; break;
      case BranchMode::vary_d1: p.d1 = d; p.d2 = fixed; break;
      case BranchMode::vary_d2: p.d2 = d; p.d1 = fixed; break;
    }
    p.validate();
    const double margin = 1.0 + p.d1 + p.d2;
    const auto points = find_hopf_points(p, -margin, margin);
    HopfPoint hp{p.d1, p.d2, points.front(), std::nullopt};
    if (points.size() > 1) hp.lambda0_hb2 = points.back();
    out.push_back(hp);
  }
  return out;
}

/// Settings for the forward-integration orbit-amplitude search. The decay
/// criterion is a relative amplitude change per rotation period below tol,
/// with a hard cap on integration time; convergence near a Hopf point is
/// slow, so the cap is generous.
struct OrbitSearch {
  double dt = 0.01;
  double tol = 1e-6;
  double t_max = 1e4;
  double origin_amplitude = 1e-7;
};

namespace detail {

/// Classical fourth-order Runge-Kutta step of the deterministic drift. The
/// orbit search needs a stepper whose amplitude error stays far below the
/// settling tolerance: a first-order step inflates the radius of a neutral
/// rotation by omega^2*dt/2 per unit time, which right at a Hopf point
/// manufactures a bogus small-amplitude cycle where the damping is only
/// cubic. The fourth-order rotation factor is contracting, so a decaying
/// spiral stays decaying.
inline void rk4_step(State& s, const ModelParams& p, double dt) {
  const auto eval = [&p](const State& q) { return drift(q, p); };
  const auto advance = [](const State& q, const Vec4& k, double h) {
    return State{q.x1 + h * k[0], q.y1 + h * k[1], q.x2 + h * k[2], q.y2 + h * k[3]};
  };
  const Vec4 k1 = eval(s);
  const Vec4 k2 = eval(advance(s, k1, 0.5 * dt));
  const Vec4 k3 = eval(advance(s, k2, 0.5 * dt));
  const Vec4 k4 = eval(advance(s, k3, dt));
  s.x1 += dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
  s.y1 += dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
  s.x2 += dt / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]);
  s.y2 += dt / 6.0 * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3]);
}

}  // namespace detail

/// Steady-state amplitudes (max r_1, max r_2 over the final period) of the
/// stable orbit reached from a small perturbation, or nullopt when the
/// trajectory converges to the origin. Deterministic regime only.
inline std::optional<std::array<double, 2>> stable_orbit_amplitude(
    const ModelParams& p, double lambda0, const OrbitSearch& search = {}) {
  ModelParams q = p;
  q.lambda0 = lambda0;
  q.delta1 = 0.0;
  q.delta2 = 0.0;
  q.validate();

  const double period = 2.0 * M_PI / q.omega0;
  const auto steps_per_period =
      static_cast<std::size_t>(std::llround(period / search.dt));
  const double dt = period / static_cast<double>(steps_per_period);

  // Slightly asymmetric start so convergence to the synchronous orbit is a
  // property of the dynamics, not of the initial condition.
  State s{0.010, 0.0, 0.012, 0.0};
  double prev_max1 = 0.0, prev_max2 = 0.0;
  double first_max1 = -1.0, first_max2 = -1.0;
  double t = 0.0;
  while (t < search.t_max) {
    double max1 = 0.0, max2 = 0.0;
    for (std::size_t k = 0; k < steps_per_period; ++k) {
      detail::rk4_step(s, q, dt);
      max1 = std::max(max1, std::hypot(s.x1, s.y1));
      max2 = std::max(max2, std::hypot(s.x2, s.y2));
      if (!std::isfinite(max1) || !std::isfinite(max2) || max1 > 1e6 || max2 > 1e6)
        throw BlowupError("orbit search diverged at lambda0=" + std::to_string(lambda0));
    }
    t += period;
    if (first_max1 < 0.0) {
      first_max1 = max1;
      first_max2 = max2;
    }
    if (max1 < search.origin_amplitude && max2 < search.origin_amplitude)
      return std::nullopt;
    const bool settled1 = std::abs(max1 - prev_max1) < search.tol * std::max(max1, 1e-300);
    const bool settled2 = std::abs(max2 - prev_max2) < search.tol * std::max(max2, 1e-300);
    if (settled1 && settled2 && t > 2.0 * period) {
      if (max1 < 1e-4 && max2 < 1e-4) return std::nullopt;
      return std::array<double, 2>{max1, max2};
    }
    prev_max1 = max1;
    prev_max2 = max2;
  }
  // Cap reached without settling. Right at the bifurcation the relaxation is
  // algebraic, so distinguish a (slowly) collapsing spiral from a (slowly)
  // growing one by net amplitude change since the first period.
  if (prev_max1 + prev_max2 < first_max1 + first_max2) return std::nullopt;
  if (prev_max1 < 1e-4 && prev_max2 < 1e-4) return std::nullopt;
  return std::array<double, 2>{prev_max1, prev_max2};
}

struct DiagramRow {
  double lambda0;
  double fixed_point_amplitude;  // always 0; stable only below HB1
  bool fixed_point_stable;
  std::optional<std::array<double, 2>> orbit;
};

/// One-parameter diagram of the stable structures over a lambda0 grid.
inline std::vector<DiagramRow> branch_diagram(const ModelParams& p,
                                              const std::vector<double>& lambda0_grid,
                                              const OrbitSearch& search = {}) {
  if (lambda0_grid.empty()) throw ConfigError("branch_diagram: empty grid");
  std::vector<DiagramRow> rows;
  rows.reserve(lambda0_grid.size());
  for (double l0 : lambda0_grid) {
    DiagramRow row{l0, 0.0, l0 < 0.0, std::nullopt};
    row.orbit = stable_orbit_amplitude(p, l0, search);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace hopfsync
