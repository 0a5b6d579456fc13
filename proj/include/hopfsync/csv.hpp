#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "hopfsync/bifurcation.hpp"
#include "hopfsync/integrator.hpp"
#include "hopfsync/metrics.hpp"
#include "hopfsync/spectrum.hpp"
#include "hopfsync/sweep.hpp"

namespace hopfsync::csv {

/// Shortest representation carrying 17 significant digits, enough to
/// round-trip any double exactly.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// All writers emit a header row, comma delimiters, and LF line endings.

inline void write_trajectory(std::ostream& os, const Trajectory& tr) {
  os << "t,x1,y1,x2,y2\n";
  for (std::size_t k = 0; k < tr.size(); ++k) {
    os << format_double(tr.time(k)) << ',' << format_double(tr.x1[k]) << ','
       << format_double(tr.y1[k]) << ',' << format_double(tr.x2[k]) << ','
       << format_double(tr.y2[k]) << '\n';
  }
}

inline void write_branches(std::ostream& os, const std::vector<HopfPoint>& points,
                           BranchMode mode) {
  os << "mode,d1,d2,lambda0_HB1,lambda0_HB2\n";
  for (const HopfPoint& hp : points) {
    os << to_string(mode) << ',' << format_double(hp.d1) << ','
       << format_double(hp.d2) << ',' << format_double(hp.lambda0_hb1) << ',';
    if (hp.lambda0_hb2) os << format_double(*hp.lambda0_hb2);
    os << '\n';
  }
}

inline void write_diagram(std::ostream& os, const std::vector<DiagramRow>& rows) {
  os << "lambda0,amp1,amp2\n";
  for (const DiagramRow& r : rows) {
    os << format_double(r.lambda0) << ',';
    if (r.orbit) {
      os << format_double((*r.orbit)[0]) << ',' << format_double((*r.orbit)[1]);
    } else {
      os << ',';
    }
    os << '\n';
  }
}

inline void write_metrics(std::ostream& os, const SyncMetrics& m) {
  os << "abs_dphi,R,rho,beta\n";
  os << format_double(m.abs_dphi) << ',' << format_double(m.R) << ','
     << format_double(m.rho) << ',';
  if (m.beta) os << format_double(*m.beta);
  os << '\n';
}

inline void write_density(std::ostream& os, const Histogram& h) {
  os << "bin_center,density\n";
  for (std::size_t b = 0; b < h.centers.size(); ++b)
    os << format_double(h.centers[b]) << ',' << format_double(h.density[b]) << '\n';
}

inline void write_spectrum(std::ostream& os, const Spectrum& s) {
  os << "omega,power\n";
  for (std::size_t k = 0; k < s.omega.size(); ++k)
    os << format_double(s.omega[k]) << ',' << format_double(s.power[k]) << '\n';
}

/// Long format, one row per cell; failed cells leave the metric fields empty
/// and report n_ok=0. One-axis sweeps leave the axis2 column empty.
inline void write_sweep(std::ostream& os, const SweepResult& res) {
  os << "axis1,axis2,abs_dphi,R,rho,stderr_abs_dphi,n_ok\n";
  for (const CellResult& cell : res.cells) {
    os << format_double(cell.coords[0]) << ',';
    if (cell.coords.size() > 1) os << format_double(cell.coords[1]);
    os << ',';
    if (cell.ok) {
      os << format_double(cell.ens.mean.abs_dphi) << ','
         << format_double(cell.ens.mean.R) << ','
         << format_double(cell.ens.mean.rho) << ','
         << format_double(cell.ens.stderr_abs_dphi) << ',' << cell.ens.n_ok;
    } else {
      os << ",,,," << 0;
    }
    os << '\n';
  }
}

inline void write_snr(std::ostream& os, const std::vector<SnrPoint>& points) {
  os << "delta,beta\n";
  for (const SnrPoint& p : points) {
    os << format_double(p.delta) << ',';
    if (p.beta) os << format_double(*p.beta);
    os << '\n';
  }
}

inline void write_optimum_map(std::ostream& os,
                              const std::vector<OptimumMapRow>& rows) {
  os << "d1,d2,min_abs_dphi,delta1_opt,delta2_opt,noise_ratio\n";
  for (const OptimumMapRow& r : rows) {
    os << format_double(r.d1) << ',' << format_double(r.d2) << ',';
    if (r.ok) {
      os << format_double(r.report.min_abs_dphi) << ','
         << format_double(r.report.argmin[0]) << ','
         << format_double(r.report.argmin[1]) << ','
         << format_double(r.report.optimal_noise_ratio);
    } else {
      os << ",,,";
    }
    os << '\n';
  }
}

inline void write_lambda_optima(std::ostream& os,
                                const std::vector<LambdaOptimumRow>& rows) {
  os << "lambda0,min_abs_dphi,optimal_sum\n";
  for (const LambdaOptimumRow& r : rows)
    os << format_double(r.lambda0) << ',' << format_double(r.min_abs_dphi) << ','
       << format_double(r.optimal_sum) << '\n';
}

}  // namespace hopfsync::csv
