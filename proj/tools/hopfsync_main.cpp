#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hopfsync/hopfsync.hpp"

namespace fs = std::filesystem;
using namespace hopfsync;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Overrides {
  std::optional<std::string> config_path;
  std::optional<double> lambda0, alpha, gamma, omega0, omega1;
  std::optional<double> d1, d2, delta1, delta2;
  std::optional<double> dt, t_end, t_burn, ic_sigma, blowup_bound;
  std::optional<std::uint64_t> seed;
  std::optional<double> filter_cutoff;
  std::optional<std::size_t> bins, psd_segment;
  std::optional<unsigned> threads;
  std::optional<std::string> out_dir, prefix;
  bool dry_run = false;
};

void add_common_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config_path, "JSON config file");
  cmd->add_option("--model.lambda0,--lambda0", o.lambda0, "bifurcation parameter");
  cmd->add_option("--model.alpha,--alpha", o.alpha, "r^2 gain coefficient");
  cmd->add_option("--model.gamma,--gamma", o.gamma, "r^4 gain coefficient");
  cmd->add_option("--model.omega0,--omega0", o.omega0, "base angular frequency");
  cmd->add_option("--model.omega1,--omega1", o.omega1, "amplitude-frequency coupling");
  cmd->add_option("--model.d1,--d1", o.d1, "coupling into oscillator 1");
  cmd->add_option("--model.d2,--d2", o.d2, "coupling into oscillator 2");
  cmd->add_option("--model.delta1,--delta1", o.delta1, "noise intensity on x1");
  cmd->add_option("--model.delta2,--delta2", o.delta2, "noise intensity on x2");
  cmd->add_option("--sim.dt,--dt", o.dt, "integration step");
  cmd->add_option("--sim.t_end,--t-end", o.t_end, "final time");
  cmd->add_option("--sim.t_burn,--t-burn", o.t_burn, "transient cutoff");
  cmd->add_option("--sim.seed,--seed", o.seed, "master seed");
  cmd->add_option("--sim.ic_sigma,--ic-sigma", o.ic_sigma, "initial-condition sigma");
  cmd->add_option("--sim.blowup_bound", o.blowup_bound, "blow-up guard bound");
  cmd->add_option("--analysis.filter_cutoff,--filter-cutoff", o.filter_cutoff,
                  "low-pass cutoff, rad/time (default 4*omega0)");
  cmd->add_option("--analysis.bins,--bins", o.bins, "phase-difference histogram bins");
  cmd->add_option("--analysis.psd_segment", o.psd_segment, "PSD segment length");
  cmd->add_option("--threads", o.threads,
                  "worker threads (default HOPFSYNC_THREADS, then hardware)");
  cmd->add_option("--output.dir,--out-dir", o.out_dir, "output directory");
  cmd->add_option("--output.prefix,--prefix", o.prefix, "output file prefix");
  cmd->add_flag("--dry-run", o.dry_run, "print planned work and exit");
}

// Flag values take precedence over config-file values.
RunConfig build_config(const Overrides& o) {
  RunConfig cfg;
  if (o.config_path) cfg = load_config(*o.config_path);
  if (o.lambda0) cfg.model.lambda0 = *o.lambda0;
  if (o.alpha) cfg.model.alpha = *o.alpha;
  if (o.gamma) cfg.model.gamma = *o.gamma;
  if (o.omega0) cfg.model.omega0 = *o.omega0;
  if (o.omega1) cfg.model.omega1 = *o.omega1;
  if (o.d1) cfg.model.d1 = *o.d1;
  if (o.d2) cfg.model.d2 = *o.d2;
  if (o.delta1) cfg.model.delta1 = *o.delta1;
  if (o.delta2) cfg.model.delta2 = *o.delta2;
  if (o.dt) cfg.sim.dt = *o.dt;
  if (o.t_end) cfg.sim.t_end = *o.t_end;
  if (o.t_burn) cfg.sim.t_burn = *o.t_burn;
  if (o.seed) cfg.sim.seed = *o.seed;
  if (o.ic_sigma) cfg.sim.ic_sigma = *o.ic_sigma;
  if (o.blowup_bound) cfg.sim.blowup_bound = *o.blowup_bound;
  if (o.filter_cutoff) cfg.analysis.filter_cutoff = *o.filter_cutoff;
  if (o.bins) cfg.analysis.bins = *o.bins;
  if (o.psd_segment) cfg.analysis.psd_segment = *o.psd_segment;
  if (o.out_dir) cfg.output.dir = *o.out_dir;
  if (o.prefix) cfg.output.prefix = *o.prefix;
  cfg.model.validate();
  cfg.sim.validate();
  cfg.analysis.validate();
  return cfg;
}

unsigned resolve_thread_request(const Overrides& o) {
  if (o.threads) return *o.threads;
  if (const char* env = std::getenv("HOPFSYNC_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return 0;  // auto: hardware concurrency
}

fs::path out_path(const RunConfig& cfg, const std::string& suffix) {
  fs::create_directories(cfg.output.dir);
  return fs::path(cfg.output.dir) / (cfg.output.prefix + "_" + suffix);
}

void write_file(const fs::path& p,
                const std::function<void(std::ostream&)>& writer) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw ConfigError("cannot write '" + p.string() + "'");
  writer(os);
  if (!os) throw Error("write failed for '" + p.string() + "'");
  std::cout << "wrote " << p.string() << "\n";
}

void write_metadata(const RunConfig& cfg, const std::string& command,
                    nlohmann::json extra = {}) {
  nlohmann::json j = metadata_json(command, cfg);
  for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  write_file(out_path(cfg, "meta.json"),
             [&](std::ostream& os) { os << j.dump(2) << "\n"; });
}

std::pair<double, double> parse_range(const std::string& s) {
  const auto pos = s.find(':');
  if (pos == std::string::npos || pos == 0 || pos + 1 == s.size())
    throw ConfigError("range must look like lo:hi, got '" + s + "'");
  std::size_t done1 = 0, done2 = 0;
  const std::string lo_s = s.substr(0, pos), hi_s = s.substr(pos + 1);
  double lo, hi;
  try {
    lo = std::stod(lo_s, &done1);
    hi = std::stod(hi_s, &done2);
  } catch (const std::exception&) {
    throw ConfigError("range must look like lo:hi, got '" + s + "'");
  }
  if (done1 != lo_s.size() || done2 != hi_s.size())
    throw ConfigError("range must look like lo:hi, got '" + s + "'");
  return {lo, hi};
}

int cmd_simulate(const RunConfig& cfg, std::uint64_t trial, std::size_t trials,
                 bool dry_run, unsigned threads) {
  if (dry_run) {
    const std::size_t n = trials <= 1 ? 1 : trials;
    std::cout << "simulate: " << n << (n == 1 ? " trial x " : " trials x ")
              << cfg.sim.step_count() << " steps\n";
    return kExitOk;
  }
  // Trajectory export is raw; filtering belongs to the analysis stage.
  const Trajectory tr = integrate(cfg.model, cfg.sim, trial);
  write_file(out_path(cfg, "trajectory.csv"),
             [&](std::ostream& os) { csv::write_trajectory(os, tr); });

  std::vector<std::uint64_t> ids;
  if (trials <= 1) {
    ids.push_back(trial);
  } else {
    for (std::uint64_t t = 0; t < trials; ++t) ids.push_back(t);
  }
  std::vector<std::optional<TrialAnalysis>> per_trial(ids.size());
  detail::parallel_for(ids.size(), threads, [&](std::size_t i) {
    per_trial[i] = run_trial_analysis(cfg.model, cfg.sim, cfg.analysis, ids[i]);
  });

  SyncMetrics mean;
  Histogram density = per_trial[0]->density;
  std::fill(density.density.begin(), density.density.end(), 0.0);
  double beta_sum = 0.0;
  std::size_t beta_n = 0;
  for (const auto& ta : per_trial) {
    mean.abs_dphi += ta->metrics.abs_dphi;
    mean.R += ta->metrics.R;
    mean.rho += ta->metrics.rho;
    if (ta->metrics.beta) {
      beta_sum += *ta->metrics.beta;
      ++beta_n;
    }
    for (std::size_t b = 0; b < density.density.size(); ++b)
      density.density[b] += ta->density.density[b];
  }
  const double n = static_cast<double>(per_trial.size());
  mean.abs_dphi /= n;
  mean.R /= n;
  mean.rho /= n;
  if (beta_n > 0) mean.beta = beta_sum / static_cast<double>(beta_n);
  for (double& v : density.density) v /= n;  // bin-wise average of densities

  write_file(out_path(cfg, "metrics.csv"),
             [&](std::ostream& os) { csv::write_metrics(os, mean); });
  write_file(out_path(cfg, "density.csv"),
             [&](std::ostream& os) { csv::write_density(os, density); });
  write_metadata(cfg, "simulate",
                 {{"trial", trial}, {"trials", per_trial.size()}});
  return kExitOk;
}

int cmd_bifurcate(const RunConfig& cfg, const std::string& mode, double d_min,
                  double d_max, std::size_t d_count, double fixed,
                  const std::string& lambda0_range, std::size_t lambda0_count,
                  bool dry_run) {
  if (mode == "diagram") {
    const auto [lo, hi] = parse_range(lambda0_range);
    if (!(lo < hi)) throw ConfigError("empty lambda0 range");
    const auto grid = linspace(lo, hi, lambda0_count);
    if (dry_run) {
      std::cout << "bifurcate: " << grid.size() << " lambda0 points\n";
      return kExitOk;
    }
    const auto rows = branch_diagram(cfg.model, grid);
    write_file(out_path(cfg, "diagram.csv"),
               [&](std::ostream& os) { csv::write_diagram(os, rows); });
    write_metadata(cfg, "bifurcate",
                   {{"mode", mode}, {"lambda0_range", lambda0_range},
                    {"lambda0_count", lambda0_count}});
    return kExitOk;
  }
  BranchMode bm;
  if (mode == "symmetric") {
    bm = BranchMode::symmetric;
  } else if (mode == "vary-d1") {
    bm = BranchMode::vary_d1;
  } else if (mode == "vary-d2") {
    bm = BranchMode::vary_d2;
  } else {
    throw ConfigError("mode must be symmetric, vary-d1, vary-d2, or diagram");
  }
  if (!(d_min <= d_max)) throw ConfigError("empty coupling range");
  const auto grid = linspace(d_min, d_max, d_count);
  if (dry_run) {
    std::cout << "bifurcate: " << grid.size() << " coupling points\n";
    return kExitOk;
  }
  const auto points = two_parameter_branches(cfg.model, bm, grid, fixed);
  write_file(out_path(cfg, "branches.csv"),
             [&](std::ostream& os) { csv::write_branches(os, points, bm); });
  write_metadata(cfg, "bifurcate",
                 {{"mode", mode}, {"d_min", d_min}, {"d_max", d_max},
                  {"d_count", d_count}, {"fixed", fixed}});
  return kExitOk;
}

int cmd_snr(const RunConfig& cfg, double delta_min, double delta_max,
            std::size_t delta_count, std::size_t trials, bool dry_run,
            unsigned threads) {
  const auto deltas = logspace(delta_min, delta_max, delta_count);
  if (dry_run) {
    std::cout << "snr: " << deltas.size() << " grid points x " << trials
              << " trials = " << deltas.size() * trials << " integrations\n";
    return kExitOk;
  }
  const auto points = snr_curve(deltas, cfg.model, cfg.sim, cfg.analysis,
                                trials, threads);
  write_file(out_path(cfg, "snr.csv"),
             [&](std::ostream& os) { csv::write_snr(os, points); });
  write_metadata(cfg, "snr",
                 {{"delta_min", delta_min}, {"delta_max", delta_max},
                  {"delta_count", delta_count}, {"n_trials", trials}});
  return kExitOk;
}

SweepGrid grid_from_config(const RunConfig& cfg) {
  if (!cfg.sweep) throw ConfigError("this command needs a 'sweep' config section");
  SweepGrid g = *cfg.sweep;
  g.base = cfg.model;
  g.sim = cfg.sim;
  g.analysis = cfg.analysis;
  g.validate();
  return g;
}

nlohmann::json report_json(const OptimaReport& r) {
  nlohmann::json axes = nlohmann::json::array();
  for (std::size_t i = 0; i < r.axis_ids.size(); ++i)
    axes.push_back({{"param", to_string(r.axis_ids[i])}, {"value", r.argmin[i]}});
  return {{"min_abs_dphi", r.min_abs_dphi},
          {"argmin", axes},
          {"optimal_noise_ratio", r.optimal_noise_ratio},
          {"tie_break", kTieBreakRule}};
}

int cmd_sweep(const RunConfig& cfg, bool dry_run, unsigned threads) {
  const SweepGrid g = grid_from_config(cfg);
  if (dry_run) {
    std::cout << "sweep: " << g.cell_count() << " cells x " << g.n_trials
              << " trials = " << g.cell_count() * g.n_trials << " integrations\n";
    return kExitOk;
  }
  const SweepResult res = sweep(g, threads);
  std::size_t ok = 0;
  for (const auto& c : res.cells) ok += c.ok ? 1 : 0;
  write_file(out_path(cfg, "sweep.csv"),
             [&](std::ostream& os) { csv::write_sweep(os, res); });
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& c : res.cells)
    if (!c.ok) failures.push_back({{"coords", c.coords}, {"error", c.error}});
  write_metadata(cfg, "sweep", {{"cells_ok", ok}, {"failures", failures}});
  if (ok == 0) {
    std::cerr << "error: every sweep cell failed\n";
    return kExitNumerical;
  }
  std::cout << "sweep: " << ok << "/" << res.cells.size() << " cells ok\n";
  return kExitOk;
}

int cmd_optimum(const RunConfig& cfg, const std::string& mode,
                const std::vector<double>& map_d1, const std::vector<double>& map_d2,
                const std::vector<double>& lambda0_values, std::size_t trials_override,
                bool dry_run, unsigned threads) {
  SweepGrid g = grid_from_config(cfg);
  if (trials_override > 0) g.n_trials = trials_override;

  if (mode == "single") {
    if (dry_run) {
      std::cout << "optimum: " << g.cell_count() << " cells x " << g.n_trials
                << " trials = " << g.cell_count() * g.n_trials << " integrations\n";
      return kExitOk;
    }
    const SweepResult res = sweep(g, threads);
    write_file(out_path(cfg, "sweep.csv"),
               [&](std::ostream& os) { csv::write_sweep(os, res); });
    const OptimaReport rep = find_optimum(res);
    nlohmann::json j = report_json(rep);
    j["metadata"] = metadata_json("optimum", cfg);
    write_file(out_path(cfg, "optimum.json"),
               [&](std::ostream& os) { os << j.dump(2) << "\n"; });
    return kExitOk;
  }

  if (g.axes.size() != 2 || g.axes[0].id != ParamId::delta1 ||
      g.axes[1].id != ParamId::delta2)
    throw ConfigError("optimum --mode " + mode +
                      " needs sweep axes delta1, delta2 (in that order)");

  if (mode == "map") {
    if (map_d1.empty() || map_d2.empty())
      throw ConfigError("optimum --mode map needs --map-d1 and --map-d2 values");
    const std::size_t total =
        map_d1.size() * map_d2.size() * g.cell_count() * g.n_trials;
    if (dry_run) {
      std::cout << "optimum map: " << map_d1.size() * map_d2.size()
                << " coupling cells x " << g.cell_count() << " noise cells x "
                << g.n_trials << " trials = " << total << " integrations\n";
      return kExitOk;
    }
    const auto rows = optimum_map(map_d1, map_d2, g.axes[0], g.axes[1], g.base,
                                  g.sim, g.analysis, g.n_trials, threads);
    write_file(out_path(cfg, "optimum_map.csv"),
               [&](std::ostream& os) { csv::write_optimum_map(os, rows); });
    nlohmann::json jrows = nlohmann::json::array();
    std::size_t ok = 0;
    for (const auto& r : rows) {
      nlohmann::json jr{{"d1", r.d1}, {"d2", r.d2}, {"ok", r.ok}};
      if (r.ok) {
        jr["report"] = report_json(r.report);
        ++ok;
      } else {
        jr["error"] = r.error;
      }
      jrows.push_back(jr);
    }
    nlohmann::json j{{"rows", jrows}, {"metadata", metadata_json("optimum", cfg)}};
    write_file(out_path(cfg, "optimum_map.json"),
               [&](std::ostream& os) { os << j.dump(2) << "\n"; });
    if (ok == 0) {
      std::cerr << "error: every coupling cell failed\n";
      return kExitNumerical;
    }
    return kExitOk;
  }

  if (mode == "lambda") {
    if (lambda0_values.empty())
      throw ConfigError("optimum --mode lambda needs --lambda0-values");
    if (dry_run) {
      std::cout << "optimum lambda: " << lambda0_values.size() << " lambda0 x "
                << g.cell_count() << " noise cells x " << g.n_trials << " trials = "
                << lambda0_values.size() * g.cell_count() * g.n_trials
                << " integrations\n";
      return kExitOk;
    }
    const auto rows = optimum_vs_lambda(lambda0_values, g.axes[0], g.axes[1],
                                        g.base, g.sim, g.analysis, g.n_trials,
                                        threads);
    write_file(out_path(cfg, "lambda_optima.csv"),
               [&](std::ostream& os) { csv::write_lambda_optima(os, rows); });
    nlohmann::json jrows = nlohmann::json::array();
    for (const auto& r : rows)
      jrows.push_back({{"lambda0", r.lambda0},
                       {"min_abs_dphi", r.min_abs_dphi},
                       {"optimal_sum", r.optimal_sum},
                       {"report", report_json(r.report)}});
    nlohmann::json j{{"rows", jrows}, {"metadata", metadata_json("optimum", cfg)}};
    write_file(out_path(cfg, "lambda_optima.json"),
               [&](std::ostream& os) { os << j.dump(2) << "\n"; });
    return kExitOk;
  }

  throw ConfigError("optimum mode must be single, map, or lambda");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coupled stochastic lambda-omega oscillators: simulation, "
               "bifurcation structure, and phase-synchronization sweeps"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  Overrides o_sim, o_bif, o_snr, o_sweep, o_opt;

  auto* sim_cmd = app.add_subcommand("simulate",
                                     "one run: trajectory, metrics, density");
  add_common_flags(sim_cmd, o_sim);
  std::uint64_t trial = 0;
  std::size_t sim_trials = 1;
  sim_cmd->add_option("--trial", trial, "trial index for the exported trajectory");
  sim_cmd->add_option("--trials", sim_trials,
                      "trials to average metrics and density over");
  sim_cmd->add_flag("--beta", "compute the spectral SNR measure");

  auto* bif_cmd = app.add_subcommand("bifurcate", "Hopf branches and diagrams");
  add_common_flags(bif_cmd, o_bif);
  std::string bif_mode = "symmetric";
  double d_min = 0.0, d_max = 0.3, fixed = 0.05;
  std::size_t d_count = 31, lambda0_count = 41;
  std::string lambda0_range = "-1:1";
  bif_cmd->add_option("--mode", bif_mode, "symmetric | vary-d1 | vary-d2 | diagram");
  bif_cmd->add_option("--d-min", d_min, "coupling grid start");
  bif_cmd->add_option("--d-max", d_max, "coupling grid end");
  bif_cmd->add_option("--d-count", d_count, "coupling grid size");
  bif_cmd->add_option("--fixed", fixed, "fixed coupling for vary-d1 / vary-d2");
  bif_cmd->add_option("--lambda0-range", lambda0_range, "diagram range lo:hi");
  bif_cmd->add_option("--lambda0-count", lambda0_count, "diagram grid size");

  auto* snr_cmd = app.add_subcommand("snr", "single-oscillator SNR curve");
  add_common_flags(snr_cmd, o_snr);
  double delta_min = 0.01, delta_max = 5.0;
  std::size_t delta_count = 15, snr_trials = 20;
  snr_cmd->add_option("--delta-min", delta_min, "noise grid start");
  snr_cmd->add_option("--delta-max", delta_max, "noise grid end");
  snr_cmd->add_option("--delta-count", delta_count, "noise grid size");
  snr_cmd->add_option("--trials", snr_trials, "trials per grid point");

  auto* sweep_cmd = app.add_subcommand("sweep", "parameter-grid ensemble sweep");
  add_common_flags(sweep_cmd, o_sweep);

  auto* opt_cmd = app.add_subcommand("optimum", "noise-grid optima reports");
  add_common_flags(opt_cmd, o_opt);
  std::string opt_mode = "single";
  std::vector<double> map_d1, map_d2, lambda0_values;
  std::size_t opt_trials = 0;
  opt_cmd->add_option("--mode", opt_mode, "single | map | lambda");
  opt_cmd->add_option("--map-d1", map_d1, "d1 values for --mode map")
      ->delimiter(',');
  opt_cmd->add_option("--map-d2", map_d2, "d2 values for --mode map")
      ->delimiter(',');
  opt_cmd->add_option("--lambda0-values", lambda0_values,
                      "lambda0 values for --mode lambda")
      ->delimiter(',');
  opt_cmd->add_option("--trials", opt_trials, "override sweep n_trials");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help, --version
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (sim_cmd->parsed()) {
      RunConfig cfg = build_config(o_sim);
      if (sim_cmd->count("--beta") > 0) cfg.analysis.compute_beta = true;
      return cmd_simulate(cfg, trial, sim_trials, o_sim.dry_run,
                          resolve_thread_request(o_sim));
    }
    if (bif_cmd->parsed()) {
      return cmd_bifurcate(build_config(o_bif), bif_mode, d_min, d_max, d_count,
                           fixed, lambda0_range, lambda0_count, o_bif.dry_run);
    }
    if (snr_cmd->parsed()) {
      return cmd_snr(build_config(o_snr), delta_min, delta_max, delta_count,
                     snr_trials, o_snr.dry_run, resolve_thread_request(o_snr));
    }
    if (sweep_cmd->parsed()) {
      return cmd_sweep(build_config(o_sweep), o_sweep.dry_run,
                       resolve_thread_request(o_sweep));
    }
    if (opt_cmd->parsed()) {
      return cmd_optimum(build_config(o_opt), opt_mode, map_d1, map_d2,
                         lambda0_values, opt_trials, o_opt.dry_run,
                         resolve_thread_request(o_opt));
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitConfig;
}
