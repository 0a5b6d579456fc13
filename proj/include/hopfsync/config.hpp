#pragma once

#include <fstream>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hopfsync/errors.hpp"
#include "hopfsync/integrator.hpp"
#include "hopfsync/model.hpp"
#include "hopfsync/sweep.hpp"
#include "hopfsync/version.hpp"

namespace hopfsync {

struct OutputConfig {
  std::string dir = ".";
  std::string prefix = "run";
};

/// Full invocation configuration: everything a command needs, validated
/// before any compute starts.
struct RunConfig {
  ModelParams model;
  SimConfig sim;
  AnalysisConfig analysis;
  std::optional<SweepGrid> sweep;  // grid axes + trial count; base/sim copied in
  OutputConfig output;
};

namespace detail {

using nlohmann::json;

inline void require_keys(const json& j, const std::string& ctx,
                         std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(ctx + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        known = true;
        break;
      }
    if (!known) throw ConfigError(ctx + ": unknown key '" + it.key() + "'");
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback, const std::string& ctx) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(ctx + "." + key + ": " + e.what());
  }
}

inline void parse_model(const json& j, ModelParams& p) {
  require_keys(j, "model",
               {"lambda0", "alpha", "gamma", "omega0", "omega1", "d1", "d2",
                "delta1", "delta2"});
  p.lambda0 = get_or(j, "lambda0", p.lambda0, "model");
  p.alpha = get_or(j, "alpha", p.alpha, "model");
  p.gamma = get_or(j, "gamma", p.gamma, "model");
  p.omega0 = get_or(j, "omega0", p.omega0, "model");
  p.omega1 = get_or(j, "omega1", p.omega1, "model");
  p.d1 = get_or(j, "d1", p.d1, "model");
  p.d2 = get_or(j, "d2", p.d2, "model");
  p.delta1 = get_or(j, "delta1", p.delta1, "model");
  p.delta2 = get_or(j, "delta2", p.delta2, "model");
}

inline void parse_sim(const json& j, SimConfig& s) {
  require_keys(j, "sim", {"dt", "t_end", "t_burn", "seed", "ic_sigma", "blowup_bound"});
  s.dt = get_or(j, "dt", s.dt, "sim");
  s.t_end = get_or(j, "t_end", s.t_end, "sim");
  s.t_burn = get_or(j, "t_burn", s.t_burn, "sim");
  s.seed = get_or<std::uint64_t>(j, "seed", s.seed, "sim");
  s.ic_sigma = get_or(j, "ic_sigma", s.ic_sigma, "sim");
  s.blowup_bound = get_or(j, "blowup_bound", s.blowup_bound, "sim");
}

inline void parse_analysis(const json& j, AnalysisConfig& a) {
  require_keys(j, "analysis", {"filter_cutoff", "bins", "psd_segment", "compute_beta"});
  if (j.contains("filter_cutoff"))
    a.filter_cutoff = get_or(j, "filter_cutoff", 0.0, "analysis");
  a.bins = get_or<std::size_t>(j, "bins", a.bins, "analysis");
  a.psd_segment = get_or<std::size_t>(j, "psd_segment", a.psd_segment, "analysis");
  a.compute_beta = get_or(j, "compute_beta", a.compute_beta, "analysis");
}

inline Axis parse_axis(const json& j) {
  require_keys(j, "sweep.axes[]", {"param", "spacing", "values", "min", "max", "count"});
  Axis a;
  if (!j.contains("param")) throw ConfigError("sweep axis: missing 'param'");
  a.id = param_from_string(j.at("param").get<std::string>());
  const std::string sp = get_or<std::string>(j, "spacing", "log", "sweep.axes[]");
  if (sp == "log") {
    a.spacing = Spacing::log;
  } else if (sp == "linear") {
    a.spacing = Spacing::linear;
  } else {
    throw ConfigError("sweep axis: spacing must be 'log' or 'linear'");
  }
  if (j.contains("values")) {
    if (j.contains("min") || j.contains("max") || j.contains("count"))
      throw ConfigError("sweep axis: give either 'values' or min/max/count, not both");
    a.values = j.at("values").get<std::vector<double>>();
  } else {
    if (!(j.contains("min") && j.contains("max") && j.contains("count")))
      throw ConfigError("sweep axis: need 'values' or all of min/max/count");
    const double lo = j.at("min").get<double>();
    const double hi = j.at("max").get<double>();
    const auto n = j.at("count").get<std::size_t>();
    a.values = (a.spacing == Spacing::log) ? logspace(lo, hi, n) : linspace(lo, hi, n);
  }
  return a;
}

inline void parse_output(const json& j, OutputConfig& o) {
  require_keys(j, "output", {"dir", "prefix"});
  o.dir = get_or<std::string>(j, "dir", o.dir, "output");
  o.prefix = get_or<std::string>(j, "prefix", o.prefix, "output");
}

}  // namespace detail

inline RunConfig parse_config(const nlohmann::json& j) {
  detail::require_keys(j, "config", {"model", "sim", "analysis", "sweep", "output"});
  RunConfig cfg;
  try {
    if (j.contains("model")) detail::parse_model(j.at("model"), cfg.model);
    if (j.contains("sim")) detail::parse_sim(j.at("sim"), cfg.sim);
    if (j.contains("analysis")) detail::parse_analysis(j.at("analysis"), cfg.analysis);
    if (j.contains("sweep")) {
      const auto& js = j.at("sweep");
      detail::require_keys(js, "sweep", {"axes", "n_trials"});
      SweepGrid g;
      if (!js.contains("axes")) throw ConfigError("sweep: missing 'axes'");
      for (const auto& ja : js.at("axes")) g.axes.push_back(detail::parse_axis(ja));
      g.n_trials = detail::get_or<std::size_t>(js, "n_trials", g.n_trials, "sweep");
      cfg.sweep = std::move(g);
    }
    if (j.contains("output")) detail::parse_output(j.at("output"), cfg.output);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
  return parse_config(j);
}

// Metadata serialization: enough detail to reproduce any output bit-for-bit.

inline nlohmann::json to_json(const ModelParams& p) {
  return {{"lambda0", p.lambda0}, {"alpha", p.alpha},   {"gamma", p.gamma},
          {"omega0", p.omega0},   {"omega1", p.omega1}, {"d1", p.d1},
          {"d2", p.d2},           {"delta1", p.delta1}, {"delta2", p.delta2}};
}

inline nlohmann::json to_json(const SimConfig& s) {
  return {{"dt", s.dt},     {"t_end", s.t_end},       {"t_burn", s.t_burn},
          {"seed", s.seed}, {"ic_sigma", s.ic_sigma}, {"blowup_bound", s.blowup_bound}};
}

inline nlohmann::json to_json(const AnalysisConfig& a, const ModelParams& p) {
  return {{"filter_cutoff", a.cutoff_for(p)},
          {"bins", a.bins},
          {"psd_segment", a.psd_segment},
          {"compute_beta", a.compute_beta}};
}

inline nlohmann::json to_json(const Axis& a) {
  return {{"param", to_string(a.id)},
          {"spacing", to_string(a.spacing)},
          {"values", a.values}};
}

inline nlohmann::json metadata_json(const std::string& command, const RunConfig& cfg) {
  nlohmann::json j{{"command", command},
                   {"version", kVersion},
                   {"model", to_json(cfg.model)},
                   {"sim", to_json(cfg.sim)},
                   {"analysis", to_json(cfg.analysis, cfg.model)}};
  if (cfg.sweep) {
    nlohmann::json axes = nlohmann::json::array();
    for (const Axis& a : cfg.sweep->axes) axes.push_back(to_json(a));
    j["sweep"] = {{"axes", axes}, {"n_trials", cfg.sweep->n_trials}};
  }
  return j;
}

}  // namespace hopfsync
