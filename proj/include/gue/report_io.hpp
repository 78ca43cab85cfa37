#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "gue/experiments.hpp"

namespace gue::io {

using json = nlohmann::json;

/// Shortest form is not required; 17 significant digits round-trips doubles.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Config

namespace detail {

template <class T>
T read_field(const json& j, const char* field) {
  try {
    return j.at(field).get<T>();
  } catch (const json::exception& e) {
    throw experiments::ConfigError(field, std::string("missing or malformed (") + e.what() + ")");
  }
}

template <class T>
void read_optional(const json& j, const char* field, T& dst) {
  if (!j.contains(field)) return;
  dst = read_field<T>(j, field);
}

}  // namespace detail

inline const std::set<std::string>& known_config_fields() {
  static const std::set<std::string> fields{"n",      "num_matrices", "delta",  "master_seed",
                                            "m_list", "h_grid",       "t_grid", "p_list",
                                            "out_dir", "gt_n",        "gt_matrices"};
  return fields;
}

/// Parses and validates an experiment config. Unknown fields are rejected so a
/// typo cannot silently fall back to a default.
inline experiments::ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw experiments::ConfigError("config", "top level must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (!known_config_fields().contains(key))
      throw experiments::ConfigError(key, "unknown config field");

  experiments::ExperimentConfig cfg;
  const auto n = detail::read_field<long long>(j, "n");
  const auto count = detail::read_field<long long>(j, "num_matrices");
  if (n < 2) throw experiments::ConfigError("n", "must be at least 2");
  if (count < 1) throw experiments::ConfigError("num_matrices", "must be at least 1");
  cfg.n = static_cast<std::size_t>(n);
  cfg.num_matrices = static_cast<std::size_t>(count);
  detail::read_optional(j, "delta", cfg.delta);
  detail::read_optional(j, "master_seed", cfg.master_seed);
  detail::read_optional(j, "h_grid", cfg.h_grid);
  detail::read_optional(j, "t_grid", cfg.t_grid);
  detail::read_optional(j, "p_list", cfg.p_list);
  detail::read_optional(j, "out_dir", cfg.out_dir);
  detail::read_optional(j, "gt_n", cfg.gt_n);
  detail::read_optional(j, "gt_matrices", cfg.gt_matrices);
  if (!(cfg.delta > 0.0 && cfg.delta < 0.5))
    throw experiments::ConfigError("delta", "delta must be in (0, 0.5)");

  if (j.contains("m_list")) {
    const auto ms = detail::read_field<std::vector<long long>>(j, "m_list");
    cfg.m_list.clear();
    for (long long m : ms) {
      if (m < 1) throw experiments::ConfigError("m_list", "entries must be positive");
      cfg.m_list.push_back(static_cast<std::size_t>(m));
    }
  } else {
    // Defaults that do not fit a small bulk window are dropped, not errors.
    std::size_t room = 0;
    try {
      room = cfg.window().count();
    } catch (const std::invalid_argument&) {
    }
    std::erase_if(cfg.m_list, [room](std::size_t m) { return m > room; });
  }
  cfg.validate();
  return cfg;
}

inline experiments::ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw experiments::ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

inline json to_json(const experiments::ExperimentConfig& cfg) {
  return json{{"n", cfg.n},
              {"num_matrices", cfg.num_matrices},
              {"delta", cfg.delta},
              {"master_seed", cfg.master_seed},
              {"m_list", cfg.m_list},
              {"h_grid", cfg.h_grid},
              {"t_grid", cfg.t_grid},
              {"p_list", cfg.p_list},
              {"out_dir", cfg.out_dir},
              {"gt_n", cfg.effective_gt_n()},
              {"gt_matrices", cfg.effective_gt_matrices()}};
}

// ---------------------------------------------------------------------------
// Bound reports

inline std::string csv_header() { return "bound_name,param,empirical,bound,stderr,verdict"; }

inline std::string csv_row(const logconcave::BoundReport& b) {
  return b.bound_name + "," + fmt17(b.param) + "," + fmt17(b.empirical) + "," + fmt17(b.bound) +
         "," + fmt17(b.mc_stderr) + "," + std::string(logconcave::to_string(b.verdict));
}

inline json to_json(const logconcave::BoundReport& b) {
  return json{{"bound_name", b.bound_name},
              {"param", b.param},
              {"empirical", b.empirical},
              {"bound", b.bound},
              {"stderr", b.mc_stderr},
              {"direction", b.direction == logconcave::Direction::upper ? "upper" : "lower"},
              {"verdict", logconcave::to_string(b.verdict)}};
}

inline json to_json(const logconcave::LogConcavityReport& r) {
  json violations = json::array();
  for (const auto& v : r.violations)
    violations.push_back(
        {{"center", v.center}, {"second_difference", v.second_difference}, {"noise", v.noise}});
  return json{{"consistent", r.consistent},
              {"bin_width", r.bin_width},
              {"total_bins", r.total_bins},
              {"qualifying_bins", r.qualifying_bins},
              {"checks", r.checks},
              {"max_standardized", r.max_standardized},
              {"violations", violations}};
}

inline json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

/// Deterministic for a fixed config: no wall-clock, thread count or host data.
inline json to_json(const experiments::ExperimentReport& rep) {
  json thm;
  thm["mean_gap"] = rep.thm_main.mean_gap;
  thm["mean_gap_stderr"] = rep.thm_main.mean_gap_stderr;
  json per_index = json::array();
  for (const auto& [i, m] : rep.thm_main.per_index_means) per_index.push_back({{"i", i}, {"mean", m}});
  thm["per_index_means"] = per_index;
  thm["bounds"] = json::array();
  for (const auto& b : rep.thm_main.bounds) thm["bounds"].push_back(to_json(b));

  json rig;
  rig["overlap_policy"] = rep.rigidity.overlap_policy;
  rig["growth_exponent"] = finite_or_null(rep.rigidity.growth_exponent);
  rig["reference_exponent"] = 7.0 / 6.0;
  rig["windows"] = json::array();
  for (const auto& e : rep.rigidity.entries) {
    json w{{"m", e.m}, {"count", e.count}, {"sigma_hat", e.sigma_hat}, {"reportable", e.reportable}};
    w["bounds"] = json::array();
    for (const auto& b : e.bounds) w["bounds"].push_back(to_json(b));
    rig["windows"].push_back(w);
  }

  json gt{{"n", rep.gt.n},
          {"matrices", rep.gt.matrices},
          {"checks", rep.gt.checks},
          {"violations", rep.gt.violations.size()},
          {"pass_rate", rep.gt.pass_rate()},
          {"tolerance_relative", experiments::kGtInterlacingTolerance},
          {"functional_size", rep.gt.functional.values.size()}};
  json gt_viol = json::array();
  for (const auto& v : rep.gt.violations)
    gt_viol.push_back({{"matrix_index", v.matrix_index},
                       {"master_seed", v.seed.master_seed},
                       {"task_index", v.seed.task_index},
                       {"k", v.k},
                       {"j", v.j}});
  gt["violation_list"] = gt_viol;
  gt["diagnostic"] = rep.gt.diagnostic ? to_json(*rep.gt.diagnostic) : json(nullptr);

  json hist{{"lo", rep.histogram.lo},
            {"width", rep.histogram.width},
            {"density", rep.histogram.density},
            {"gm_density", rep.histogram.gm_density}};

  json out;
  out["config"] = to_json(rep.config);
  out["pooled_gaps"] = rep.pooled_gaps;
  out["thm_main"] = thm;
  out["rigidity"] = rig;
  out["ks_distance_to_gm"] = rep.ks_distance_to_gm;
  out["gap_diagnostic"] = rep.gap_diagnostic ? to_json(*rep.gap_diagnostic) : json(nullptr);
  out["minor_interlacing"] = {{"checks", rep.minor_checks},
                              {"violations", rep.minor_violations},
                              {"tolerance_relative", experiments::kMinorInterlacingTolerance}};
  out["gt"] = gt;
  out["histogram"] = hist;
  out["bounds"] = json::array();
  for (const auto& b : rep.all_bounds()) out["bounds"].push_back(to_json(b));
  out["all_pass"] = rep.all_pass();
  return out;
}

// ---------------------------------------------------------------------------
// Artifact files

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

inline std::string bounds_csv(const experiments::ExperimentReport& rep) {
  std::string s = csv_header() + "\n";
  for (const auto& b : rep.all_bounds()) s += csv_row(b) + "\n";
  return s;
}

inline std::string gaps_csv(const semicircle::GapObservations& g) {
  std::ostringstream s;
  s << "matrix_index,i,g\n";
  for (std::size_t k = 0; k < g.values.size(); ++k)
    s << g.matrix_index[k] << ',' << g.gap_index[k] << ',' << fmt17(g.values[k]) << '\n';
  return s.str();
}

inline std::string gt_csv(const experiments::GtResult& gt) {
  std::ostringstream s;
  s << "matrix_index,checks,violations,max_relative_excess\n";
  for (const auto& r : gt.rows)
    s << r.matrix_index << ',' << r.checks << ',' << r.violations << ','
      << fmt17(r.max_relative_excess) << '\n';
  return s.str();
}

/// Writes report.json, bounds.csv, gaps.csv and gt.csv into `dir`.
inline void write_artifacts(const experiments::ExperimentReport& rep,
                            const semicircle::GapObservations& gaps,
                            const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string());
  write_text(dir / "report.json", to_json(rep).dump(2) + "\n");
  write_text(dir / "bounds.csv", bounds_csv(rep));
  write_text(dir / "gaps.csv", gaps_csv(gaps));
  write_text(dir / "gt.csv", gt_csv(rep.gt));
}

}  // namespace gue::io
