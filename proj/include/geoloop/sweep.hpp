// Parameter sweeps: expand a base scenario document along value axes, run the
// expansions concurrently into disjoint hash-named directories, and summarize
// the headline quantities.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "geoloop/scenario.hpp"

namespace geoloop {

struct SweepAxis {
  std::string key;  // dot path into the scenario document, e.g. "fluid.mdot"
  std::vector<nlohmann::json> values;
};

struct SweepSpec {
  nlohmann::json base = nlohmann::json::object();
  std::vector<SweepAxis> axes;
  int cap = 64;  // refuse to expand into more runs than this
  std::string output_root = "sweep";
};

// Parses a sweep document:
//   {"base": {...} | "path.json", "axes": [{"key": "...", "values": [...]}],
//    "cap": 64, "output_root": "sweep"}
// A string base is resolved relative to base_dir.
SweepSpec load_sweep(const nlohmann::json& document, const std::string& base_dir);
SweepSpec load_sweep_file(const std::string& path);

struct SweepCase {
  std::string label;        // "fluid.mdot=5 layout.kind=U"
  nlohmann::json document;  // base with overrides applied
  Scenario scenario;        // validated
  std::string hash;
};

// Cross product in axis order (last axis fastest). Every case is validated
// before anything runs; exceeding the cap is an error.
std::vector<SweepCase> expand_sweep(const SweepSpec& spec);

struct SweepRow {
  std::string label;
  std::string layout;  // "U" or "comb"
  double mdot = 0.0;
  double avg_power = 0.0;
  double peak_theta = 0.0;
  std::optional<double> breakdown;  // s
  std::string directory;
  std::string error;  // non-empty when the run failed
};

// Worker count: the GEOLOOP_WORKERS environment variable when set, otherwise
// min(4, hardware concurrency).
int default_worker_count();

// Runs every case (worker pool), writes per-run artifacts plus
// <output_root>/summary.csv, and returns the rows in expansion order.
// Failed cases carry their error message; the summary lists successful rows.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, int workers);

void write_sweep_summary(const std::vector<SweepRow>& rows, const std::string& path);

// Companion matplotlib script that renders summary.csv as a bar chart; the
// core stays free of any plotting dependency.
void write_plot_stub(const std::string& path);

}  // namespace geoloop
