#include "geoloop/sweep.hpp"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include "geoloop/postprocess.hpp"
#include "geoloop/scenario_io.hpp"

namespace geoloop {

namespace {

using nlohmann::json;

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(message);
}

std::vector<std::string> split_path(const std::string& key) {
  std::vector<std::string> parts;
  std::string part;
  for (char c : key) {
    if (c == '.') {
      parts.push_back(part);
      part.clear();
    } else {
      part.push_back(c);
    }
  }
  parts.push_back(part);
  for (const auto& p : parts) require(!p.empty(), "malformed axis key: " + key);
  return parts;
}

void set_by_path(json& doc, const std::string& key, const json& value) {
  json* at = &doc;
  const auto parts = split_path(key);
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!at->contains(parts[i])) (*at)[parts[i]] = json::object();
    at = &(*at)[parts[i]];
    require(at->is_object(), "axis key " + key + " descends into a non-object");
  }
  (*at)[parts.back()] = value;
}

std::string value_label(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

}  // namespace

SweepSpec load_sweep(const nlohmann::json& document, const std::string& base_dir) {
  require(document.is_object(), "sweep document must be an object");
  SweepSpec spec;
  for (const auto& [key, value] : document.items()) {
    if (key == "base" || key == "axes" || key == "cap" || key == "output_root") continue;
    throw Error("unknown key in sweep document: " + key);
  }

  if (document.contains("base")) {
    const json& base = document.at("base");
    if (base.is_string()) {
      const std::filesystem::path p = base.get<std::string>();
      const std::filesystem::path resolved = p.is_absolute() ? p : base_dir / p;
      std::ifstream in(resolved);
      require(in.good(), "cannot open sweep base scenario: " + resolved.string());
      try {
        spec.base = json::parse(in);
      } catch (const json::parse_error& e) {
        throw Error("sweep base " + resolved.string() + " is not valid JSON: " + e.what());
      }
    } else {
      require(base.is_object(), "sweep base must be an object or a file path");
      spec.base = base;
    }
  }

  // No axes at all is legal: the sweep degenerates to the base scenario.
  const json axes = document.contains("axes") ? document.at("axes") : json::array();
  require(axes.is_array(), "sweep axes must be an array");
  for (const json& axis : axes) {
    require(axis.is_object(), "each sweep axis must be an object");
    for (const auto& [key, value] : axis.items())
      require(key == "key" || key == "values", "unknown key in sweep axis: " + key);
    require(axis.contains("key") && axis.at("key").is_string(), "sweep axis needs a string key");
    require(axis.contains("values") && axis.at("values").is_array() && !axis.at("values").empty(),
            "sweep axis needs a non-empty values array");
    SweepAxis out;
    out.key = axis.at("key").get<std::string>();
    for (const json& v : axis.at("values")) out.values.push_back(v);
    spec.axes.push_back(std::move(out));
  }

  if (document.contains("cap")) {
    require(document.at("cap").is_number_integer(), "sweep cap must be an integer");
    spec.cap = document.at("cap").get<int>();
    require(spec.cap >= 1, "sweep cap must be >= 1");
  }
  if (document.contains("output_root")) {
    require(document.at("output_root").is_string(), "sweep output_root must be a string");
    spec.output_root = document.at("output_root").get<std::string>();
  }
  return spec;
}

SweepSpec load_sweep_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open sweep file: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error("sweep file " + path + " is not valid JSON: " + e.what());
  }
  return load_sweep(doc, std::filesystem::path(path).parent_path().string());
}

std::vector<SweepCase> expand_sweep(const SweepSpec& spec) {
  long long combinations = 1;
  for (const auto& axis : spec.axes) {
    combinations *= static_cast<long long>(axis.values.size());
    require(combinations <= spec.cap,
            "sweep expands to more than the cap of " + std::to_string(spec.cap) + " runs");
  }

  std::vector<SweepCase> cases;
  std::vector<std::size_t> pick(spec.axes.size(), 0);
  while (true) {
    SweepCase c;
    c.document = spec.base;
    for (std::size_t a = 0; a < spec.axes.size(); ++a) {
      const auto& axis = spec.axes[a];
      set_by_path(c.document, axis.key, axis.values[pick[a]]);
      if (!c.label.empty()) c.label += " ";
      c.label += axis.key + "=" + value_label(axis.values[pick[a]]);
    }
    if (spec.axes.empty()) c.label = "base";
    try {
      c.scenario = load_scenario(c.document);
    } catch (const Error& e) {
      throw Error("sweep case \"" + c.label + "\" is invalid: " + e.what());
    }
    c.hash = scenario_hash(c.scenario);
    cases.push_back(std::move(c));
    if (spec.axes.empty()) return cases;

    // Odometer increment, last axis fastest.
    std::size_t a = spec.axes.size();
    while (a > 0) {
      --a;
      if (++pick[a] < spec.axes[a].values.size()) break;
      pick[a] = 0;
      if (a == 0) return cases;
    }
  }
}

int default_worker_count() {
  if (const char* env = std::getenv("GEOLOOP_WORKERS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::min(4u, hw == 0 ? 1u : hw));
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, int workers) {
  const std::vector<SweepCase> cases = expand_sweep(spec);
  std::vector<SweepRow> rows(cases.size());
  require(workers >= 1, "sweep needs at least one worker");

  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cases.size()) return;
      const SweepCase& c = cases[i];
      SweepRow& row = rows[i];
      row.label = c.label;
      row.layout = c.scenario.layout.kind == LayoutKind::U ? "U" : "comb";
      row.mdot = c.scenario.mdot;
      row.directory = run_directory(spec.output_root, c.hash);
      try {
        execute_run(c.scenario, spec.output_root);
        const TimeSeries series = read_timeseries_csv(row.directory + "/series.csv");
        row.avg_power = average_power(series);
        row.peak_theta = series.records[peak_record_index(series)].theta_outlet;
        row.breakdown = breakdown_time(series, c.scenario.solver.total_time);
      } catch (const std::exception& e) {
        row.error = e.what();
      }
    }
  };

  std::vector<std::thread> pool;
  const int n_workers = std::min<int>(workers, static_cast<int>(cases.size()));
  for (int w = 0; w < n_workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();

  std::error_code ec;
  std::filesystem::create_directories(spec.output_root, ec);
  write_sweep_summary(rows, spec.output_root + "/summary.csv");
  write_plot_stub(spec.output_root + "/plot_summary.py");
  return rows;
}

void write_plot_stub(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), "cannot open for writing: " + path);
  out << "#!/usr/bin/env python3\n"
         "\"\"\"Bar chart of average power per sweep case, from summary.csv.\"\"\"\n"
         "import csv\n"
         "import pathlib\n"
         "\n"
         "import matplotlib.pyplot as plt\n"
         "\n"
         "rows = list(csv.DictReader(open(pathlib.Path(__file__).parent / \"summary.csv\")))\n"
         "labels = [f\"{r['layout']} {r['mdot_kg_s']} kg/s\" for r in rows]\n"
         "plt.bar(labels, [float(r[\"avg_power_W\"]) / 1e6 for r in rows])\n"
         "plt.ylabel(\"average power [MW]\")\n"
         "plt.xticks(rotation=45, ha=\"right\")\n"
         "plt.tight_layout()\n"
         "plt.savefig(\"summary.png\", dpi=150)\n";
  require(out.good(), "write failed: " + path);
}

void write_sweep_summary(const std::vector<SweepRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), "cannot open for writing: " + path);
  out << "layout,mdot_kg_s,avg_power_W,peak_theta_K,breakdown_time_s\n";
  for (const auto& row : rows) {
    if (!row.error.empty()) continue;
    out << row.layout << "," << format_number(row.mdot) << "," << format_number(row.avg_power)
        << "," << format_number(row.peak_theta) << ","
        << (row.breakdown ? format_number(*row.breakdown) : "none") << "\n";
  }
  require(out.good(), "write failed: " + path);
}

}  // namespace geoloop
