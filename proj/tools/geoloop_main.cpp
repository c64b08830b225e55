// geoloop command-line driver.
//
//   geoloop run <config.json> [--output DIR]    single scenario -> artifacts
//   geoloop sweep <sweep.json> [--workers N]    parameter sweep -> summary.csv
//   geoloop post <run directory>                re-derive headline numbers
//   geoloop verify                              numerical verification report
//
// Exit codes: 0 success, 1 runtime/validation failure, 2 usage error.
#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "geoloop/postprocess.hpp"
#include "geoloop/scenario.hpp"
#include "geoloop/scenario_io.hpp"
#include "geoloop/sweep.hpp"
#include "geoloop/verify.hpp"

namespace {

int command_run(const std::string& config_path, const std::string& output_root) {
  const geoloop::Scenario scenario = geoloop::load_scenario_file(config_path);
  const geoloop::RunArtifacts artifacts = geoloop::execute_run(scenario, output_root);

  const geoloop::TimeSeries series = geoloop::read_timeseries_csv(artifacts.series_path);
  const std::size_t peak = geoloop::peak_record_index(series);
  std::cout << "run " << geoloop::scenario_hash(scenario) << " -> " << artifacts.directory << "\n"
            << "  records:       " << series.records.size() << "\n"
            << "  peak outlet:   " << geoloop::format_number(series.records[peak].theta_outlet)
            << " K at t = " << geoloop::format_number(series.records[peak].t) << " s\n"
            << "  average power: " << geoloop::format_number(geoloop::average_power(series))
            << " W\n";
  for (const auto& snap : artifacts.snapshot_paths) std::cout << "  snapshot:      " << snap << "\n";
  return 0;
}

int command_sweep(const std::string& spec_path, int workers, const std::string& output_override) {
  geoloop::SweepSpec spec = geoloop::load_sweep_file(spec_path);
  if (!output_override.empty()) spec.output_root = output_override;

  const std::vector<geoloop::SweepRow> rows = geoloop::run_sweep(spec, workers);
  int failures = 0;
  for (const auto& row : rows) {
    if (row.error.empty()) {
      std::cout << row.label << " -> " << row.directory << " (avg "
                << geoloop::format_number(row.avg_power) << " W)\n";
    } else {
      ++failures;
      std::cerr << row.label << " failed: " << row.error << "\n";
    }
  }
  std::cout << "summary: " << spec.output_root << "/summary.csv (" << rows.size() - failures
            << "/" << rows.size() << " runs succeeded)\n";
  return failures == 0 ? 0 : 1;
}

int command_post(const std::string& run_dir) {
  const geoloop::TimeSeries series = geoloop::read_timeseries_csv(run_dir + "/series.csv");
  if (series.records.empty()) throw geoloop::Error("series in " + run_dir + " has no records");

  // The horizon for breakdown detection comes from the recorded scenario when
  // available, otherwise from the last sample.
  double total_time = series.records.back().t;
  std::ifstream prov(run_dir + "/provenance.json");
  if (prov.good()) {
    const auto doc = nlohmann::json::parse(prov, nullptr, /*allow_exceptions=*/false);
    if (doc.is_object() && doc.contains("scenario") &&
        doc["scenario"].contains("solver") && doc["scenario"]["solver"].contains("total_time"))
      total_time = doc["scenario"]["solver"]["total_time"].get<double>();
  }

  const std::size_t peak = geoloop::peak_record_index(series);
  const auto breakdown = geoloop::breakdown_time(series, total_time);
  std::cout << "records:        " << series.records.size() << "\n"
            << "time span:      " << geoloop::format_number(series.records.front().t) << " .. "
            << geoloop::format_number(series.records.back().t) << " s\n"
            << "peak outlet:    " << geoloop::format_number(series.records[peak].theta_outlet)
            << " K at t = " << geoloop::format_number(series.records[peak].t) << " s\n"
            << "final outlet:   " << geoloop::format_number(series.records.back().theta_outlet)
            << " K\n"
            << "final cop:      " << geoloop::format_number(series.records.back().cop) << "\n"
            << "average power:  " << geoloop::format_number(geoloop::average_power(series))
            << " W\n"
            << "breakdown time: " << (breakdown ? geoloop::format_number(*breakdown) + " s"
                                                : std::string("none"))
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reduced-order closed-loop geothermal simulator"};
  app.require_subcommand(1);

  std::string run_config;
  std::string run_output = "runs";
  CLI::App* run = app.add_subcommand("run", "Run one scenario and write its artifacts");
  run->add_option("config", run_config, "Scenario JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("-o,--output", run_output, "Artifact root directory");

  std::string sweep_spec;
  std::string sweep_output;
  int sweep_workers = geoloop::default_worker_count();
  CLI::App* sweep = app.add_subcommand("sweep", "Expand and run a parameter sweep");
  sweep->add_option("spec", sweep_spec, "Sweep JSON file")->required()->check(CLI::ExistingFile);
  sweep->add_option("-j,--workers", sweep_workers, "Concurrent runs")
      ->check(CLI::PositiveNumber);
  sweep->add_option("-o,--output", sweep_output, "Override the sweep output root");

  std::string post_dir;
  CLI::App* post = app.add_subcommand("post", "Summarize an existing run directory (read-only)");
  post->add_option("directory", post_dir, "Run directory containing series.csv")
      ->required()
      ->check(CLI::ExistingDirectory);

  CLI::App* verify = app.add_subcommand("verify", "Run the numerical verification report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exit 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand(run)) return command_run(run_config, run_output);
    if (app.got_subcommand(sweep)) return command_sweep(sweep_spec, sweep_workers, sweep_output);
    if (app.got_subcommand(post)) return command_post(post_dir);
    if (app.got_subcommand(verify)) return geoloop::run_verification_report(std::cout) ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
