// On-disk artifacts: deterministic CSV time series, legacy-VTK field
// snapshots, provenance records, and the per-run output directory layout.
#pragma once

#include <string>
#include <vector>

#include "geoloop/postprocess.hpp"
#include "geoloop/scenario.hpp"
#include "geoloop/simulation.hpp"

namespace geoloop {

// Shortest round-trippable decimal form, identical across platforms.
std::string format_number(double value);

// CSV schema: header "t_s,theta_outlet_K,cop,power_W", one row per record,
// %.15g numbers, LF line endings.
void write_timeseries_csv(const TimeSeries& series, const std::string& path);
TimeSeries read_timeseries_csv(const std::string& path);

// Streaming variant used by live runs so a mid-run failure still leaves the
// completed rows on disk.
class SeriesCsvWriter {
 public:
  explicit SeriesCsvWriter(const std::string& path);
  void append(const SeriesRecord& record);

 private:
  std::string path_;
};

// Legacy-VTK structured grid snapshot with a point scalar "temperature_K".
// Points follow the mesh's lexicographic node order (x fastest).
void write_field_snapshot(const ThermalState& state, const StructuredMesh& mesh,
                          const std::string& path);

struct RunArtifacts {
  std::string directory;
  std::string series_path;
  std::vector<std::string> snapshot_paths;
  std::string provenance_path;
  std::string mst_path;      // empty when no MST series was requested
  std::string profile_path;  // empty when no profile was requested
};

// Derives the run directory <root>/<first 12 hash chars> (concurrent sweep
// runs therefore write to disjoint directories).
std::string run_directory(const std::string& root, const std::string& hash);

// Runs the scenario, streaming series rows, snapshots, the optional MST and
// profile series, and a provenance record into the run directory.
RunArtifacts execute_run(const Scenario& scenario, const std::string& output_root);

}  // namespace geoloop
