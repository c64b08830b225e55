#include "geoloop/scenario_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace geoloop {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(message);
}

constexpr const char* kSeriesHeader = "t_s,theta_outlet_K,cop,power_W";

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), "cannot open for writing: " + path);
  return out;
}

std::string series_row(const SeriesRecord& r) {
  return format_number(r.t) + "," + format_number(r.theta_outlet) + "," + format_number(r.cop) +
         "," + format_number(r.power) + "\n";
}

// File-name-safe rendering of a time value (digits, 'p' for the decimal point).
std::string time_tag(double t) {
  std::string tag = format_number(t);
  for (char& c : tag) {
    if (c == '.') c = 'p';
    if (c == '+') c = 'e';
    if (c == '-') c = 'm';
  }
  return tag;
}

}  // namespace

std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.15g", value);
  return buf;
}

void write_timeseries_csv(const TimeSeries& series, const std::string& path) {
  require(!series.records.empty(), "refusing to write an empty time series");
  std::ofstream out = open_for_write(path);
  out << kSeriesHeader << "\n";
  for (const auto& r : series.records) out << series_row(r);
  require(out.good(), "write failed: " + path);
}

TimeSeries read_timeseries_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "cannot open time series: " + path);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "empty time series file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  require(line == kSeriesHeader, "unexpected series header in " + path + ": " + line);

  TimeSeries series;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    double values[4];
    for (int i = 0; i < 4; ++i) {
      require(static_cast<bool>(std::getline(row, field, ',')),
              "malformed series row in " + path + ": " + line);
      std::size_t used = 0;
      values[i] = std::stod(field, &used);
      require(used == field.size(), "malformed number in " + path + ": " + field);
    }
    series.records.push_back({values[0], values[1], values[2], values[3]});
  }
  require(!series.records.empty(), "time series has no records: " + path);
  return series;
}

SeriesCsvWriter::SeriesCsvWriter(const std::string& path) : path_(path) {
  std::ofstream out = open_for_write(path);
  out << kSeriesHeader << "\n";
}

void SeriesCsvWriter::append(const SeriesRecord& record) {
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  require(out.good(), "cannot append to " + path_);
  out << series_row(record);
  require(out.good(), "write failed: " + path_);
}

void write_field_snapshot(const ThermalState& state, const StructuredMesh& mesh,
                          const std::string& path) {
  require(state.theta.size() == mesh.node_count(), "state size does not match the mesh");
  std::ofstream out = open_for_write(path);
  out << "# vtk DataFile Version 3.0\n";
  out << "temperature field at t = " << format_number(state.time) << " s\n";
  out << "ASCII\n";
  out << "DATASET STRUCTURED_GRID\n";
  out << "DIMENSIONS " << mesh.nx() << " " << mesh.ny() << " " << mesh.nz() << "\n";
  out << "POINTS " << mesh.node_count() << " double\n";
  for (std::size_t idx = 0; idx < mesh.node_count(); ++idx) {
    const Vec3 p = mesh.node_position(idx);
    out << format_number(p.x) << " " << format_number(p.y) << " " << format_number(p.z) << "\n";
  }
  out << "POINT_DATA " << mesh.node_count() << "\n";
  out << "SCALARS temperature_K double 1\n";
  out << "LOOKUP_TABLE default\n";
  for (const double v : state.theta) out << format_number(v) << "\n";
  require(out.good(), "write failed: " + path);
}

std::string run_directory(const std::string& root, const std::string& hash) {
  require(hash.size() >= 12, "config hash is too short");
  return root + "/" + hash.substr(0, 12);
}

RunArtifacts execute_run(const Scenario& scenario, const std::string& output_root) {
  const std::string hash = scenario_hash(scenario);
  RunArtifacts artifacts;
  artifacts.directory = run_directory(output_root, hash);
  std::error_code ec;
  std::filesystem::create_directories(artifacts.directory, ec);
  require(!ec, "cannot create run directory " + artifacts.directory + ": " + ec.message());

  artifacts.series_path = artifacts.directory + "/series.csv";
  SeriesCsvWriter series_writer(artifacts.series_path);

  // Monitoring squares default to being centered on the outlet.
  const VascularNetwork network = build_layout(scenario.layout);
  const Vec3 outlet = network.nodes[static_cast<std::size_t>(network.outlet)];
  double mst_cx = outlet.x, mst_cy = outlet.y;
  if (scenario.output.mst_center) {
    mst_cx = (*scenario.output.mst_center)[0];
    mst_cy = (*scenario.output.mst_center)[1];
  }

  std::ofstream mst_out;
  if (!scenario.output.mst_edges.empty()) {
    artifacts.mst_path = artifacts.directory + "/mst.csv";
    mst_out = open_for_write(artifacts.mst_path);
    mst_out << "t_s";
    for (const double edge : scenario.output.mst_edges)
      mst_out << ",mst_" << format_number(edge) << "_K";
    mst_out << "\n";
  }

  StructuredMesh mesh;  // filled by the snapshot hook before first use
  RunHooks hooks;
  hooks.on_record = [&](const SeriesRecord& r) { series_writer.append(r); };

  TransientModel::Setup setup = model_setup(scenario);
  mesh = setup.mesh;

  hooks.on_state = [&](const ThermalState& state) {
    if (scenario.output.mst_edges.empty()) return;
    mst_out << format_number(state.time);
    for (const double edge : scenario.output.mst_edges) {
      const double mst = mean_surface_temperature(state, mesh, {mst_cx, mst_cy, edge});
      mst_out << "," << format_number(mst);
    }
    mst_out << "\n";
    mst_out.flush();
  };
  hooks.on_snapshot = [&](double t, const ThermalState& state) {
    const std::string path = artifacts.directory + "/snapshot_" + time_tag(t) + "s.vtk";
    write_field_snapshot(state, mesh, path);
    artifacts.snapshot_paths.push_back(path);
  };

  const RunResult result = run_transient(scenario, hooks);

  if (scenario.output.profile_depth_fraction) {
    artifacts.profile_path = artifacts.directory + "/profile.csv";
    const auto profile = line_profile_at_fraction(
        result.final_state, result.mesh, *scenario.output.profile_depth_fraction, scenario.layout);
    std::ofstream out = open_for_write(artifacts.profile_path);
    out << "x_norm,theta_K\n";
    for (const auto& [x, theta] : profile)
      out << format_number(x) << "," << format_number(theta) << "\n";
    require(out.good(), "write failed: " + artifacts.profile_path);
  }

  // Provenance goes last: its presence marks a completed run.
  artifacts.provenance_path = artifacts.directory + "/provenance.json";
  nlohmann::json prov;
  prov["config_hash"] = hash;
  prov["writer"] = "geoloop 1.0.0";
  prov["scenario"] = canonical_json(scenario);
  std::vector<std::string> names = {"series.csv"};
  for (const auto& p : artifacts.snapshot_paths)
    names.push_back(std::filesystem::path(p).filename().string());
  if (!artifacts.mst_path.empty()) names.push_back("mst.csv");
  if (!artifacts.profile_path.empty()) names.push_back("profile.csv");
  prov["artifacts"] = names;
  std::ofstream prov_out = open_for_write(artifacts.provenance_path);
  prov_out << prov.dump(2) << "\n";
  require(prov_out.good(), "write failed: " + artifacts.provenance_path);

  return artifacts;
}

}  // namespace geoloop
