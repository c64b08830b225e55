// Scenario configuration: JSON schema with strict unknown-key checking, unit
// normalization at parse time, defaults, and a canonical content hash that
// identifies a run.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "geoloop/assembly.hpp"
#include "geoloop/solver.hpp"

namespace geoloop {

enum class BcMode { Dirichlet, Neumann, AllDirichlet };

struct OutputSpec {
  std::vector<double> snapshot_times;              // defaults to {total_time}
  std::vector<double> mst_edges;                   // square edge lengths, m; empty = no MST series
  std::optional<std::array<double, 2>> mst_center; // defaults to the outlet position
  std::optional<double> profile_depth_fraction;    // fraction of layout depth; empty = no profile
};

struct Scenario {
  double Lx = 6000.0, Ly = 6000.0, Lz = 10000.0;
  LayoutSpec layout;
  MaterialField material;
  double rho_f = 1000.0, c_f = 4183.0, mdot = 30.0;
  BcMode bc_mode = BcMode::Dirichlet;
  SurfaceBC bc;  // faces and flux values fully resolved from bc_mode
  SolverConfig solver;
  double upwind_blend = 1.0;
  int nx = 24, ny = 24, nz = 40;
  double grading_ratio = 1.3;
  OutputSpec output;

  double chi() const { return mdot * c_f; }                    // W/K
  double alpha() const { return 0.5 * (Lx / layout.spacing - 1.0); }
};

// Parses and validates a scenario document. Unknown keys, type mismatches,
// and out-of-range values raise Error naming the offending key path.
Scenario load_scenario(const nlohmann::json& document);
Scenario load_scenario_file(const std::string& path);

// Fully-populated normalized form (SI units, defaults resolved, sorted keys).
nlohmann::json canonical_json(const Scenario& scenario);

// FNV-1a hash of the canonical form, 16 hex characters. Semantically
// identical documents hash identically regardless of key order.
std::string scenario_hash(const Scenario& scenario);

}  // namespace geoloop
