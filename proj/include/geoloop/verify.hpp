// Numerical verification: manufactured-solution convergence studies, the
// discrete energy-decay diagnostic, and a dense-LU oracle comparison that
// shares assembly with the production path but none of the solve code.
#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "geoloop/simulation.hpp"

namespace geoloop {

// Exact solution, matching volumetric source, and material for a cube domain.
struct ManufacturedCase {
  double extent = 1.0;  // cube edge, m
  MaterialField material;
  std::function<double(const Vec3&, double)> exact;
  std::function<double(const Vec3&, double)> source;  // rho*c dtheta/dt - div(K grad theta)
};

// Product of sines decaying in time; exercises every spatial term.
ManufacturedCase smooth_product_case();
// Linear in z, decaying in time; trilinear elements represent it exactly in
// space, so the measured error is purely temporal.
ManufacturedCase linear_profile_case();

struct ConvergenceStudy {
  std::vector<double> resolution;  // h (spatial) or dt (temporal)
  std::vector<double> errors;     // L2 field error at the final time
  std::vector<double> pair_orders;
  double overall_order = 0.0;     // least-squares slope in log-log
};

// L2 error of the discrete field against the exact solution at state.time.
double l2_field_error(const ThermalState& state, const StructuredMesh& mesh,
                      const std::function<double(const Vec3&, double)>& exact);

ConvergenceStudy mms_spatial_study(const ManufacturedCase& mc, const std::vector<int>& cells,
                                   double dt, int steps, int bdf_order);
ConvergenceStudy mms_temporal_study(const ManufacturedCase& mc, int cells,
                                    const std::vector<int>& step_counts, double total_time,
                                    int bdf_order);

// Discrete energies E^n = (1/2) w^T M w of the difference w between two runs
// whose initial fields differ by a smooth interior bump. With BDF1 and full
// upwinding the sequence must be non-increasing (radiation, being monotone in
// the temperature, only strengthens the contraction).
std::vector<double> energy_decay_energies(const Scenario& scenario, double bump_amplitude,
                                          int steps);

struct OracleComparison {
  double max_abs_difference = 0.0;  // K, over all steps and nodes
  int steps = 0;
  std::size_t nodes = 0;
};

// Marches the scenario twice, once with the production Krylov backend and
// once with dense LU, and reports the largest state discrepancy. Guarded to
// small meshes (at most 512 nodes).
OracleComparison dense_oracle_compare(const Scenario& scenario, int steps);

// Runs the standard verification battery, printing one pass/fail line per
// check. Returns true when every check passes.
bool run_verification_report(std::ostream& out);

}  // namespace geoloop
