// Run-level quantities of interest: outlet temperature, coefficient of
// performance, extracted power, mean surface temperature over a monitoring
// square, and normalized horizontal temperature profiles.
#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "geoloop/mesh.hpp"

namespace geoloop {

struct ThermalState {
  std::vector<double> theta;  // K, one entry per mesh node
  double time = 0.0;          // s
};

struct SeriesRecord {
  double t = 0.0;            // s
  double theta_outlet = 0.0; // K
  double cop = 0.0;          // dimensionless
  double power = 0.0;        // W
};

struct TimeSeries {
  std::vector<SeriesRecord> records;
};

// Temperature at the network outlet node (which the grid contains exactly).
double outlet_temperature(const ThermalState& state, const StructuredMesh& mesh,
                          const VascularNetwork& network);

// zeta = 1 - theta_inlet / theta_outlet (absolute temperatures). Negative
// during start-up transients when the outlet is still colder than the inlet.
double coefficient_of_performance(double theta_inlet, double theta_outlet);

// P = mdot * c_f * (theta_outlet - theta_ambient), W.
double instantaneous_power(double mdot, double c_f, double theta_outlet, double theta_ambient);

// Time average of the power column by the trapezoid rule over the full span.
double average_power(const TimeSeries& series);

// Record with the highest outlet temperature (first one on ties).
std::size_t peak_record_index(const TimeSeries& series);

// Time of the outlet-temperature peak if it occurs before 0.9 * total_time;
// empty when the outlet is still rising at the end of the run.
std::optional<double> breakdown_time(const TimeSeries& series, double total_time);

// Axis-aligned monitoring square on the top surface.
struct SurfaceRegion {
  double center_x = 0.0;
  double center_y = 0.0;
  double edge = 100.0;  // m
};

// Area-averaged top-surface temperature over the region, integrating the
// bilinear field exactly on clipped cells.
double mean_surface_temperature(const ThermalState& state, const StructuredMesh& mesh,
                                const SurfaceRegion& region);

// Trilinear interpolation of the nodal field at an interior point.
double evaluate_at(const ThermalState& state, const StructuredMesh& mesh, const Vec3& p);

// Temperature along the x direction at one depth and y plane, sampled at the
// grid's x planes. Abscissae are normalized as x/spacing - (alpha + 1/2), so
// the two vertical legs of a U layout sit at -1/2 and +1/2.
std::vector<std::pair<double, double>> line_profile_normalized(const ThermalState& state,
                                                               const StructuredMesh& mesh,
                                                               double depth_m, double y_m,
                                                               double alpha, double spacing);

// Convenience wrapper taking the depth as a fraction of the layout depth.
std::vector<std::pair<double, double>> line_profile_at_fraction(const ThermalState& state,
                                                                const StructuredMesh& mesh,
                                                                double depth_fraction,
                                                                const LayoutSpec& layout);

}  // namespace geoloop
