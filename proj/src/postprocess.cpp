#include "geoloop/postprocess.hpp"

#include <algorithm>
#include <cmath>

namespace geoloop {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(message);
}

// Index of the cell interval containing c along one strictly increasing plane
// list, clamping boundary hits inward.
std::size_t locate(const std::vector<double>& planes, double c, double tol, const char* axis) {
  require(c >= planes.front() - tol && c <= planes.back() + tol,
          std::string("point outside the mesh along ") + axis);
  const auto it = std::upper_bound(planes.begin(), planes.end(), c);
  std::size_t hi = static_cast<std::size_t>(it - planes.begin());
  hi = std::clamp<std::size_t>(hi, 1, planes.size() - 1);
  return hi - 1;
}

}  // namespace

double outlet_temperature(const ThermalState& state, const StructuredMesh& mesh,
                          const VascularNetwork& network) {
  require(state.theta.size() == mesh.node_count(), "state size does not match the mesh");
  const auto node = mesh.find_node(network.nodes[static_cast<std::size_t>(network.outlet)]);
  require(node.has_value(), "network outlet does not lie on a mesh node");
  return state.theta[*node];
}

double coefficient_of_performance(double theta_inlet, double theta_outlet) {
  require(theta_inlet > 0.0 && theta_outlet > 0.0,
          "coefficient_of_performance needs positive absolute temperatures");
  return 1.0 - theta_inlet / theta_outlet;
}

double instantaneous_power(double mdot, double c_f, double theta_outlet, double theta_ambient) {
  require(mdot >= 0.0, "mass flow must be >= 0");
  require(c_f > 0.0, "fluid heat capacity must be positive");
  return mdot * c_f * (theta_outlet - theta_ambient);
}

double average_power(const TimeSeries& series) {
  require(series.records.size() >= 2, "average_power needs at least two records");
  double integral = 0.0;
  for (std::size_t i = 1; i < series.records.size(); ++i) {
    const auto& a = series.records[i - 1];
    const auto& b = series.records[i];
    require(b.t > a.t, "series times must be strictly increasing");
    integral += 0.5 * (a.power + b.power) * (b.t - a.t);
  }
  return integral / (series.records.back().t - series.records.front().t);
}

std::size_t peak_record_index(const TimeSeries& series) {
  require(!series.records.empty(), "series is empty");
  std::size_t best = 0;
  for (std::size_t i = 1; i < series.records.size(); ++i)
    if (series.records[i].theta_outlet > series.records[best].theta_outlet) best = i;
  return best;
}

std::optional<double> breakdown_time(const TimeSeries& series, double total_time) {
  require(total_time > 0.0, "total_time must be positive");
  const double t_peak = series.records[peak_record_index(series)].t;
  if (t_peak < 0.9 * total_time) return t_peak;
  return std::nullopt;
}

double mean_surface_temperature(const ThermalState& state, const StructuredMesh& mesh,
                                const SurfaceRegion& region) {
  require(state.theta.size() == mesh.node_count(), "state size does not match the mesh");
  require(region.edge > 0.0, "monitoring square edge must be positive");
  const double tol = mesh.coordinate_tolerance();
  const double x0 = region.center_x - 0.5 * region.edge;
  const double x1 = region.center_x + 0.5 * region.edge;
  const double y0 = region.center_y - 0.5 * region.edge;
  const double y1 = region.center_y + 0.5 * region.edge;
  require(x0 >= mesh.xs.front() - tol && x1 <= mesh.xs.back() + tol &&
              y0 >= mesh.ys.front() - tol && y1 <= mesh.ys.back() + tol,
          "monitoring square extends outside the footprint");

  // Exact integral of the piecewise-bilinear surface field over the square.
  double integral = 0.0;
  for (std::size_t j = 0; j + 1 < mesh.ny(); ++j) {
    const double cy0 = std::max(y0, mesh.ys[j]);
    const double cy1 = std::min(y1, mesh.ys[j + 1]);
    if (cy1 <= cy0) continue;
    const double hy = mesh.ys[j + 1] - mesh.ys[j];
    const double v0 = cy0 - mesh.ys[j], v1 = cy1 - mesh.ys[j];
    const double iv_hi = (v1 * v1 - v0 * v0) / (2.0 * hy);
    const double iv_lo = (v1 - v0) - iv_hi;
    for (std::size_t i = 0; i + 1 < mesh.nx(); ++i) {
      const double cx0 = std::max(x0, mesh.xs[i]);
      const double cx1 = std::min(x1, mesh.xs[i + 1]);
      if (cx1 <= cx0) continue;
      const double hx = mesh.xs[i + 1] - mesh.xs[i];
      const double u0 = cx0 - mesh.xs[i], u1 = cx1 - mesh.xs[i];
      const double iu_hi = (u1 * u1 - u0 * u0) / (2.0 * hx);
      const double iu_lo = (u1 - u0) - iu_hi;
      const double t00 = state.theta[mesh.node_index(i, j, 0)];
      const double t10 = state.theta[mesh.node_index(i + 1, j, 0)];
      const double t01 = state.theta[mesh.node_index(i, j + 1, 0)];
      const double t11 = state.theta[mesh.node_index(i + 1, j + 1, 0)];
      integral += t00 * iu_lo * iv_lo + t10 * iu_hi * iv_lo + t01 * iu_lo * iv_hi +
                  t11 * iu_hi * iv_hi;
    }
  }
  return integral / (region.edge * region.edge);
}

double evaluate_at(const ThermalState& state, const StructuredMesh& mesh, const Vec3& p) {
  require(state.theta.size() == mesh.node_count(), "state size does not match the mesh");
  const double tol = mesh.coordinate_tolerance();
  const std::size_t i = locate(mesh.xs, p.x, tol, "x");
  const std::size_t j = locate(mesh.ys, p.y, tol, "y");
  const std::size_t k = locate(mesh.zs, p.z, tol, "z");
  const double fx = std::clamp((p.x - mesh.xs[i]) / (mesh.xs[i + 1] - mesh.xs[i]), 0.0, 1.0);
  const double fy = std::clamp((p.y - mesh.ys[j]) / (mesh.ys[j + 1] - mesh.ys[j]), 0.0, 1.0);
  const double fz = std::clamp((p.z - mesh.zs[k]) / (mesh.zs[k + 1] - mesh.zs[k]), 0.0, 1.0);
  double value = 0.0;
  for (int l = 0; l < 8; ++l) {
    const double w = ((l & 1) ? fx : 1.0 - fx) * ((l & 2) ? fy : 1.0 - fy) *
                     ((l & 4) ? fz : 1.0 - fz);
    value += w * state.theta[mesh.node_index(i + ((l & 1) ? 1 : 0), j + ((l & 2) ? 1 : 0),
                                             k + ((l & 4) ? 1 : 0))];
  }
  return value;
}

std::vector<std::pair<double, double>> line_profile_normalized(const ThermalState& state,
                                                               const StructuredMesh& mesh,
                                                               double depth_m, double y_m,
                                                               double alpha, double spacing) {
  require(spacing > 0.0, "spacing must be positive");
  std::vector<std::pair<double, double>> profile;
  profile.reserve(mesh.nx());
  for (double x : mesh.xs) {
    const double normalized = x / spacing - (alpha + 0.5);
    profile.emplace_back(normalized, evaluate_at(state, mesh, {x, y_m, depth_m}));
  }
  return profile;
}

std::vector<std::pair<double, double>> line_profile_at_fraction(const ThermalState& state,
                                                                const StructuredMesh& mesh,
                                                                double depth_fraction,
                                                                const LayoutSpec& layout) {
  require(depth_fraction >= 0.0 && depth_fraction <= 1.0,
          "profile depth fraction must lie in [0, 1]");
  const double alpha = 0.5 * (layout.footprint_x / layout.spacing - 1.0);
  return line_profile_normalized(state, mesh, depth_fraction * layout.depth,
                                 0.5 * layout.footprint_y, alpha, layout.spacing);
}

}  // namespace geoloop
