// Structured hexahedral grids with axis plane lists, graded refinement toward
// required planes, and decomposition of channel segments into grid edges.
#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "geoloop/geometry.hpp"

namespace geoloop {

// Tensor-product grid: node (i, j, k) sits at (xs[i], ys[j], zs[k]) and has
// linear index i + nx*j + nx*ny*k (x fastest).
struct StructuredMesh {
  std::vector<double> xs, ys, zs;  // strictly increasing plane coordinates

  std::size_t nx() const { return xs.size(); }
  std::size_t ny() const { return ys.size(); }
  std::size_t nz() const { return zs.size(); }
  std::size_t node_count() const { return nx() * ny() * nz(); }
  std::size_t cell_count() const { return (nx() - 1) * (ny() - 1) * (nz() - 1); }

  std::size_t node_index(std::size_t i, std::size_t j, std::size_t k) const {
    return i + nx() * (j + ny() * k);
  }
  Vec3 node_position(std::size_t index) const {
    const std::size_t i = index % nx();
    const std::size_t j = (index / nx()) % ny();
    const std::size_t k = index / (nx() * ny());
    return {xs[i], ys[j], zs[k]};
  }

  double extent_x() const { return xs.back() - xs.front(); }
  double extent_y() const { return ys.back() - ys.front(); }
  double extent_z() const { return zs.back() - zs.front(); }

  // Coordinate matching tolerance used for plane and node lookups.
  double coordinate_tolerance() const;
  std::optional<std::size_t> find_plane(int axis, double coordinate) const;
  std::optional<std::size_t> find_node(const Vec3& p) const;
};

// One axis of a graded grid. `required` lists plane coordinates the grid must
// contain exactly (channel stations, depth levels); they may include 0 or
// `length`. Cells shrink geometrically toward the required planes with the
// given ratio between neighboring cell widths.
struct AxisSpec {
  double length = 0.0;
  std::vector<double> required;
  int target_cells = 2;
  double grading_ratio = 1.0;
};

std::vector<double> build_graded_axis(const AxisSpec& spec);
StructuredMesh build_graded_grid(const AxisSpec& x, const AxisSpec& y, const AxisSpec& z);

// Channel segment decomposed into consecutive grid edges. Nodes are mesh
// linear indices ordered along the flow direction.
struct ChannelEdge {
  std::size_t upstream = 0;
  std::size_t downstream = 0;
  double length = 0.0;
  double flow_fraction = 1.0;
};

struct ChannelEdgeMap {
  std::vector<ChannelEdge> edges;
  std::size_t outlet_node = 0;  // mesh index of the network outlet
  std::size_t inlet_node = 0;   // mesh index of the network inlet
  double total_length() const {
    double sum = 0.0;
    for (const auto& e : edges) sum += e.length;
    return sum;
  }
};

// Maps every network segment onto the chain of grid edges it covers. All
// network nodes must coincide with grid planes (the grid is built with the
// channel coordinates as required planes), otherwise an Error names the
// offending segment.
ChannelEdgeMap map_channel_to_edges(const StructuredMesh& mesh, const VascularNetwork& network);

}  // namespace geoloop
