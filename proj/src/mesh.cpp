#include "geoloop/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace geoloop {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(message);
}

std::optional<std::size_t> find_coordinate(const std::vector<double>& planes, double c, double tol) {
  // Plane lists are short (tens of entries); a linear scan keeps the
  // tolerance handling trivial.
  for (std::size_t i = 0; i < planes.size(); ++i)
    if (std::abs(planes[i] - c) <= tol) return i;
  return std::nullopt;
}

// Fills one span [a, b] with n cells whose widths grade geometrically from
// both ends toward the middle (smallest cells at the ends, next to the
// required planes). ratio = 1 gives a uniform fill.
void fill_span(double a, double b, int n, double ratio, std::vector<double>& out) {
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int from_end = std::min(i, n - 1 - i);
    w[static_cast<std::size_t>(i)] = std::pow(ratio, from_end);
  }
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  double cum = 0.0;
  for (int i = 0; i < n - 1; ++i) {
    cum += w[static_cast<std::size_t>(i)];
    out.push_back(a + (b - a) * (cum / total));
  }
  out.push_back(b);  // exact, no accumulated rounding
}

}  // namespace

double StructuredMesh::coordinate_tolerance() const {
  const double extent = std::max({extent_x(), extent_y(), extent_z(), 1.0});
  return 1e-9 * extent;
}

std::optional<std::size_t> StructuredMesh::find_plane(int axis, double coordinate) const {
  const std::vector<double>& planes = axis == 0 ? xs : axis == 1 ? ys : zs;
  return find_coordinate(planes, coordinate, coordinate_tolerance());
}

std::optional<std::size_t> StructuredMesh::find_node(const Vec3& p) const {
  const auto i = find_plane(0, p.x);
  const auto j = find_plane(1, p.y);
  const auto k = find_plane(2, p.z);
  if (!i || !j || !k) return std::nullopt;
  return node_index(*i, *j, *k);
}

std::vector<double> build_graded_axis(const AxisSpec& spec) {
  require(spec.length > 0.0, "axis length must be positive");
  require(spec.target_cells >= 2, "axis target cell count must be >= 2");
  require(spec.grading_ratio >= 1.0, "grading ratio must be >= 1");

  // Collect the fixed planes: ends plus required planes, deduplicated.
  std::vector<double> fixed = {0.0, spec.length};
  const double tol = 1e-9 * std::max(spec.length, 1.0);
  for (double r : spec.required) {
    require(r >= -tol && r <= spec.length + tol,
            "required plane " + std::to_string(r) + " outside [0, length]");
    bool duplicate = false;
    for (double f : fixed)
      if (std::abs(f - r) <= tol) duplicate = true;
    if (!duplicate) fixed.push_back(r);
  }
  std::sort(fixed.begin(), fixed.end());

  // Distribute target cells over the spans proportionally to span length
  // (largest remainder, at least one cell per span).
  const std::size_t nspan = fixed.size() - 1;
  std::vector<int> cells(nspan, 1);
  std::vector<double> remainder(nspan, 0.0);
  int assigned = 0;
  for (std::size_t s = 0; s < nspan; ++s) {
    const double share =
        static_cast<double>(spec.target_cells) * (fixed[s + 1] - fixed[s]) / spec.length;
    cells[s] = std::max(1, static_cast<int>(std::floor(share)));
    remainder[s] = share - std::floor(share);
    assigned += cells[s];
  }
  std::vector<std::size_t> by_remainder(nspan);
  std::iota(by_remainder.begin(), by_remainder.end(), std::size_t{0});
  std::stable_sort(by_remainder.begin(), by_remainder.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t pick = 0; assigned < spec.target_cells; ++assigned, ++pick)
    ++cells[by_remainder[pick % nspan]];

  std::vector<double> planes = {0.0};
  for (std::size_t s = 0; s < nspan; ++s) fill_span(fixed[s], fixed[s + 1], cells[s], spec.grading_ratio, planes);

  for (std::size_t i = 1; i < planes.size(); ++i)
    require(planes[i] > planes[i - 1], "grid planes are not strictly increasing");
  return planes;
}

StructuredMesh build_graded_grid(const AxisSpec& x, const AxisSpec& y, const AxisSpec& z) {
  StructuredMesh mesh;
  mesh.xs = build_graded_axis(x);
  mesh.ys = build_graded_axis(y);
  mesh.zs = build_graded_axis(z);
  return mesh;
}

ChannelEdgeMap map_channel_to_edges(const StructuredMesh& mesh, const VascularNetwork& net) {
  validate_network(net);
  ChannelEdgeMap map;
  const double tol = mesh.coordinate_tolerance();

  for (std::size_t s = 0; s < net.segments.size(); ++s) {
    const auto& seg = net.segments[s];
    const Vec3 a = net.nodes[static_cast<std::size_t>(seg.from)];
    const Vec3 b = net.nodes[static_cast<std::size_t>(seg.to)];
    const Vec3 d = b - a;
    int axis;
    if (std::abs(d.x) > tol)
      axis = 0;
    else if (std::abs(d.y) > tol)
      axis = 1;
    else
      axis = 2;

    const auto ia = mesh.find_node(a);
    const auto ib = mesh.find_node(b);
    require(ia.has_value() && ib.has_value(),
            "channel segment " + std::to_string(s) + " endpoint does not lie on grid planes");

    // Walk the plane indices of the varying axis from a to b.
    const std::vector<double>& planes = axis == 0 ? mesh.xs : axis == 1 ? mesh.ys : mesh.zs;
    const double ca = axis == 0 ? a.x : axis == 1 ? a.y : a.z;
    const double cb = axis == 0 ? b.x : axis == 1 ? b.y : b.z;
    const std::size_t pa = *mesh.find_plane(axis, ca);
    const std::size_t pb = *mesh.find_plane(axis, cb);
    const int step = pb > pa ? 1 : -1;

    auto grid_node = [&](std::size_t plane) {
      Vec3 p = a;
      (axis == 0 ? p.x : axis == 1 ? p.y : p.z) = planes[plane];
      return *mesh.find_node(p);
    };

    for (std::size_t p = pa; p != pb; p = static_cast<std::size_t>(static_cast<long>(p) + step)) {
      const std::size_t q = static_cast<std::size_t>(static_cast<long>(p) + step);
      ChannelEdge e;
      e.upstream = grid_node(p);
      e.downstream = grid_node(q);
      e.length = std::abs(planes[q] - planes[p]);
      e.flow_fraction = seg.flow_fraction;
      map.edges.push_back(e);
    }
  }

  map.inlet_node = *mesh.find_node(net.nodes[static_cast<std::size_t>(net.inlet)]);
  map.outlet_node = *mesh.find_node(net.nodes[static_cast<std::size_t>(net.outlet)]);
  return map;
}

}  // namespace geoloop
