#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "geoloop/mesh.hpp"

using namespace geoloop;

namespace {

LayoutSpec table_u() {
  LayoutSpec spec;
  spec.kind = LayoutKind::U;
  spec.depth = 5000.0;
  spec.spacing = 3000.0;
  spec.footprint_x = 6000.0;
  spec.footprint_y = 6000.0;
  return spec;
}

// The Table-1 U layout on a grid with 1000 m z-planes.
StructuredMesh u_conforming_mesh() {
  return build_graded_grid({6000.0, {1500.0, 4500.0}, 4, 1.0}, {6000.0, {3000.0}, 2, 1.0},
                           {10000.0, {5000.0}, 10, 1.0});
}

}  // namespace

TEST_CASE("uniform fill between required planes") {
  const std::vector<double> xs = build_graded_axis({6000.0, {1500.0, 4500.0}, 4, 1.0});
  REQUIRE(xs.size() == 5);
  CHECK(xs[0] == 0.0);
  CHECK(xs[1] == 1500.0);
  CHECK(xs[2] == 3000.0);
  CHECK(xs[3] == 4500.0);
  CHECK(xs[4] == 6000.0);
}

TEST_CASE("required planes on the boundary do not duplicate") {
  const std::vector<double> xs = build_graded_axis({6000.0, {6000.0}, 3, 1.0});
  REQUIRE(xs.size() == 4);
  CHECK(xs == std::vector<double>{0.0, 2000.0, 4000.0, 6000.0});

  // Exact repeats in the required list collapse to one plane.
  const std::vector<double> ys = build_graded_axis({6000.0, {3000.0, 3000.0}, 2, 1.0});
  CHECK(ys == std::vector<double>{0.0, 3000.0, 6000.0});
}

TEST_CASE("out-of-range required planes are rejected") {
  CHECK_THROWS_AS(build_graded_axis({6000.0, {7000.0}, 4, 1.0}), Error);
  CHECK_THROWS_AS(build_graded_axis({6000.0, {-1.0}, 4, 1.0}), Error);
}

TEST_CASE("grading keeps cells monotone and bounded by the ratio") {
  const double ratio = 1.3;
  const std::vector<double> xs = build_graded_axis({6000.0, {1500.0, 4500.0}, 24, ratio});
  REQUIRE(xs.size() >= 5);
  CHECK(std::is_sorted(xs.begin(), xs.end()));
  CHECK(std::count(xs.begin(), xs.end(), 1500.0) == 1);
  CHECK(std::count(xs.begin(), xs.end(), 4500.0) == 1);

  // Within each span widths grow away from the ends by at most the ratio.
  std::vector<double> fixed = {0.0, 1500.0, 4500.0, 6000.0};
  for (std::size_t f = 0; f + 1 < fixed.size(); ++f) {
    const auto lo = std::find(xs.begin(), xs.end(), fixed[f]);
    const auto hi = std::find(xs.begin(), xs.end(), fixed[f + 1]);
    std::vector<double> widths;
    for (auto it = lo; it != hi; ++it) widths.push_back(*(it + 1) - *it);
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
      const double grow = widths[i + 1] / widths[i];
      CHECK(grow <= ratio + 1e-9);
      CHECK(grow >= 1.0 / ratio - 1e-9);
    }
    // Smallest cells hug the span ends where the channel planes sit.
    if (widths.size() >= 3) {
      CHECK(widths.front() <= widths[widths.size() / 2] + 1e-9);
      CHECK(widths.back() <= widths[widths.size() / 2] + 1e-9);
    }
  }
}

TEST_CASE("lexicographic node indexing round-trips") {
  const StructuredMesh mesh = u_conforming_mesh();
  REQUIRE(mesh.nx() == 5);
  REQUIRE(mesh.ny() == 3);
  REQUIRE(mesh.nz() == 11);
  CHECK(mesh.node_count() == 5 * 3 * 11);

  const std::size_t idx = mesh.node_index(2, 1, 4);
  CHECK(idx == 2 + 5 * (1 + 3 * 4));
  const Vec3 p = mesh.node_position(idx);
  CHECK(p.x == mesh.xs[2]);
  CHECK(p.y == mesh.ys[1]);
  CHECK(p.z == mesh.zs[4]);

  CHECK(mesh.find_node({1500.0, 3000.0, 5000.0}).has_value());
  CHECK(!mesh.find_node({1501.0, 3000.0, 5000.0}).has_value());
}

TEST_CASE("channel segments decompose into oriented grid edges") {
  const StructuredMesh mesh = u_conforming_mesh();
  const VascularNetwork net = build_u_layout(table_u());
  const ChannelEdgeMap map = map_channel_to_edges(mesh, net);

  // 5 down the inlet leg (1000 m z planes), 2 across, 5 back up.
  REQUIRE(map.edges.size() == 12);
  CHECK(map.total_length() == doctest::Approx(13000.0).epsilon(1e-12));
  CHECK(mesh.node_position(map.inlet_node).z == 0.0);
  CHECK(mesh.node_position(map.inlet_node).x == 1500.0);
  CHECK(mesh.node_position(map.outlet_node).x == 4500.0);

  int down = 0, along = 0, up = 0;
  for (const auto& e : map.edges) {
    const Vec3 a = mesh.node_position(e.upstream);
    const Vec3 b = mesh.node_position(e.downstream);
    CHECK(e.flow_fraction == 1.0);
    CHECK(e.length > 0.0);
    if (b.z > a.z) ++down;
    if (b.x > a.x) ++along;
    if (b.z < a.z) ++up;
  }
  CHECK(down == 5);
  CHECK(along == 2);
  CHECK(up == 5);
}

TEST_CASE("edge mapping requires a conforming mesh") {
  // No z-plane at the 5000 m horizontal run: the leg cannot land on a node.
  const StructuredMesh coarse = build_graded_grid(
      {6000.0, {1500.0, 4500.0}, 4, 1.0}, {6000.0, {3000.0}, 2, 1.0}, {10000.0, {}, 3, 1.0});
  const VascularNetwork net = build_u_layout(table_u());
  CHECK_THROWS_WITH_AS(map_channel_to_edges(coarse, net),
                       doctest::Contains("segment"), Error);
}

TEST_CASE("mapped edges are grid edges and conserve length") {
  const StructuredMesh mesh = build_graded_grid({6000.0, {1500.0, 4500.0}, 12, 1.2},
                                                {6000.0, {3000.0}, 8, 1.2},
                                                {10000.0, {5000.0}, 14, 1.2});
  const VascularNetwork net = build_u_layout(table_u());
  const ChannelEdgeMap map = map_channel_to_edges(mesh, net);

  double mapped = 0.0;
  for (const auto& e : map.edges) {
    const Vec3 a = mesh.node_position(e.upstream);
    const Vec3 b = mesh.node_position(e.downstream);
    // Endpoints differ along exactly one axis by exactly one plane.
    int moved = 0;
    if (a.x != b.x) ++moved;
    if (a.y != b.y) ++moved;
    if (a.z != b.z) ++moved;
    CHECK(moved == 1);
    const std::size_t ia = e.upstream, ib = e.downstream;
    const long long di = static_cast<long long>(ib % mesh.nx()) - static_cast<long long>(ia % mesh.nx());
    const long long dj = static_cast<long long>((ib / mesh.nx()) % mesh.ny()) -
                         static_cast<long long>((ia / mesh.nx()) % mesh.ny());
    const long long dk = static_cast<long long>(ib / (mesh.nx() * mesh.ny())) -
                         static_cast<long long>(ia / (mesh.nx() * mesh.ny()));
    CHECK(std::abs(di) + std::abs(dj) + std::abs(dk) == 1);
    CHECK(e.length == doctest::Approx(norm(b - a)).epsilon(1e-12));
    mapped += e.length;
  }
  CHECK(mapped == doctest::Approx(net.total_length()).epsilon(1e-9));
}

TEST_CASE("grid construction is deterministic") {
  const StructuredMesh a = u_conforming_mesh();
  const StructuredMesh b = u_conforming_mesh();
  CHECK(a.xs == b.xs);
  CHECK(a.ys == b.ys);
  CHECK(a.zs == b.zs);
}
