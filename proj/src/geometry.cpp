#include "geoloop/geometry.hpp"

#include <algorithm>
#include <map>
#include <tuple>

namespace geoloop {

namespace {

constexpr double kAxisTol = 1e-9;  // segments are axis-aligned by construction

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(message);
}

// Deduplicating node builder so junction nodes are shared between segments.
class NetworkBuilder {
 public:
  int node(double x, double y, double z) {
    auto key = std::make_tuple(x, y, z);
    auto it = index_.find(key);
    if (it != index_.end()) return it->second;
    int id = static_cast<int>(net_.nodes.size());
    net_.nodes.push_back({x, y, z});
    index_.emplace(key, id);
    return id;
  }

  void segment(int from, int to) { net_.segments.push_back({from, to, 1.0}); }

  VascularNetwork take() { return std::move(net_); }

 private:
  VascularNetwork net_;
  std::map<std::tuple<double, double, double>, int> index_;
};

int axis_of(const Vec3& d) {
  const double ax = std::abs(d.x), ay = std::abs(d.y), az = std::abs(d.z);
  int nonzero = (ax > kAxisTol) + (ay > kAxisTol) + (az > kAxisTol);
  if (nonzero != 1) return -1;
  if (ax > kAxisTol) return 0;
  if (ay > kAxisTol) return 1;
  return 2;
}

// Number of inlet->outlet paths through each node, used both for flow
// fractions and for connectivity checks. Returns {from_inlet, to_outlet}.
std::pair<std::vector<double>, std::vector<double>> path_counts(const VascularNetwork& net) {
  const std::size_t n = net.nodes.size();
  std::vector<std::vector<std::size_t>> out(n), in(n);
  for (std::size_t s = 0; s < net.segments.size(); ++s) {
    out[static_cast<std::size_t>(net.segments[s].from)].push_back(s);
    in[static_cast<std::size_t>(net.segments[s].to)].push_back(s);
  }

  // Kahn topological order; the network must be acyclic.
  std::vector<int> indeg(n, 0);
  for (const auto& s : net.segments) ++indeg[static_cast<std::size_t>(s.to)];
  std::vector<std::size_t> order;
  order.reserve(n);
  for (std::size_t u = 0; u < n; ++u)
    if (indeg[u] == 0) order.push_back(u);
  for (std::size_t head = 0; head < order.size(); ++head) {
    for (std::size_t s : out[order[head]]) {
      std::size_t v = static_cast<std::size_t>(net.segments[s].to);
      if (--indeg[v] == 0) order.push_back(v);
    }
  }
  require(order.size() == n, "channel network contains a cycle");

  std::vector<double> from_inlet(n, 0.0), to_outlet(n, 0.0);
  from_inlet[static_cast<std::size_t>(net.inlet)] = 1.0;
  for (std::size_t u : order)
    for (std::size_t s : out[u]) from_inlet[static_cast<std::size_t>(net.segments[s].to)] += from_inlet[u];
  to_outlet[static_cast<std::size_t>(net.outlet)] = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it)
    for (std::size_t s : out[*it]) to_outlet[*it] += to_outlet[static_cast<std::size_t>(net.segments[s].to)];
  return {from_inlet, to_outlet};
}

}  // namespace

double VascularNetwork::total_length() const {
  double sum = 0.0;
  for (const auto& s : segments) sum += segment_length(s);
  return sum;
}

VascularNetwork build_u_layout(const LayoutSpec& spec) {
  require(spec.depth > 0.0, "layout depth must be positive");
  require(spec.spacing > 0.0 && spec.spacing < spec.footprint_x,
          "layout spacing must satisfy 0 < spacing < footprint_x");
  require(spec.footprint_y > 0.0, "layout footprint_y must be positive");

  const double x_in = 0.5 * (spec.footprint_x - spec.spacing);
  const double x_out = x_in + spec.spacing;
  const double y_mid = 0.5 * spec.footprint_y;

  NetworkBuilder b;
  int top_in = b.node(x_in, y_mid, 0.0);
  int bottom_in = b.node(x_in, y_mid, spec.depth);
  int bottom_out = b.node(x_out, y_mid, spec.depth);
  int top_out = b.node(x_out, y_mid, 0.0);
  b.segment(top_in, bottom_in);
  b.segment(bottom_in, bottom_out);
  b.segment(bottom_out, top_out);

  VascularNetwork net = b.take();
  net.inlet = top_in;
  net.outlet = top_out;
  assign_flow_fractions(net);
  validate_network(net);
  return net;
}

VascularNetwork build_comb_layout(const LayoutSpec& spec) {
  require(spec.depth > 0.0, "layout depth must be positive");
  require(spec.n_laterals >= 1, "layout n_laterals must be >= 1");
  require(spec.lateral_length > 0.0 && spec.lateral_length < spec.footprint_x,
          "layout lateral_length must satisfy 0 < lateral_length < footprint_x");
  require(spec.spacing > 0.0, "layout spacing must be positive");
  require(static_cast<double>(spec.n_laterals) * spec.spacing <= spec.footprint_y,
          "layout n_laterals * spacing must fit inside footprint_y");

  const int n = spec.n_laterals;
  const double x_in = 0.5 * (spec.footprint_x - spec.lateral_length);
  const double x_out = x_in + spec.lateral_length;
  const double y_mid = 0.5 * spec.footprint_y;
  const double d = spec.depth;

  // Laterals sit at y_mid + (i - (n-1)/2) * spacing, centered on the feed.
  std::vector<double> ys(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    ys[static_cast<std::size_t>(i)] = y_mid + (i - 0.5 * (n - 1)) * spec.spacing;
  require(ys.front() > 0.0 && ys.back() < spec.footprint_y,
          "comb laterals must lie strictly inside footprint_y");

  NetworkBuilder b;
  int top_in = b.node(x_in, y_mid, 0.0);
  int j_in = b.node(x_in, y_mid, d);
  int j_out = b.node(x_out, y_mid, d);
  int top_out = b.node(x_out, y_mid, 0.0);

  b.segment(top_in, j_in);

  // Supply manifold: center-fed chains walking outward from the feed.
  std::vector<double> minus_side, plus_side;  // both ordered moving away from y_mid
  for (int i = n - 1; i >= 0; --i)
    if (ys[static_cast<std::size_t>(i)] < y_mid) minus_side.push_back(ys[static_cast<std::size_t>(i)]);
  for (int i = 0; i < n; ++i)
    if (ys[static_cast<std::size_t>(i)] > y_mid) plus_side.push_back(ys[static_cast<std::size_t>(i)]);

  for (const auto& side : {minus_side, plus_side}) {
    int prev = j_in;
    for (double y : side) {
      int station = b.node(x_in, y, d);
      b.segment(prev, station);
      prev = station;
    }
  }

  // Laterals, ascending in y.
  for (double y : ys) b.segment(b.node(x_in, y, d), b.node(x_out, y, d));

  // Return manifold: chains walking inward toward the outlet riser.
  for (const auto& side : {minus_side, plus_side}) {
    for (std::size_t i = side.size(); i-- > 0;) {
      int from = b.node(x_out, side[i], d);
      int to = (i == 0) ? j_out : b.node(x_out, side[i - 1], d);
      b.segment(from, to);
    }
  }

  b.segment(j_out, top_out);

  VascularNetwork net = b.take();
  net.inlet = top_in;
  net.outlet = top_out;
  assign_flow_fractions(net);
  validate_network(net);
  return net;
}

VascularNetwork build_layout(const LayoutSpec& spec) {
  return spec.kind == LayoutKind::U ? build_u_layout(spec) : build_comb_layout(spec);
}

void assign_flow_fractions(VascularNetwork& net) {
  require(net.inlet >= 0 && net.outlet >= 0, "network inlet/outlet must be set");
  auto [from_inlet, to_outlet] = path_counts(net);
  const double total = from_inlet[static_cast<std::size_t>(net.outlet)];
  require(total > 0.0, "no inlet->outlet path exists");
  for (auto& s : net.segments) {
    s.flow_fraction =
        from_inlet[static_cast<std::size_t>(s.from)] * to_outlet[static_cast<std::size_t>(s.to)] / total;
    require(s.flow_fraction > 0.0, "segment carries no flow (dangling branch)");
  }
}

void validate_network(const VascularNetwork& net) {
  const std::size_t n = net.nodes.size();
  require(n >= 2, "network needs at least two nodes");
  require(net.inlet >= 0 && static_cast<std::size_t>(net.inlet) < n, "invalid inlet node index");
  require(net.outlet >= 0 && static_cast<std::size_t>(net.outlet) < n, "invalid outlet node index");
  require(net.inlet != net.outlet, "inlet and outlet must be distinct");

  std::vector<double> in_sum(n, 0.0), out_sum(n, 0.0);
  std::vector<int> in_deg(n, 0), out_deg(n, 0);
  for (const auto& s : net.segments) {
    require(s.from >= 0 && static_cast<std::size_t>(s.from) < n, "segment endpoint out of range");
    require(s.to >= 0 && static_cast<std::size_t>(s.to) < n, "segment endpoint out of range");
    const Vec3 d = net.nodes[static_cast<std::size_t>(s.to)] - net.nodes[static_cast<std::size_t>(s.from)];
    require(axis_of(d) >= 0, "segment is not axis-aligned or has zero length");
    require(s.flow_fraction > 0.0 && s.flow_fraction <= 1.0 + 1e-12,
            "segment flow fraction outside (0, 1]");
    out_sum[static_cast<std::size_t>(s.from)] += s.flow_fraction;
    in_sum[static_cast<std::size_t>(s.to)] += s.flow_fraction;
    ++out_deg[static_cast<std::size_t>(s.from)];
    ++in_deg[static_cast<std::size_t>(s.to)];
  }

  require(in_deg[static_cast<std::size_t>(net.inlet)] == 0, "inlet must have in-degree 0");
  require(out_deg[static_cast<std::size_t>(net.outlet)] == 0, "outlet must have out-degree 0");
  require(std::abs(out_sum[static_cast<std::size_t>(net.inlet)] - 1.0) < 1e-12,
          "flow leaving the inlet must sum to 1");
  require(std::abs(in_sum[static_cast<std::size_t>(net.outlet)] - 1.0) < 1e-12,
          "flow entering the outlet must sum to 1");

  auto [from_inlet, to_outlet] = path_counts(net);
  for (std::size_t u = 0; u < n; ++u) {
    require(from_inlet[u] > 0.0 && to_outlet[u] > 0.0,
            "node " + std::to_string(u) + " is not on any inlet->outlet path");
    if (u == static_cast<std::size_t>(net.inlet) || u == static_cast<std::size_t>(net.outlet)) continue;
    require(std::abs(in_sum[u] - out_sum[u]) < 1e-12,
            "flow is not conserved at node " + std::to_string(u));
  }
}

namespace {

// The spine is the inlet->outlet polyline obtained by taking the first
// constructed outgoing segment at every junction.
std::vector<const ChannelSegment*> spine_segments(const VascularNetwork& net) {
  std::vector<const ChannelSegment*> path;
  int at = net.inlet;
  std::vector<char> visited(net.nodes.size(), 0);
  while (at != net.outlet) {
    require(!visited[static_cast<std::size_t>(at)], "spine walk revisited a node");
    visited[static_cast<std::size_t>(at)] = 1;
    const ChannelSegment* next = nullptr;
    for (const auto& s : net.segments)
      if (s.from == at) {
        next = &s;
        break;
      }
    require(next != nullptr, "spine walk reached a dead end before the outlet");
    path.push_back(next);
    at = next->to;
  }
  require(!path.empty(), "network has an empty spine");
  return path;
}

}  // namespace

double spine_length(const VascularNetwork& net) {
  double sum = 0.0;
  for (const auto* s : spine_segments(net)) sum += net.segment_length(*s);
  return sum;
}

SpinePoint spine_at_arclength(const VascularNetwork& net, double s) {
  const auto path = spine_segments(net);
  double total = 0.0;
  for (const auto* seg : path) total += net.segment_length(*seg);
  require(s >= 0.0 && s <= total * (1.0 + 1e-12),
          "arc length query outside [0, spine length]");
  s = std::min(s, total);

  double walked = 0.0;
  for (std::size_t i = 0; i < path.size(); ++i) {
    const double len = net.segment_length(*path[i]);
    const bool last = (i + 1 == path.size());
    // At a shared node the tangent of the outgoing segment wins (flow direction).
    if (s < walked + len || last) {
      const Vec3 a = net.nodes[static_cast<std::size_t>(path[i]->from)];
      const Vec3 b = net.nodes[static_cast<std::size_t>(path[i]->to)];
      const Vec3 t = (1.0 / len) * (b - a);
      const double local = std::clamp(s - walked, 0.0, len);
      return {a + local * t, t};
    }
    walked += len;
  }
  throw Error("arc length walk failed");  // unreachable
}

}  // namespace geoloop
