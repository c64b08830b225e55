// Vascular layout construction: U-shaped and comb-shaped channel networks,
// flow-fraction assignment, and arc-length queries along the inlet->outlet spine.
#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace geoloop {

// Project-wide error type for invalid inputs and solver failures.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Coordinates in meters. z is positive downward with z = 0 at the ground
// surface, so the prescribed geothermal profile is simply m*z + theta_amb.
struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(double s, const Vec3& v) { return {s * v.x, s * v.y, s * v.z}; }
inline double norm(const Vec3& v) { return std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z); }

enum class LayoutKind { U, Comb };

struct LayoutSpec {
  LayoutKind kind = LayoutKind::U;
  double depth = 5000.0;           // m, depth of the horizontal run(s)
  double spacing = 3000.0;         // m, leg separation (U) / lateral pitch (Comb)
  double lateral_length = 3000.0;  // m, Comb only
  int n_laterals = 4;              // Comb only
  double footprint_x = 6000.0;     // domain Lx the layout must fit inside
  double footprint_y = 6000.0;     // domain Ly
};

// One directed channel segment. flow_fraction is the share of the total mass
// flow carried by this segment, in (0, 1].
struct ChannelSegment {
  int from = -1;
  int to = -1;
  double flow_fraction = 1.0;
};

// Directed graph of axis-aligned channel segments. Flow enters at `inlet`
// (in-degree 0) and leaves at `outlet` (out-degree 0).
struct VascularNetwork {
  std::vector<Vec3> nodes;
  std::vector<ChannelSegment> segments;
  int inlet = -1;
  int outlet = -1;

  double segment_length(const ChannelSegment& s) const {
    return norm(nodes[static_cast<std::size_t>(s.to)] - nodes[static_cast<std::size_t>(s.from)]);
  }
  double total_length() const;
};

VascularNetwork build_u_layout(const LayoutSpec& spec);
VascularNetwork build_comb_layout(const LayoutSpec& spec);
VascularNetwork build_layout(const LayoutSpec& spec);

// Recomputes flow fractions from the graph topology: every inlet->outlet path
// is weighted equally, so parallel laterals split the flow evenly and
// manifolds carry the partial sums required by conservation.
void assign_flow_fractions(VascularNetwork& network);

// Checks the structural invariants (axis-aligned positive-length segments,
// inlet/outlet degrees, connectivity, conservation). Throws Error on failure.
void validate_network(const VascularNetwork& network);

struct SpinePoint {
  Vec3 position;
  Vec3 tangent;  // unit vector pointing in the flow direction
};

// Arc length of the inlet->outlet spine. For branched layouts the spine
// follows the first constructed branch at each junction.
double spine_length(const VascularNetwork& network);

// Point and unit tangent at arc length s along the spine, s in [0, spine_length].
SpinePoint spine_at_arclength(const VascularNetwork& network, double s);

}  // namespace geoloop
