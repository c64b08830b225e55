// Finite element operator assembly on trilinear hexahedra: mass, conduction,
// channel advection along grid edge chains, boundary convection/radiation and
// prescribed-flux loads, and Dirichlet constraint application.
#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "geoloop/mesh.hpp"
#include "geoloop/sparse.hpp"

namespace geoloop {

constexpr double kStefanBoltzmann = 5.67e-8;  // W/(m^2 K^4)

// Solid properties. Conductivity is a diagonal tensor; `conductivity_cells`
// overrides it per cell (lexicographic cell order) when non-empty.
struct MaterialField {
  double rho_s = 2500.0;  // kg/m^3
  double c_s = 790.0;     // J/(kg K)
  std::array<double, 3> conductivity = {3.5, 3.5, 3.5};  // W/(m K)
  std::vector<std::array<double, 3>> conductivity_cells;

  std::array<double, 3> cell_conductivity(std::size_t cell) const {
    return conductivity_cells.empty() ? conductivity : conductivity_cells[cell];
  }
};

enum class FaceCondition { Dirichlet, Flux, ConvectRadiate };

// Domain face order: x=0, x=Lx, y=0, y=Ly, z=0 (top), z=Lz (bottom).
enum Face : int { kXMin = 0, kXMax, kYMin, kYMax, kZMin, kZMax };

struct SurfaceBC {
  std::array<FaceCondition, 6> faces = {FaceCondition::Dirichlet, FaceCondition::Dirichlet,
                                        FaceCondition::Dirichlet, FaceCondition::Dirichlet,
                                        FaceCondition::ConvectRadiate, FaceCondition::Dirichlet};
  double geothermal_gradient = 0.03;  // K/m, z positive downward
  double theta_ambient = 303.15;      // K
  double theta_inlet = 303.15;        // K
  double h_convection = 0.5;          // W/(m^2 K)
  double emissivity = 0.9;            // dimensionless, in [0, 1]
  std::array<double, 6> flux = {0, 0, 0, 0, 0, 0};  // outward q^p on Flux faces, W/m^2

  // Undisturbed geothermal profile, also the default Dirichlet value.
  double prescribed(double z) const { return geothermal_gradient * z + theta_ambient; }
};

// Channel strength: chi = mdot * c_f is the heat capacity rate of the loop;
// each edge carries chi * flow_fraction. upwind_blend in [0, 1] blends the
// centered line-advection operator (0) with full upwinding (1).
struct ChannelCoupling {
  double chi = 0.0;           // W/K
  double upwind_blend = 1.0;
};

enum class MassType { Consistent, Lumped };

SparseOperator assemble_mass(const StructuredMesh& mesh, const MaterialField& material,
                             MassType type = MassType::Consistent);
SparseOperator assemble_conduction(const StructuredMesh& mesh, const MaterialField& material);
SparseOperator assemble_channel_advection(const StructuredMesh& mesh, const ChannelEdgeMap& channel,
                                          const ChannelCoupling& coupling);

struct SurfaceOperator {
  SparseOperator matrix;    // h_T * mass on ConvectRadiate faces
  std::vector<double> rhs;  // h_T*theta_amb loads minus prescribed-flux loads
};

SurfaceOperator assemble_surface_linear(const StructuredMesh& mesh, const SurfaceBC& bc);

// Radiation residual r(theta) = eps*sigma*integral xi*(theta^4 - theta_amb^4)
// over ConvectRadiate faces, and its consistent Jacobian. accumulate_radiation
// adds into an existing residual vector and (optionally) a finalized Jacobian
// whose pattern contains the face couplings.
void accumulate_radiation(const StructuredMesh& mesh, const SurfaceBC& bc,
                          const std::vector<double>& theta, std::vector<double>& residual,
                          SparseOperator* jacobian);
std::pair<std::vector<double>, SparseOperator> radiation_residual_jacobian(
    const StructuredMesh& mesh, const SurfaceBC& bc, const std::vector<double>& theta);

// Volumetric load integral xi*f over the domain for a given source density
// f(x, t) in W/m^3 (verification runs use this for manufactured solutions).
std::vector<double> assemble_volume_load(const StructuredMesh& mesh,
                                         const std::function<double(const Vec3&)>& density);

struct DirichletValue {
  std::size_t node = 0;
  double value = 0.0;
};

// Nodes on Dirichlet-tagged faces, deduplicated and sorted.
std::vector<std::size_t> dirichlet_face_nodes(const StructuredMesh& mesh, const SurfaceBC& bc);

// Row replacement with column elimination: constrained rows become identity
// with rhs = value, and the constrained columns are folded into the rhs so the
// remaining equations keep their meaning. The operator must be finalized.
void apply_dirichlet(SparseOperator& matrix, std::vector<double>& rhs,
                     const std::vector<DirichletValue>& constraints);

}  // namespace geoloop
