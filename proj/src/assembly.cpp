#include "geoloop/assembly.hpp"

#include <algorithm>
#include <cmath>

namespace geoloop {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(message);
}

constexpr double kGauss = 0.57735026918962576451;  // 1/sqrt(3), 2-point rule

// Local trilinear node l = li + 2*lj + 4*lk, li/lj/lk in {0, 1}.
struct CellShapes {
  // For each of the 8 Gauss points: shape values and physical gradients.
  std::array<std::array<double, 8>, 8> N;
  std::array<std::array<std::array<double, 3>, 8>, 8> dN;
};

CellShapes cell_shapes(double hx, double hy, double hz) {
  CellShapes s;
  const double g[2] = {-kGauss, kGauss};
  for (int gz = 0; gz < 2; ++gz)
    for (int gy = 0; gy < 2; ++gy)
      for (int gx = 0; gx < 2; ++gx) {
        const int q = gx + 2 * gy + 4 * gz;
        for (int l = 0; l < 8; ++l) {
          const double sx = (l & 1) ? 1.0 : -1.0;
          const double sy = (l & 2) ? 1.0 : -1.0;
          const double sz = (l & 4) ? 1.0 : -1.0;
          const double fx = 0.5 * (1.0 + sx * g[gx]);
          const double fy = 0.5 * (1.0 + sy * g[gy]);
          const double fz = 0.5 * (1.0 + sz * g[gz]);
          s.N[q][l] = fx * fy * fz;
          s.dN[q][l] = {sx * fy * fz / hx,   // d/dx: (sx/2) * fy * fz * (2/hx)
                        fx * sy * fz / hy, fx * fy * sz / hz};
        }
      }
  return s;
}

template <typename PerCell>
void for_each_cell(const StructuredMesh& mesh, PerCell&& fn) {
  std::size_t cell = 0;
  for (std::size_t k = 0; k + 1 < mesh.nz(); ++k)
    for (std::size_t j = 0; j + 1 < mesh.ny(); ++j)
      for (std::size_t i = 0; i + 1 < mesh.nx(); ++i, ++cell) {
        std::array<std::size_t, 8> nodes;
        for (int l = 0; l < 8; ++l)
          nodes[static_cast<std::size_t>(l)] =
              mesh.node_index(i + ((l & 1) ? 1 : 0), j + ((l & 2) ? 1 : 0), k + ((l & 4) ? 1 : 0));
        fn(cell, nodes, mesh.xs[i + 1] - mesh.xs[i], mesh.ys[j + 1] - mesh.ys[j],
           mesh.zs[k + 1] - mesh.zs[k]);
      }
}

// Boundary face cells of one domain face. Local node order la + 2*lb where
// (a, b) are the in-face axes in ascending axis order.
template <typename PerFaceCell>
void for_each_face_cell(const StructuredMesh& mesh, int face, PerFaceCell&& fn) {
  const int axis = face / 2;
  const bool at_max = (face % 2) == 1;
  const int a = axis == 0 ? 1 : 0;
  const int b = axis == 2 ? 1 : 2;
  const std::vector<double>* planes[3] = {&mesh.xs, &mesh.ys, &mesh.zs};
  const std::size_t fixed = at_max ? planes[axis]->size() - 1 : 0;
  const std::size_t na = planes[a]->size(), nb = planes[b]->size();

  for (std::size_t jb = 0; jb + 1 < nb; ++jb)
    for (std::size_t ja = 0; ja + 1 < na; ++ja) {
      std::array<std::size_t, 4> nodes;
      for (int l = 0; l < 4; ++l) {
        std::size_t idx[3];
        idx[axis] = fixed;
        idx[a] = ja + ((l & 1) ? 1 : 0);
        idx[b] = jb + ((l & 2) ? 1 : 0);
        nodes[static_cast<std::size_t>(l)] = mesh.node_index(idx[0], idx[1], idx[2]);
      }
      fn(nodes, (*planes[a])[ja + 1] - (*planes[a])[ja], (*planes[b])[jb + 1] - (*planes[b])[jb]);
    }
}

// Bilinear shapes at the four face Gauss points.
struct FaceShapes {
  std::array<std::array<double, 4>, 4> N;
};

const FaceShapes& face_shapes() {
  static const FaceShapes s = [] {
    FaceShapes out;
    const double g[2] = {-kGauss, kGauss};
    for (int gb = 0; gb < 2; ++gb)
      for (int ga = 0; ga < 2; ++ga) {
        const int q = ga + 2 * gb;
        for (int l = 0; l < 4; ++l) {
          const double sa = (l & 1) ? 1.0 : -1.0;
          const double sb = (l & 2) ? 1.0 : -1.0;
          out.N[q][l] = 0.25 * (1.0 + sa * g[ga]) * (1.0 + sb * g[gb]);
        }
      }
    return out;
  }();
  return s;
}

void validate_material(const MaterialField& m, const StructuredMesh& mesh) {
  require(m.rho_s > 0.0 && m.c_s > 0.0, "material density and heat capacity must be positive");
  for (double k : m.conductivity) require(k > 0.0, "conductivity entries must be positive");
  if (!m.conductivity_cells.empty()) {
    require(m.conductivity_cells.size() == mesh.cell_count(),
            "per-cell conductivity must cover every cell");
    for (const auto& kc : m.conductivity_cells)
      for (double k : kc) require(k > 0.0, "conductivity entries must be positive");
  }
}

}  // namespace

SparseOperator assemble_mass(const StructuredMesh& mesh, const MaterialField& material,
                             MassType type) {
  validate_material(material, mesh);
  SparseOperator M(mesh.node_count());
  const double rc = material.rho_s * material.c_s;
  for_each_cell(mesh, [&](std::size_t, const std::array<std::size_t, 8>& nodes, double hx,
                          double hy, double hz) {
    const CellShapes s = cell_shapes(hx, hy, hz);
    const double detJw = hx * hy * hz / 8.0;  // Gauss weights are 1 on [-1,1]^3
    double elem[8][8] = {};
    for (int q = 0; q < 8; ++q)
      for (int l = 0; l < 8; ++l)
        for (int m = 0; m < 8; ++m) elem[l][m] += rc * s.N[q][l] * s.N[q][m] * detJw;
    for (int l = 0; l < 8; ++l)
      for (int m = 0; m < 8; ++m) {
        if (type == MassType::Lumped) {
          M.add(nodes[static_cast<std::size_t>(l)], nodes[static_cast<std::size_t>(l)], elem[l][m]);
        } else {
          M.add(nodes[static_cast<std::size_t>(l)], nodes[static_cast<std::size_t>(m)], elem[l][m]);
        }
      }
  });
  M.finalize();
  return M;
}

SparseOperator assemble_conduction(const StructuredMesh& mesh, const MaterialField& material) {
  validate_material(material, mesh);
  SparseOperator A(mesh.node_count());
  for_each_cell(mesh, [&](std::size_t cell, const std::array<std::size_t, 8>& nodes, double hx,
                          double hy, double hz) {
    const CellShapes s = cell_shapes(hx, hy, hz);
    const std::array<double, 3> kc = material.cell_conductivity(cell);
    const double detJw = hx * hy * hz / 8.0;
    double elem[8][8] = {};
    for (int q = 0; q < 8; ++q)
      for (int l = 0; l < 8; ++l)
        for (int m = 0; m < 8; ++m)
          elem[l][m] += detJw * (kc[0] * s.dN[q][l][0] * s.dN[q][m][0] +
                                 kc[1] * s.dN[q][l][1] * s.dN[q][m][1] +
                                 kc[2] * s.dN[q][l][2] * s.dN[q][m][2]);
    for (int l = 0; l < 8; ++l)
      for (int m = 0; m < 8; ++m)
        A.add(nodes[static_cast<std::size_t>(l)], nodes[static_cast<std::size_t>(m)], elem[l][m]);
  });
  A.finalize();
  return A;
}

SparseOperator assemble_channel_advection(const StructuredMesh& mesh, const ChannelEdgeMap& channel,
                                          const ChannelCoupling& coupling) {
  require(coupling.chi >= 0.0, "channel heat capacity rate must be >= 0");
  require(coupling.upwind_blend >= 0.0 && coupling.upwind_blend <= 1.0,
          "upwind blend must lie in [0, 1]");
  SparseOperator C(mesh.node_count());
  const double beta = coupling.upwind_blend;
  for (const auto& e : channel.edges) {
    require(e.upstream < mesh.node_count() && e.downstream < mesh.node_count(),
            "channel edge node outside the mesh");
    require(e.upstream != e.downstream, "channel edge endpoints must differ");
    require(e.length > 0.0, "channel edge length must be positive");
    require(e.flow_fraction > 0.0 && e.flow_fraction <= 1.0 + 1e-12,
            "channel edge flow fraction outside (0, 1]");
    // Line advection chi_e * xi * dtheta/ds on linear edge elements: the
    // centered operator plus a symmetric positive-semidefinite upwind part.
    const double half = 0.5 * coupling.chi * e.flow_fraction;
    C.add(e.upstream, e.upstream, half * (beta - 1.0));
    C.add(e.upstream, e.downstream, half * (1.0 - beta));
    C.add(e.downstream, e.upstream, -half * (1.0 + beta));
    C.add(e.downstream, e.downstream, half * (1.0 + beta));
  }
  C.finalize();
  return C;
}

SurfaceOperator assemble_surface_linear(const StructuredMesh& mesh, const SurfaceBC& bc) {
  require(bc.h_convection >= 0.0, "convection coefficient must be >= 0");
  SurfaceOperator out{SparseOperator(mesh.node_count()),
                      std::vector<double>(mesh.node_count(), 0.0)};
  const FaceShapes& s = face_shapes();

  for (int face = 0; face < 6; ++face) {
    if (bc.faces[static_cast<std::size_t>(face)] == FaceCondition::ConvectRadiate) {
      for_each_face_cell(mesh, face, [&](const std::array<std::size_t, 4>& nodes, double ha,
                                         double hb) {
        const double detJw = ha * hb / 4.0;
        for (int q = 0; q < 4; ++q)
          for (int l = 0; l < 4; ++l) {
            const std::size_t gl = nodes[static_cast<std::size_t>(l)];
            out.rhs[gl] += bc.h_convection * bc.theta_ambient * s.N[q][l] * detJw;
            for (int m = 0; m < 4; ++m)
              out.matrix.add(gl, nodes[static_cast<std::size_t>(m)],
                             bc.h_convection * s.N[q][l] * s.N[q][m] * detJw);
          }
      });
    } else if (bc.faces[static_cast<std::size_t>(face)] == FaceCondition::Flux) {
      const double q_out = bc.flux[static_cast<std::size_t>(face)];
      if (q_out != 0.0) {
        for_each_face_cell(mesh, face,
                           [&](const std::array<std::size_t, 4>& nodes, double ha, double hb) {
                             // Load -integral xi*q^p, q^p positive outward.
                             for (const std::size_t gl : nodes) out.rhs[gl] -= q_out * ha * hb / 4.0;
                           });
      }
    }
  }
  out.matrix.finalize();
  return out;
}

void accumulate_radiation(const StructuredMesh& mesh, const SurfaceBC& bc,
                          const std::vector<double>& theta, std::vector<double>& residual,
                          SparseOperator* jacobian) {
  require(bc.emissivity >= 0.0 && bc.emissivity <= 1.0, "emissivity must lie in [0, 1]");
  require(theta.size() == mesh.node_count(), "temperature vector size mismatch");
  require(residual.size() == mesh.node_count(), "residual vector size mismatch");
  if (bc.emissivity == 0.0) return;

  const FaceShapes& s = face_shapes();
  const double es = bc.emissivity * kStefanBoltzmann;
  const double amb4 = std::pow(bc.theta_ambient, 4);

  for (int face = 0; face < 6; ++face) {
    if (bc.faces[static_cast<std::size_t>(face)] != FaceCondition::ConvectRadiate) continue;
    for_each_face_cell(mesh, face, [&](const std::array<std::size_t, 4>& nodes, double ha,
                                       double hb) {
      for (const std::size_t gl : nodes)
        require(theta[gl] > 0.0, "radiation requires positive absolute temperatures");
      const double detJw = ha * hb / 4.0;
      for (int q = 0; q < 4; ++q) {
        double theta_q = 0.0;
        for (int l = 0; l < 4; ++l) theta_q += s.N[q][l] * theta[nodes[static_cast<std::size_t>(l)]];
        const double r_q = es * (std::pow(theta_q, 4) - amb4) * detJw;
        const double j_q = es * 4.0 * std::pow(theta_q, 3) * detJw;
        for (int l = 0; l < 4; ++l) {
          const std::size_t gl = nodes[static_cast<std::size_t>(l)];
          residual[gl] += s.N[q][l] * r_q;
          if (jacobian == nullptr) continue;
          for (int m = 0; m < 4; ++m) {
            const std::size_t gm = nodes[static_cast<std::size_t>(m)];
            if (jacobian->finalized()) {
              double* slot = jacobian->find(gl, gm);
              require(slot != nullptr, "radiation Jacobian pattern is missing a face coupling");
              *slot += s.N[q][l] * j_q * s.N[q][m];
            } else {
              jacobian->add(gl, gm, s.N[q][l] * j_q * s.N[q][m]);
            }
          }
        }
      }
    });
  }
}

std::pair<std::vector<double>, SparseOperator> radiation_residual_jacobian(
    const StructuredMesh& mesh, const SurfaceBC& bc, const std::vector<double>& theta) {
  std::vector<double> residual(mesh.node_count(), 0.0);
  SparseOperator jacobian(mesh.node_count());
  accumulate_radiation(mesh, bc, theta, residual, &jacobian);
  jacobian.finalize();
  return {std::move(residual), std::move(jacobian)};
}

std::vector<double> assemble_volume_load(const StructuredMesh& mesh,
                                         const std::function<double(const Vec3&)>& density) {
  std::vector<double> load(mesh.node_count(), 0.0);
  for_each_cell(mesh, [&](std::size_t, const std::array<std::size_t, 8>& nodes, double hx,
                          double hy, double hz) {
    const CellShapes s = cell_shapes(hx, hy, hz);
    const double detJw = hx * hy * hz / 8.0;
    const Vec3 origin = mesh.node_position(nodes[0]);
    const double g[2] = {-kGauss, kGauss};
    for (int q = 0; q < 8; ++q) {
      const Vec3 p{origin.x + 0.5 * hx * (1.0 + g[q & 1]),
                   origin.y + 0.5 * hy * (1.0 + g[(q >> 1) & 1]),
                   origin.z + 0.5 * hz * (1.0 + g[(q >> 2) & 1])};
      const double f = density(p) * detJw;
      for (int l = 0; l < 8; ++l) load[nodes[static_cast<std::size_t>(l)]] += s.N[q][l] * f;
    }
  });
  return load;
}

std::vector<std::size_t> dirichlet_face_nodes(const StructuredMesh& mesh, const SurfaceBC& bc) {
  std::vector<char> tagged(mesh.node_count(), 0);
  for (int face = 0; face < 6; ++face) {
    if (bc.faces[static_cast<std::size_t>(face)] != FaceCondition::Dirichlet) continue;
    const int axis = face / 2;
    const std::size_t n[3] = {mesh.nx(), mesh.ny(), mesh.nz()};
    const std::size_t fixed = (face % 2) ? n[axis] - 1 : 0;
    const int a = axis == 0 ? 1 : 0;
    const int b = axis == 2 ? 1 : 2;
    for (std::size_t jb = 0; jb < n[b]; ++jb)
      for (std::size_t ja = 0; ja < n[a]; ++ja) {
        std::size_t idx[3];
        idx[axis] = fixed;
        idx[a] = ja;
        idx[b] = jb;
        tagged[mesh.node_index(idx[0], idx[1], idx[2])] = 1;
      }
  }
  std::vector<std::size_t> nodes;
  for (std::size_t i = 0; i < tagged.size(); ++i)
    if (tagged[i]) nodes.push_back(i);
  return nodes;
}

void apply_dirichlet(SparseOperator& matrix, std::vector<double>& rhs,
                     const std::vector<DirichletValue>& constraints) {
  require(matrix.finalized(), "apply_dirichlet() requires a finalized operator");
  require(rhs.size() == matrix.size(), "rhs size mismatch in apply_dirichlet()");
  std::vector<char> constrained(matrix.size(), 0);
  std::vector<double> values(matrix.size(), 0.0);
  for (const auto& c : constraints) {
    require(c.node < matrix.size(), "Dirichlet node index out of range");
    if (constrained[c.node])
      require(values[c.node] == c.value,
              "conflicting Dirichlet values at node " + std::to_string(c.node));
    constrained[c.node] = 1;
    values[c.node] = c.value;
  }
  matrix.eliminate_constrained(constrained, values, rhs);
}

}  // namespace geoloop
