#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include "geoloop/assembly.hpp"
#include "geoloop/geometry.hpp"
#include "geoloop/mesh.hpp"

using namespace geoloop;

namespace {

StructuredMesh unit_cube() {
  StructuredMesh mesh;
  mesh.xs = {0.0, 1.0};
  mesh.ys = {0.0, 1.0};
  mesh.zs = {0.0, 1.0};
  return mesh;
}

// Independent element-stiffness oracle: 2x2x2 Gauss quadrature of
// k . grad(N_i) . grad(N_j) on a single [0,hx]x[0,hy]x[0,hz] cell, written
// from the trilinear shape functions directly.
std::array<std::array<double, 8>, 8> stiffness_oracle(double hx, double hy, double hz,
                                                      const std::array<double, 3>& k) {
  std::array<std::array<double, 8>, 8> K{};
  const double g = 1.0 / std::sqrt(3.0);
  for (int qa = 0; qa < 2; ++qa)
    for (int qb = 0; qb < 2; ++qb)
      for (int qc = 0; qc < 2; ++qc) {
        const double x = 0.5 * (1.0 + (qa ? g : -g));  // unit coordinates
        const double y = 0.5 * (1.0 + (qb ? g : -g));
        const double z = 0.5 * (1.0 + (qc ? g : -g));
        const double w = hx * hy * hz / 8.0;
        std::array<std::array<double, 3>, 8> grad;
        for (int n = 0; n < 8; ++n) {
          const double sx = (n & 1) ? 1.0 : -1.0;
          const double sy = (n & 2) ? 1.0 : -1.0;
          const double sz = (n & 4) ? 1.0 : -1.0;
          const double fx = (n & 1) ? x : 1.0 - x;
          const double fy = (n & 2) ? y : 1.0 - y;
          const double fz = (n & 4) ? z : 1.0 - z;
          grad[static_cast<std::size_t>(n)] = {sx * fy * fz / hx, fx * sy * fz / hy,
                                               fx * fy * sz / hz};
        }
        for (int i = 0; i < 8; ++i)
          for (int j = 0; j < 8; ++j)
            for (int d = 0; d < 3; ++d)
              K[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] +=
                  w * k[static_cast<std::size_t>(d)] *
                  grad[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)] *
                  grad[static_cast<std::size_t>(j)][static_cast<std::size_t>(d)];
      }
  return K;
}

double entry_sum(const SparseOperator& A) {
  double sum = 0.0;
  for (double s : A.row_sums()) sum += s;
  return sum;
}

SurfaceBC flux_only_bc() {
  SurfaceBC bc;
  bc.faces = {FaceCondition::Flux, FaceCondition::Flux, FaceCondition::Flux,
              FaceCondition::Flux, FaceCondition::Flux, FaceCondition::Flux};
  bc.flux = {0, 0, 0, 0, 0, 0};
  return bc;
}

}  // namespace

TEST_CASE("consistent mass reproduces the trilinear element integrals") {
  MaterialField mat;
  mat.rho_s = 1.0;
  mat.c_s = 1.0;
  const SparseOperator M = assemble_mass(unit_cube(), mat, MassType::Consistent);

  CHECK(entry_sum(M) == doctest::Approx(1.0).epsilon(1e-14));  // total heat capacity
  CHECK(M.is_symmetric(1e-14));

  // Same corner, edge neighbor, face diagonal, body diagonal.
  CHECK(*M.find(0, 0) == doctest::Approx(1.0 / 27.0).epsilon(1e-14));
  CHECK(*M.find(0, 1) == doctest::Approx(1.0 / 54.0).epsilon(1e-14));
  CHECK(*M.find(0, 3) == doctest::Approx(1.0 / 108.0).epsilon(1e-14));
  CHECK(*M.find(0, 7) == doctest::Approx(1.0 / 216.0).epsilon(1e-14));
}

TEST_CASE("lumped mass concentrates each row on the diagonal") {
  MaterialField mat;
  mat.rho_s = 1.0;
  mat.c_s = 1.0;
  const SparseOperator M = assemble_mass(unit_cube(), mat, MassType::Lumped);
  CHECK(M.nnz() == 8);
  for (std::size_t i = 0; i < 8; ++i)
    CHECK(*M.find(i, i) == doctest::Approx(1.0 / 8.0).epsilon(1e-14));
}

TEST_CASE("mass scales with volume and heat capacity") {
  StructuredMesh two = unit_cube();
  two.zs = {0.0, 1.0, 2.0};
  MaterialField mat;
  mat.rho_s = 2500.0;
  mat.c_s = 790.0;
  const SparseOperator M = assemble_mass(two, mat);
  CHECK(entry_sum(M) == doctest::Approx(2500.0 * 790.0 * 2.0).epsilon(1e-13));
}

TEST_CASE("unit-cube conduction matches the analytic trilinear stiffness") {
  MaterialField mat;
  mat.conductivity = {1.0, 1.0, 1.0};
  const SparseOperator A = assemble_conduction(unit_cube(), mat);

  CHECK(*A.find(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));   // diagonal
  CHECK(std::abs(A.find(0, 1) ? *A.find(0, 1) : 0.0) <= 1e-15);        // edge neighbor
  CHECK(*A.find(0, 3) == doctest::Approx(-1.0 / 12.0).epsilon(1e-14)); // face diagonal
  CHECK(*A.find(0, 7) == doctest::Approx(-1.0 / 12.0).epsilon(1e-14)); // body diagonal

  for (double s : A.row_sums()) CHECK(std::abs(s) <= 1e-12);
  CHECK(A.is_symmetric(1e-12));
}

TEST_CASE("anisotropic conduction matches the quadrature oracle entrywise") {
  StructuredMesh mesh;
  mesh.xs = {0.0, 0.7};
  mesh.ys = {0.0, 1.3};
  mesh.zs = {0.0, 2.1};
  MaterialField mat;
  mat.conductivity = {2.0, 1.0, 1.0};

  const SparseOperator A = assemble_conduction(mesh, mat);
  const auto K = stiffness_oracle(0.7, 1.3, 2.1, mat.conductivity);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j) {
      const double got = A.find(i, j) ? *A.find(i, j) : 0.0;
      CHECK(got == doctest::Approx(K[i][j]).epsilon(1e-13));
    }
}

TEST_CASE("per-cell conductivity overrides are additive") {
  StructuredMesh two = unit_cube();
  two.zs = {0.0, 1.0, 2.0};
  MaterialField mixed;
  mixed.conductivity_cells = {{1.0, 1.0, 1.0}, {3.0, 3.0, 3.0}};

  const SparseOperator A = assemble_conduction(two, mixed);
  // The shared plane sees both cells; a pure z=0 corner only the first.
  const auto K1 = stiffness_oracle(1.0, 1.0, 1.0, {1.0, 1.0, 1.0});
  const auto K3 = stiffness_oracle(1.0, 1.0, 1.0, {3.0, 3.0, 3.0});
  CHECK(*A.find(0, 0) == doctest::Approx(K1[0][0]).epsilon(1e-13));
  const std::size_t mid = two.node_index(0, 0, 1);
  CHECK(*A.find(mid, mid) == doctest::Approx(K1[4][4] + K3[0][0]).epsilon(1e-13));
  for (double s : A.row_sums()) CHECK(std::abs(s) <= 1e-12);
}

TEST_CASE("channel advection implements the blended edge stencil") {
  const StructuredMesh mesh = unit_cube();
  ChannelEdgeMap map;
  map.edges = {{0, 1, 1.0, 1.0}};  // the x-edge from node 0 to node 1

  ChannelCoupling centered{2.0, 0.0};
  const SparseOperator C0 = assemble_channel_advection(mesh, map, centered);
  CHECK(*C0.find(0, 0) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(*C0.find(0, 1) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(*C0.find(1, 0) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(*C0.find(1, 1) == doctest::Approx(1.0).epsilon(1e-14));

  ChannelCoupling upwinded{2.0, 1.0};
  const SparseOperator C1 = assemble_channel_advection(mesh, map, upwinded);
  CHECK(C1.find(0, 0) == nullptr);  // upstream row vanishes entirely
  CHECK(C1.find(0, 1) == nullptr);
  CHECK(*C1.find(1, 0) == doctest::Approx(-2.0).epsilon(1e-14));
  CHECK(*C1.find(1, 1) == doctest::Approx(2.0).epsilon(1e-14));

  ChannelCoupling off{0.0, 1.0};
  CHECK(assemble_channel_advection(mesh, map, off).nnz() == 0);
}

TEST_CASE("channel rows annihilate constants for every blend") {
  const VascularNetwork net = build_u_layout({LayoutKind::U, 5000, 3000, 3000, 4, 6000, 6000});
  const StructuredMesh mesh = build_graded_grid({6000.0, {1500.0, 4500.0}, 6, 1.2},
                                                {6000.0, {3000.0}, 4, 1.2},
                                                {10000.0, {5000.0}, 8, 1.2});
  const ChannelEdgeMap map = map_channel_to_edges(mesh, net);

  for (double beta : {0.0, 0.37, 1.0}) {
    const SparseOperator C = assemble_channel_advection(mesh, map, {125490.0, beta});
    const std::vector<double> action = C.multiply(std::vector<double>(mesh.node_count(), 1.0));
    double worst = 0.0;
    for (double v : action) worst = std::max(worst, std::abs(v));
    CHECK(worst <= 1e-12 * C.max_abs_entry());
  }
}

TEST_CASE("channel action on an arc-length field books the full heat-capacity rate") {
  const VascularNetwork net = build_u_layout({LayoutKind::U, 5000, 3000, 3000, 4, 6000, 6000});
  const StructuredMesh mesh = build_graded_grid({6000.0, {1500.0, 4500.0}, 4, 1.0},
                                                {6000.0, {3000.0}, 2, 1.0},
                                                {10000.0, {5000.0}, 10, 1.0});
  const ChannelEdgeMap map = map_channel_to_edges(mesh, net);
  const double chi = 125490.0;

  // Temperature = arc length along the channel, zero elsewhere. Each edge
  // contributes chi_e * (length * unit slope); the rows of an edge sum to it.
  std::vector<double> theta(mesh.node_count(), 0.0);
  double s = 0.0;
  theta[map.edges.front().upstream] = 0.0;
  for (const auto& e : map.edges) {
    s += e.length;
    theta[e.downstream] = s;
  }

  for (double beta : {0.0, 1.0}) {
    const SparseOperator C = assemble_channel_advection(mesh, map, {chi, beta});
    const std::vector<double> action = C.multiply(theta);
    double total = 0.0;
    for (double v : action) total += v;
    double expected = 0.0;
    for (const auto& e : map.edges) expected += chi * e.flow_fraction * e.length;
    CHECK(total == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("surface operator vanishes without convection or flux") {
  const SurfaceBC bc = flux_only_bc();
  const SurfaceOperator op = assemble_surface_linear(unit_cube(), bc);
  CHECK(op.matrix.nnz() == 0);
  for (double v : op.rhs) CHECK(v == 0.0);
}

TEST_CASE("convection adds a face mass matrix and an ambient load") {
  SurfaceBC bc = flux_only_bc();
  bc.faces[kZMin] = FaceCondition::ConvectRadiate;
  bc.h_convection = 1.0;
  bc.theta_ambient = 303.15;

  const SurfaceOperator op = assemble_surface_linear(unit_cube(), bc);
  CHECK(entry_sum(op.matrix) == doctest::Approx(1.0).epsilon(1e-14));  // h * area
  CHECK(op.matrix.is_symmetric(1e-14));
  double rhs_sum = 0.0;
  for (double v : op.rhs) rhs_sum += v;
  CHECK(rhs_sum == doctest::Approx(303.15).epsilon(1e-14));  // h * theta_amb * area

  // Contributions live only on the four top-face nodes (z = 0).
  for (std::size_t i = 0; i < 8; ++i) {
    const bool on_face = unit_cube().node_position(i).z == 0.0;
    CHECK((op.rhs[i] != 0.0) == on_face);
  }
}

TEST_CASE("prescribed flux loads carry the outward sign") {
  StructuredMesh slab;
  slab.xs = {0.0, 2.0};
  slab.ys = {0.0, 1.0};
  slab.zs = {0.0, 1.0};
  SurfaceBC bc = flux_only_bc();
  bc.flux[kZMax] = 5.0;  // 5 W/m^2 leaving through the 2 m^2 bottom face

  const SurfaceOperator op = assemble_surface_linear(slab, bc);
  double rhs_sum = 0.0;
  for (double v : op.rhs) rhs_sum += v;
  CHECK(rhs_sum == doctest::Approx(-10.0).epsilon(1e-14));
}

TEST_CASE("radiation residual and consistent jacobian") {
  SurfaceBC bc = flux_only_bc();
  bc.faces[kZMin] = FaceCondition::ConvectRadiate;
  bc.emissivity = 1.0;
  bc.theta_ambient = 290.0;
  const StructuredMesh mesh = unit_cube();

  // Equilibrium: no net exchange.
  {
    SurfaceBC eq = bc;
    eq.theta_ambient = 300.0;
    const auto [r, J] = radiation_residual_jacobian(mesh, eq, std::vector<double>(8, 300.0));
    // theta^4 is evaluated at quadrature points, so equilibrium cancels only
    // to rounding (sigma*300^4 ~ 460 W/m^2 sets the scale).
    for (double v : r) CHECK(std::abs(v) <= 1e-9);
    CHECK(J.nnz() > 0);  // the linearization is alive even at equilibrium
  }

  const auto [r, J] = radiation_residual_jacobian(mesh, bc, std::vector<double>(8, 300.0));
  double r_sum = 0.0, j_sum = 0.0;
  for (double v : r) r_sum += v;
  for (double v : J.row_sums()) j_sum += v;
  const double sigma = kStefanBoltzmann;
  CHECK(r_sum == doctest::Approx(sigma * (std::pow(300.0, 4) - std::pow(290.0, 4))).epsilon(1e-12));
  CHECK(j_sum == doctest::Approx(4.0 * sigma * std::pow(300.0, 3)).epsilon(1e-12));
  CHECK(j_sum == doctest::Approx(6.1236).epsilon(1e-6));  // 4 sigma 300^3 per m^2

  // Emissivity zero switches radiation off entirely.
  SurfaceBC cold = bc;
  cold.emissivity = 0.0;
  const auto [r0, J0] = radiation_residual_jacobian(mesh, cold, std::vector<double>(8, 300.0));
  for (double v : r0) CHECK(v == 0.0);
  CHECK(J0.nnz() == 0);

  CHECK_THROWS_AS(radiation_residual_jacobian(mesh, bc, std::vector<double>(8, -1.0)), Error);
}

TEST_CASE("radiation refuses a jacobian whose pattern misses the face") {
  SurfaceBC bc = flux_only_bc();
  bc.faces[kZMin] = FaceCondition::ConvectRadiate;
  bc.emissivity = 1.0;
  const StructuredMesh mesh = unit_cube();

  SparseOperator diag_only(8);
  for (std::size_t i = 0; i < 8; ++i) diag_only.add(i, i, 1.0);
  diag_only.finalize();
  std::vector<double> residual(8, 0.0);
  CHECK_THROWS_WITH_AS(
      accumulate_radiation(mesh, bc, std::vector<double>(8, 300.0), residual, &diag_only),
      doctest::Contains("pattern"), Error);
}

TEST_CASE("dirichlet application prescribes the geothermal profile") {
  SurfaceBC bc;  // default: five Dirichlet faces, convecting top
  bc.geothermal_gradient = 0.03;
  bc.theta_ambient = 303.15;
  CHECK(bc.prescribed(5000.0) == doctest::Approx(453.15).epsilon(1e-14));
  CHECK(bc.prescribed(0.0) == doctest::Approx(303.15).epsilon(1e-14));

  StructuredMesh mesh;
  mesh.xs = {0.0, 6000.0};
  mesh.ys = {0.0, 6000.0};
  mesh.zs = {0.0, 5000.0, 10000.0};

  const std::vector<std::size_t> nodes = dirichlet_face_nodes(mesh, bc);
  CHECK(!nodes.empty());

  MaterialField mat;
  SparseOperator A = assemble_conduction(mesh, mat);
  std::vector<double> rhs(mesh.node_count(), 0.0);
  std::vector<DirichletValue> constraints;
  for (std::size_t n : nodes) constraints.push_back({n, bc.prescribed(mesh.node_position(n).z)});
  apply_dirichlet(A, rhs, constraints);

  for (std::size_t n : nodes) {
    CHECK(*A.find(n, n) == 1.0);
    CHECK(rhs[n] == bc.prescribed(mesh.node_position(n).z));
  }
}

TEST_CASE("conflicting dirichlet values are rejected") {
  SparseOperator A(2);
  A.add(0, 0, 1.0);
  A.add(1, 1, 1.0);
  A.finalize();
  std::vector<double> rhs = {0.0, 0.0};
  CHECK_THROWS_WITH_AS(apply_dirichlet(A, rhs, {{0, 1.0}, {0, 2.0}}),
                       doctest::Contains("conflicting"), Error);
}

TEST_CASE("assembly is deterministic") {
  const StructuredMesh mesh = build_graded_grid({6000.0, {1500.0, 4500.0}, 5, 1.3},
                                                {6000.0, {3000.0}, 4, 1.3},
                                                {10000.0, {5000.0}, 6, 1.3});
  MaterialField mat;
  const SparseOperator A = assemble_conduction(mesh, mat);
  const SparseOperator B = assemble_conduction(mesh, mat);
  REQUIRE(A.nnz() == B.nnz());
  for (std::size_t row = 0; row < A.size(); ++row)
    for (std::size_t k = A.row_begin(row); k < A.row_end(row); ++k) {
      CHECK(A.col_at(k) == B.col_at(k));
      CHECK(A.value_at(k) == B.value_at(k));  // bitwise
    }
}
