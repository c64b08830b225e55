#include <doctest.h>

#include <cmath>
#include <vector>

#include "geoloop/sparse.hpp"

using namespace geoloop;

namespace {

struct Triplet {
  std::size_t row, col;
  double value;
};

SparseOperator make(std::size_t n, std::initializer_list<Triplet> triplets) {
  SparseOperator A(n);
  for (const auto& t : triplets) A.add(t.row, t.col, t.value);
  A.finalize();
  return A;
}

}  // namespace

TEST_CASE("finalize merges duplicates and drops exact zeros") {
  SparseOperator A(2);
  A.add(0, 0, 1.0);
  A.add(0, 0, 2.0);
  A.add(0, 1, 5.0);
  A.add(0, 1, -5.0);
  A.add(1, 1, 4.0);
  A.finalize();

  CHECK(A.nnz() == 2);  // (0,1) cancelled away
  REQUIRE(A.find(0, 0) != nullptr);
  CHECK(*A.find(0, 0) == 3.0);
  CHECK(A.find(0, 1) == nullptr);
  CHECK(*A.find(1, 1) == 4.0);
}

TEST_CASE("matrix-vector products") {
  const SparseOperator D = make(2, {{0, 0, 2.0}, {1, 1, 4.0}});
  const std::vector<double> y = D.multiply({1.0, 1.0});
  CHECK(y[0] == 2.0);
  CHECK(y[1] == 4.0);

  const SparseOperator A = make(3, {{0, 0, 2}, {0, 1, 1}, {1, 0, 1}, {1, 1, 3}, {1, 2, 1},
                                    {2, 1, 1}, {2, 2, 4}});
  const std::vector<double> z = A.multiply({1.0, -2.0, 3.0});
  CHECK(z[0] == 2.0 - 2.0);
  CHECK(z[1] == 1.0 - 6.0 + 3.0);
  CHECK(z[2] == -2.0 + 12.0);
}

TEST_CASE("weighted sums merge sparsity patterns") {
  const SparseOperator A = make(2, {{0, 0, 1}, {1, 1, 2}});
  const SparseOperator B = make(2, {{0, 1, 3}, {1, 1, 1}});
  const SparseOperator C = SparseOperator::weighted_sum(2.0, A, -1.0, B);

  CHECK(*C.find(0, 0) == 2.0);
  CHECK(*C.find(0, 1) == -3.0);
  CHECK(*C.find(1, 1) == 3.0);
  CHECK(C.nnz() == 3);
}

TEST_CASE("constraint elimination rewrites rows and folds columns into the rhs") {
  SparseOperator A = make(3, {{0, 0, 2}, {0, 1, 1}, {1, 0, 1}, {1, 1, 3}, {1, 2, 1},
                              {2, 1, 1}, {2, 2, 4}});
  std::vector<double> rhs = {1.0, 2.0, 3.0};
  A.eliminate_constrained({0, 1, 0}, {0.0, 10.0, 0.0}, rhs);

  // Row 1 becomes the identity with its value on the rhs.
  CHECK(*A.find(1, 1) == 1.0);
  CHECK(A.find(1, 0) == nullptr);
  CHECK(A.find(1, 2) == nullptr);
  CHECK(rhs[1] == 10.0);

  // Rows 0 and 2 lose the constrained column; its effect moves to the rhs.
  CHECK(A.find(0, 1) == nullptr);
  CHECK(A.find(2, 1) == nullptr);
  CHECK(rhs[0] == 1.0 - 1.0 * 10.0);
  CHECK(rhs[2] == 3.0 - 1.0 * 10.0);
  CHECK(*A.find(0, 0) == 2.0);
  CHECK(*A.find(2, 2) == 4.0);
}

TEST_CASE("row sums, diagonal, symmetry checks") {
  const SparseOperator A = make(2, {{0, 0, 2}, {0, 1, -2}, {1, 0, -2}, {1, 1, 2}});
  const std::vector<double> sums = A.row_sums();
  CHECK(sums[0] == 0.0);
  CHECK(sums[1] == 0.0);
  CHECK(A.diagonal() == std::vector<double>{2.0, 2.0});
  CHECK(A.max_abs_entry() == 2.0);
  CHECK(A.is_symmetric(1e-12));

  const SparseOperator N = make(2, {{0, 1, 1}, {1, 0, -1}});
  CHECK(!N.is_symmetric(1e-12));
}

TEST_CASE("dense LU solves and pivots") {
  const DenseLU lu({{0.0, 2.0}, {1.0, 1.0}});  // needs a row swap
  const std::vector<double> x = lu.solve({2.0, 3.0});
  CHECK(x[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(x[1] == doctest::Approx(1.0).epsilon(1e-14));

  CHECK_THROWS_AS(DenseLU({{1.0, 2.0}, {2.0, 4.0}}), Error);  // singular
}

TEST_CASE("dense LU agrees with hand elimination on a 3x3 system") {
  const DenseLU lu({{2, 1, 0}, {1, 3, 1}, {0, 1, 4}});
  // Solution of the system with rhs (1, 2, 3): solved by hand.
  const std::vector<double> x = lu.solve({1.0, 2.0, 3.0});
  CHECK(2 * x[0] + x[1] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(x[0] + 3 * x[1] + x[2] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(x[1] + 4 * x[2] == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("to_dense mirrors the sparse entries") {
  const SparseOperator A = make(2, {{0, 1, 3}, {1, 0, -1}});
  const auto dense = A.to_dense();
  CHECK(dense[0][0] == 0.0);
  CHECK(dense[0][1] == 3.0);
  CHECK(dense[1][0] == -1.0);
  CHECK(dense[1][1] == 0.0);
}
