// Compressed sparse row matrix with a coordinate-format staging area.
// Assembly routines stage (row, col, value) triplets in deterministic order;
// finalize() merges duplicates into CSR storage.
#pragma once

#include <cstddef>
#include <initializer_list>
#include <utility>
#include <vector>

#include "geoloop/geometry.hpp"

namespace geoloop {

class SparseOperator {
 public:
  SparseOperator() = default;
  explicit SparseOperator(std::size_t n) : n_(n) {}

  std::size_t size() const { return n_; }
  bool finalized() const { return finalized_; }
  std::size_t nnz() const { return vals_.size(); }

  // Staging (pre-finalize). Duplicate (row, col) pairs are summed on finalize;
  // entries whose sum is exactly zero are dropped.
  void add(std::size_t row, std::size_t col, double value);
  void finalize();

  // Finalized access.
  void multiply(const std::vector<double>& x, std::vector<double>& y) const;
  std::vector<double> multiply(const std::vector<double>& x) const;
  double* find(std::size_t row, std::size_t col);
  const double* find(std::size_t row, std::size_t col) const;

  std::size_t row_begin(std::size_t row) const { return row_ptr_[row]; }
  std::size_t row_end(std::size_t row) const { return row_ptr_[row + 1]; }
  std::size_t col_at(std::size_t k) const { return cols_[k]; }
  double value_at(std::size_t k) const { return vals_[k]; }
  double& value_at(std::size_t k) { return vals_[k]; }

  // alpha*A + beta*B with merged sparsity pattern (both finalized).
  static SparseOperator weighted_sum(double alpha, const SparseOperator& a, double beta,
                                     const SparseOperator& b);

  // Row replacement + column elimination used for Dirichlet constraints:
  // constrained rows become identity rows with rhs = value, and constrained
  // columns are folded into the rhs of the remaining rows.
  void eliminate_constrained(const std::vector<char>& constrained,
                             const std::vector<double>& values, std::vector<double>& rhs);

  std::vector<double> row_sums() const;
  std::vector<double> diagonal() const;
  double max_abs_entry() const;
  bool is_symmetric(double rel_tol) const;
  std::vector<std::vector<double>> to_dense() const;

 private:
  struct Triplet {
    std::size_t row, col;
    double value;
  };

  std::size_t n_ = 0;
  bool finalized_ = false;
  std::vector<Triplet> staging_;
  std::vector<std::size_t> row_ptr_, cols_;
  std::vector<double> vals_;
};

// Dense LU with partial pivoting; the independent-solve oracle for small
// systems and the fallback backend for verification runs.
class DenseLU {
 public:
  explicit DenseLU(std::vector<std::vector<double>> matrix);
  std::vector<double> solve(const std::vector<double>& rhs) const;

 private:
  std::size_t n_;
  std::vector<double> lu_;       // row-major factor storage
  std::vector<std::size_t> piv_;
};

}  // namespace geoloop
