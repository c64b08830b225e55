#include "geoloop/sparse.hpp"

#include <algorithm>
#include <cmath>

namespace geoloop {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(message);
}

}  // namespace

void SparseOperator::add(std::size_t row, std::size_t col, double value) {
  require(!finalized_, "add() called on a finalized operator");
  require(row < n_ && col < n_, "sparse entry index out of range");
  staging_.push_back({row, col, value});
}

void SparseOperator::finalize() {
  require(!finalized_, "operator already finalized");
  std::sort(staging_.begin(), staging_.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  row_ptr_.assign(n_ + 1, 0);
  cols_.clear();
  vals_.clear();
  std::size_t i = 0;
  while (i < staging_.size()) {
    const std::size_t row = staging_[i].row;
    const std::size_t col = staging_[i].col;
    double sum = 0.0;
    while (i < staging_.size() && staging_[i].row == row && staging_[i].col == col)
      sum += staging_[i++].value;
    if (sum != 0.0) {
      cols_.push_back(col);
      vals_.push_back(sum);
      ++row_ptr_[row + 1];
    }
  }
  for (std::size_t r = 0; r < n_; ++r) row_ptr_[r + 1] += row_ptr_[r];
  staging_.clear();
  staging_.shrink_to_fit();
  finalized_ = true;
}

void SparseOperator::multiply(const std::vector<double>& x, std::vector<double>& y) const {
  require(finalized_, "multiply() requires a finalized operator");
  require(x.size() == n_, "vector size mismatch in multiply()");
  y.assign(n_, 0.0);
  for (std::size_t r = 0; r < n_; ++r) {
    double sum = 0.0;
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) sum += vals_[k] * x[cols_[k]];
    y[r] = sum;
  }
}

std::vector<double> SparseOperator::multiply(const std::vector<double>& x) const {
  std::vector<double> y;
  multiply(x, y);
  return y;
}

double* SparseOperator::find(std::size_t row, std::size_t col) {
  const auto* self = this;
  return const_cast<double*>(self->find(row, col));
}

const double* SparseOperator::find(std::size_t row, std::size_t col) const {
  require(finalized_, "find() requires a finalized operator");
  const auto first = cols_.begin() + static_cast<long>(row_ptr_[row]);
  const auto last = cols_.begin() + static_cast<long>(row_ptr_[row + 1]);
  const auto it = std::lower_bound(first, last, col);
  if (it == last || *it != col) return nullptr;
  return &vals_[static_cast<std::size_t>(it - cols_.begin())];
}

SparseOperator SparseOperator::weighted_sum(double alpha, const SparseOperator& a, double beta,
                                            const SparseOperator& b) {
  require(a.finalized() && b.finalized(), "weighted_sum() requires finalized operators");
  require(a.size() == b.size(), "weighted_sum() size mismatch");
  SparseOperator out(a.size());
  // Merge row-by-row; both inputs have sorted column indices.
  for (std::size_t r = 0; r < a.size(); ++r) {
    std::size_t ka = a.row_ptr_[r], kb = b.row_ptr_[r];
    const std::size_t ea = a.row_ptr_[r + 1], eb = b.row_ptr_[r + 1];
    while (ka < ea || kb < eb) {
      if (kb == eb || (ka < ea && a.cols_[ka] < b.cols_[kb]))
        out.staging_.push_back({r, a.cols_[ka], alpha * a.vals_[ka]}), ++ka;
      else if (ka == ea || b.cols_[kb] < a.cols_[ka])
        out.staging_.push_back({r, b.cols_[kb], beta * b.vals_[kb]}), ++kb;
      else {
        out.staging_.push_back({r, a.cols_[ka], alpha * a.vals_[ka] + beta * b.vals_[kb]});
        ++ka, ++kb;
      }
    }
  }
  // Staging is already sorted and duplicate-free; finalize just packs it.
  out.finalize();
  return out;
}

void SparseOperator::eliminate_constrained(const std::vector<char>& constrained,
                                           const std::vector<double>& values,
                                           std::vector<double>& rhs) {
  require(finalized_, "eliminate_constrained() requires a finalized operator");
  require(constrained.size() == n_ && values.size() == n_ && rhs.size() == n_,
          "constraint array size mismatch");
  std::vector<std::size_t> new_ptr(n_ + 1, 0), new_cols;
  std::vector<double> new_vals;
  new_cols.reserve(nnz());
  new_vals.reserve(nnz());
  for (std::size_t r = 0; r < n_; ++r) {
    if (constrained[r]) {
      new_cols.push_back(r);
      new_vals.push_back(1.0);
      rhs[r] = values[r];
    } else {
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
        const std::size_t c = cols_[k];
        if (constrained[c]) {
          rhs[r] -= vals_[k] * values[c];
        } else {
          new_cols.push_back(c);
          new_vals.push_back(vals_[k]);
        }
      }
    }
    new_ptr[r + 1] = new_cols.size();
  }
  row_ptr_ = std::move(new_ptr);
  cols_ = std::move(new_cols);
  vals_ = std::move(new_vals);
}

std::vector<double> SparseOperator::row_sums() const {
  require(finalized_, "row_sums() requires a finalized operator");
  std::vector<double> sums(n_, 0.0);
  for (std::size_t r = 0; r < n_; ++r)
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) sums[r] += vals_[k];
  return sums;
}

std::vector<double> SparseOperator::diagonal() const {
  require(finalized_, "diagonal() requires a finalized operator");
  std::vector<double> d(n_, 0.0);
  for (std::size_t r = 0; r < n_; ++r)
    if (const double* v = find(r, r)) d[r] = *v;
  return d;
}

double SparseOperator::max_abs_entry() const {
  double m = 0.0;
  for (double v : vals_) m = std::max(m, std::abs(v));
  return m;
}

bool SparseOperator::is_symmetric(double rel_tol) const {
  require(finalized_, "is_symmetric() requires a finalized operator");
  const double scale = std::max(max_abs_entry(), 1e-300);
  for (std::size_t r = 0; r < n_; ++r)
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const double* mirror = find(cols_[k], r);
      const double other = mirror ? *mirror : 0.0;
      if (std::abs(vals_[k] - other) > rel_tol * scale) return false;
    }
  return true;
}

std::vector<std::vector<double>> SparseOperator::to_dense() const {
  require(finalized_, "to_dense() requires a finalized operator");
  std::vector<std::vector<double>> dense(n_, std::vector<double>(n_, 0.0));
  for (std::size_t r = 0; r < n_; ++r)
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) dense[r][cols_[k]] = vals_[k];
  return dense;
}

DenseLU::DenseLU(std::vector<std::vector<double>> matrix) : n_(matrix.size()), piv_(matrix.size()) {
  lu_.assign(n_ * n_, 0.0);
  for (std::size_t r = 0; r < n_; ++r) {
    require(matrix[r].size() == n_, "dense matrix must be square");
    for (std::size_t c = 0; c < n_; ++c) lu_[r * n_ + c] = matrix[r][c];
  }
  // Doolittle factorization with partial pivoting.
  for (std::size_t k = 0; k < n_; ++k) {
    std::size_t pivot = k;
    for (std::size_t r = k + 1; r < n_; ++r)
      if (std::abs(lu_[r * n_ + k]) > std::abs(lu_[pivot * n_ + k])) pivot = r;
    require(lu_[pivot * n_ + k] != 0.0, "dense factorization hit a zero pivot");
    piv_[k] = pivot;
    if (pivot != k)
      for (std::size_t c = 0; c < n_; ++c) std::swap(lu_[k * n_ + c], lu_[pivot * n_ + c]);
    for (std::size_t r = k + 1; r < n_; ++r) {
      const double m = lu_[r * n_ + k] / lu_[k * n_ + k];
      lu_[r * n_ + k] = m;
      for (std::size_t c = k + 1; c < n_; ++c) lu_[r * n_ + c] -= m * lu_[k * n_ + c];
    }
  }
}

std::vector<double> DenseLU::solve(const std::vector<double>& rhs) const {
  require(rhs.size() == n_, "dense solve size mismatch");
  std::vector<double> x = rhs;
  for (std::size_t k = 0; k < n_; ++k) {
    if (piv_[k] != k) std::swap(x[k], x[piv_[k]]);
    for (std::size_t r = k + 1; r < n_; ++r) x[r] -= lu_[r * n_ + k] * x[k];
  }
  for (std::size_t k = n_; k-- > 0;) {
    for (std::size_t c = k + 1; c < n_; ++c) x[k] -= lu_[k * n_ + c] * x[c];
    x[k] /= lu_[k * n_ + k];
  }
  return x;
}

}  // namespace geoloop
