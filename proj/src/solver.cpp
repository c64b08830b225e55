#include "geoloop/solver.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

namespace geoloop {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(message);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

double norm_inf(const std::vector<double>& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

class Preconditioner {
 public:
  virtual ~Preconditioner() = default;
  virtual void apply(const std::vector<double>& r, std::vector<double>& z) const = 0;
};

class JacobiPreconditioner : public Preconditioner {
 public:
  explicit JacobiPreconditioner(const SparseOperator& A) : inv_diag_(A.diagonal()) {
    for (double& d : inv_diag_) {
      require(d != 0.0, "diagonal preconditioner hit a zero diagonal entry");
      d = 1.0 / d;
    }
  }
  void apply(const std::vector<double>& r, std::vector<double>& z) const override {
    z.resize(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) z[i] = inv_diag_[i] * r[i];
  }

 private:
  std::vector<double> inv_diag_;
};

// Incomplete LU factorization with zero fill-in on the matrix pattern.
class Ilu0Preconditioner : public Preconditioner {
 public:
  explicit Ilu0Preconditioner(const SparseOperator& A) : n_(A.size()) {
    row_ptr_.resize(n_ + 1);
    diag_.resize(n_);
    row_ptr_[0] = 0;
    for (std::size_t r = 0; r < n_; ++r) {
      row_ptr_[r + 1] = A.row_end(r);
      for (std::size_t k = A.row_begin(r); k < A.row_end(r); ++k) {
        cols_.push_back(A.col_at(k));
        vals_.push_back(A.value_at(k));
      }
    }
    for (std::size_t r = 0; r < n_; ++r) {
      std::size_t kk = row_ptr_[r];
      for (; kk < row_ptr_[r + 1] && cols_[kk] < r; ++kk) {
        const std::size_t k = cols_[kk];
        const double pivot = vals_[diag_[k]];
        require(pivot != 0.0, "incomplete factorization hit a zero pivot");
        const double m = vals_[kk] / pivot;
        vals_[kk] = m;
        // Subtract m * (row k tail) from row r, restricted to the pattern.
        std::size_t jj = diag_[k] + 1, ii = kk + 1;
        while (jj < row_ptr_[k + 1] && ii < row_ptr_[r + 1]) {
          if (cols_[jj] == cols_[ii]) {
            vals_[ii] -= m * vals_[jj];
            ++jj, ++ii;
          } else if (cols_[jj] < cols_[ii]) {
            ++jj;
          } else {
            ++ii;
          }
        }
      }
      require(kk < row_ptr_[r + 1] && cols_[kk] == r,
              "incomplete factorization requires a structurally nonzero diagonal");
      diag_[r] = kk;
    }
  }

  void apply(const std::vector<double>& r, std::vector<double>& z) const override {
    z = r;
    for (std::size_t i = 0; i < n_; ++i) {
      double sum = z[i];
      for (std::size_t k = row_ptr_[i]; k < diag_[i]; ++k) sum -= vals_[k] * z[cols_[k]];
      z[i] = sum;  // unit lower-triangular forward sweep
    }
    for (std::size_t i = n_; i-- > 0;) {
      double sum = z[i];
      for (std::size_t k = diag_[i] + 1; k < row_ptr_[i + 1]; ++k) sum -= vals_[k] * z[cols_[k]];
      z[i] = sum / vals_[diag_[i]];
    }
  }

 private:
  std::size_t n_;
  std::vector<std::size_t> row_ptr_, cols_, diag_;
  std::vector<double> vals_;
};

std::unique_ptr<Preconditioner> make_preconditioner(const SparseOperator& A,
                                                    PreconditionerKind kind) {
  if (kind == PreconditionerKind::Diagonal) return std::make_unique<JacobiPreconditioner>(A);
  return std::make_unique<Ilu0Preconditioner>(A);
}

[[noreturn]] void krylov_fail(const std::string& what, int iteration, double rel) {
  std::ostringstream msg;
  msg << "BiCGStab " << what << " at iteration " << iteration << " (relative residual " << rel
      << ")";
  throw Error(msg.str());
}

}  // namespace

std::vector<double> solve_linear_system(const SparseOperator& A, const std::vector<double>& b,
                                        const KrylovOptions& options, KrylovStats* stats) {
  require(A.finalized(), "linear solve requires a finalized operator");
  require(b.size() == A.size(), "right-hand side size mismatch");
  require(options.tolerance > 0.0, "Krylov tolerance must be positive");

  const std::size_t n = b.size();
  std::vector<double> x(n, 0.0);
  const double bnorm = norm2(b);
  if (stats) *stats = {};
  if (bnorm == 0.0) return x;

  const auto precond = make_preconditioner(A, options.preconditioner);

  // van der Vorst's BiCGStab with a true-residual confirmation before
  // accepting convergence, so tight tolerances are honest.
  std::vector<double> r = b, rhat = b;
  std::vector<double> p(n, 0.0), v(n, 0.0), phat, shat, s, t, tmp;
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  double rel = 1.0;

  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    const double rho1 = dot(rhat, r);
    if (rho1 == 0.0) krylov_fail("breakdown (rho = 0)", iter, rel);
    if (iter == 1) {
      p = r;
    } else {
      const double beta = (rho1 / rho) * (alpha / omega);
      for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
    }
    precond->apply(p, phat);
    A.multiply(phat, v);
    const double rv = dot(rhat, v);
    if (rv == 0.0) krylov_fail("breakdown (rhat.v = 0)", iter, rel);
    alpha = rho1 / rv;

    s = r;
    for (std::size_t i = 0; i < n; ++i) s[i] -= alpha * v[i];
    if (norm2(s) <= options.tolerance * bnorm) {
      for (std::size_t i = 0; i < n; ++i) x[i] += alpha * phat[i];
      A.multiply(x, tmp);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = b[i] - tmp[i];
      rel = norm2(tmp) / bnorm;
      if (rel <= options.tolerance) {
        if (stats) *stats = {iter, rel};
        return x;
      }
      r = tmp;  // re-anchor on the true residual and keep iterating
      rho = rho1;
      continue;
    }

    precond->apply(s, shat);
    A.multiply(shat, t);
    const double tt = dot(t, t);
    if (tt == 0.0) krylov_fail("breakdown (t = 0)", iter, rel);
    omega = dot(t, s) / tt;
    if (omega == 0.0) krylov_fail("stagnation (omega = 0)", iter, rel);

    for (std::size_t i = 0; i < n; ++i) x[i] += alpha * phat[i] + omega * shat[i];
    r = s;
    for (std::size_t i = 0; i < n; ++i) r[i] -= omega * t[i];
    rel = norm2(r) / bnorm;
    if (rel <= options.tolerance) {
      A.multiply(x, tmp);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = b[i] - tmp[i];
      rel = norm2(tmp) / bnorm;
      if (rel <= options.tolerance) {
        if (stats) *stats = {iter, rel};
        return x;
      }
      r = tmp;
    }
    rho = rho1;
  }
  krylov_fail("did not converge", options.max_iterations, rel);
}

LinearSolver make_krylov_solver(const KrylovOptions& options, KrylovStats* accumulate) {
  return [options, accumulate](const SparseOperator& A, const std::vector<double>& b) {
    KrylovStats stats;
    auto x = solve_linear_system(A, b, options, &stats);
    if (accumulate) {
      accumulate->iterations += stats.iterations;
      accumulate->relative_residual = stats.relative_residual;
    }
    return x;
  };
}

LinearSolver make_dense_solver() {
  return [](const SparseOperator& A, const std::vector<double>& b) {
    return DenseLU(A.to_dense()).solve(b);
  };
}

NewtonReport newton_solve(std::vector<double>& x, const NewtonCallbacks& callbacks,
                          const NewtonOptions& options, const LinearSolver& solve) {
  NewtonReport report;
  std::vector<double> r = callbacks.residual(x);
  double rn = norm_inf(r);
  report.residual_norms.push_back(rn);
  if (rn <= options.absolute_floor) return report;
  const double r0 = rn;
  const double target = std::max(options.relative_tolerance * r0, options.absolute_floor);

  for (int it = 1; it <= options.max_iterations; ++it) {
    SparseOperator J = callbacks.jacobian(x);
    for (double& v : r) v = -v;
    const std::vector<double> dx = solve(J, r);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += dx[i];
    r = callbacks.residual(x);
    rn = norm_inf(r);
    report.residual_norms.push_back(rn);
    report.iterations = it;
    if (rn <= target) return report;
  }

  std::ostringstream msg;
  msg << "Newton did not converge in " << options.max_iterations << " iterations; residual norms:";
  for (double v : report.residual_norms) msg << " " << v;
  throw Error(msg.str());
}

NewtonReport bdf_step(const BdfSystem& system, const NewtonOptions& newton,
                      const LinearSolver& solve, std::vector<double>& theta) {
  require(system.mass && system.linear && system.forcing && system.history,
          "bdf_step system is missing an operator");
  require(system.dt > 0.0, "time step must be positive");
  require(system.a0 > 0.0, "BDF leading coefficient must be positive");
  const std::size_t n = theta.size();
  require(system.mass->size() == n && system.linear->size() == n, "state size mismatch");
  require(system.forcing->size() == n && system.history->size() == n, "state size mismatch");

  std::vector<char> constrained(n, 0);
  std::vector<double> constraint_value(n, 0.0);
  if (system.constraints) {
    for (const auto& c : *system.constraints) {
      require(c.node < n, "constraint node out of range");
      constrained[c.node] = 1;
      constraint_value[c.node] = c.value;
      theta[c.node] = c.value;  // the iterate satisfies the constraints
    }
  }

  const std::vector<double> mass_history = system.mass->multiply(*system.history);

  NewtonCallbacks callbacks;
  callbacks.residual = [&](const std::vector<double>& th) {
    std::vector<double> r = system.mass->multiply(th);
    for (std::size_t i = 0; i < n; ++i) r[i] = (system.a0 * r[i] - mass_history[i]) / system.dt;
    const std::vector<double> a_th = system.linear->multiply(th);
    for (std::size_t i = 0; i < n; ++i) r[i] += a_th[i] - (*system.forcing)[i];
    if (system.nonlinear) system.nonlinear(th, r, nullptr);
    for (std::size_t i = 0; i < n; ++i)
      if (constrained[i]) r[i] = 0.0;
    return r;
  };
  callbacks.jacobian = [&](const std::vector<double>& th) {
    SparseOperator J =
        SparseOperator::weighted_sum(system.a0 / system.dt, *system.mass, 1.0, *system.linear);
    if (system.nonlinear) {
      std::vector<double> scratch(n, 0.0);
      system.nonlinear(th, scratch, &J);
    }
    // Updates of constrained nodes are pinned to zero.
    std::vector<double> zeros(n, 0.0), rhs_scratch(n, 0.0);
    J.eliminate_constrained(constrained, zeros, rhs_scratch);
    return J;
  };

  // Natural force scale of the step, used to recognize an already-converged
  // state without taking a Newton step.
  NewtonOptions options = newton;
  {
    double scale = norm_inf(*system.forcing);
    scale = std::max(scale, norm_inf(mass_history) / system.dt);
    std::vector<double> tmp = system.mass->multiply(theta);
    scale = std::max(scale, system.a0 * norm_inf(tmp) / system.dt);
    system.linear->multiply(theta, tmp);
    scale = std::max(scale, norm_inf(tmp));
    options.absolute_floor = std::max(options.absolute_floor, 1e-13 * scale);
  }

  return newton_solve(theta, callbacks, options, solve);
}

}  // namespace geoloop
