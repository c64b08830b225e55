// Linear and nonlinear solvers: preconditioned BiCGStab, a dense-LU backend
// for verification, Newton iteration, and the implicit BDF1/BDF2 step for
// M dtheta/dt + A theta + r(theta) = f with Dirichlet constraints.
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "geoloop/assembly.hpp"
#include "geoloop/sparse.hpp"

namespace geoloop {

enum class PreconditionerKind { Diagonal, Ilu0 };

struct KrylovOptions {
  double tolerance = 1e-9;  // relative residual target, ||b - Ax|| / ||b||
  int max_iterations = 2000;
  PreconditionerKind preconditioner = PreconditionerKind::Ilu0;
};

struct KrylovStats {
  int iterations = 0;
  double relative_residual = 0.0;
};

// Solves A x = b from a zero initial guess. Throws Error on breakdown or
// stagnation, with the iteration count and last residual in the message.
std::vector<double> solve_linear_system(const SparseOperator& A, const std::vector<double>& b,
                                        const KrylovOptions& options, KrylovStats* stats = nullptr);

// Pluggable linear solve used by Newton; lets verification swap in dense LU
// while sharing every assembly and iteration code path.
using LinearSolver = std::function<std::vector<double>(const SparseOperator&, const std::vector<double>&)>;

LinearSolver make_krylov_solver(const KrylovOptions& options, KrylovStats* accumulate = nullptr);
LinearSolver make_dense_solver();

struct NewtonOptions {
  double relative_tolerance = 1e-8;
  int max_iterations = 20;
  // Residual norms at or below this are accepted outright; callers set it
  // from the natural force scale of the system so an already-converged state
  // is recognized without taking a step.
  double absolute_floor = 0.0;
};

struct NewtonReport {
  int iterations = 0;
  std::vector<double> residual_norms;  // max-norm, including the initial one
};

struct NewtonCallbacks {
  std::function<std::vector<double>(const std::vector<double>&)> residual;
  std::function<SparseOperator(const std::vector<double>&)> jacobian;
};

NewtonReport newton_solve(std::vector<double>& x, const NewtonCallbacks& callbacks,
                          const NewtonOptions& options, const LinearSolver& solve);

struct SolverConfig {
  double dt = 1e6;           // s
  double total_time = 2e9;   // s
  int bdf_order = 2;
  MassType mass = MassType::Consistent;
  double newton_tolerance = 1e-8;
  int newton_max_iterations = 20;
  double krylov_tolerance = 1e-9;
  int krylov_max_iterations = 2000;
  PreconditionerKind preconditioner = PreconditionerKind::Ilu0;
};

// One implicit BDF step of M dtheta/dt + A theta + r(theta) = f.
//
//   residual(theta) = (a0*M*theta - M*history)/dt + A*theta + r(theta) - f
//
// history = theta_n for BDF1 (a0 = 1) and 2*theta_n - theta_{n-1}/2 for BDF2
// (a0 = 3/2). `nonlinear` accumulates r and its Jacobian (may be null).
// Constraint values are imposed on the iterate before the solve, and the
// Newton updates keep them fixed.
struct BdfSystem {
  const SparseOperator* mass = nullptr;
  const SparseOperator* linear = nullptr;
  const std::vector<double>* forcing = nullptr;
  const std::vector<double>* history = nullptr;
  double a0 = 1.0;
  double dt = 0.0;
  const std::vector<DirichletValue>* constraints = nullptr;
  std::function<void(const std::vector<double>&, std::vector<double>&, SparseOperator*)> nonlinear;
};

NewtonReport bdf_step(const BdfSystem& system, const NewtonOptions& newton,
                      const LinearSolver& solve, std::vector<double>& theta);

}  // namespace geoloop
