#pragma once

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <vector>

#include "robustcs/linalg.hpp"
#include "robustcs/model.hpp"

namespace robustcs {

enum class SolveStatus { Converged, MaxIterations };

// Per-iteration hook. Receives the iterate the solver would report at that
// point; returning true asks the solver to stop (it then returns with status
// MaxIterations). Nested solves fire it once per inner iteration so counts are
// comparable across algorithms of equal per-iteration cost.
using IterateObserver = std::function<bool(const Eigen::VectorXd&)>;

struct SolverOptions {
  double eta = 2.0;    // ADMM penalty
  double eta2 = 2.0;   // second penalty (affine constraint, l1-loss split)
  double mu = 1.0;     // modified-residuals surrogate weight
  double beta = 0.0;   // elastic-net weight on ||x||_2^2
  int max_iter = 5000;
  double abs_tol = 1e-4;
  double rel_tol = 1e-2;
  Eigen::VectorXd x0;  // empty -> zeros
  Eigen::VectorXd u0;  // empty -> zeros (ADMM warm start)
  double t0 = 1.0;     // momentum seed
  double lipschitz = 0.0;  // precomputed 2*lambda_max(phi^T phi); 0 -> compute
  IterateObserver observer;

  void validate() const;
};

struct IterationRecord {
  double objective = 0.0;
  double primal_residual = 0.0;   // ADMM: ||x - z||; FISTA/nested: step norm
  double dual_residual = 0.0;     // ADMM: ||eta (z - z_prev)||
  double primal_residual2 = 0.0;  // second constraint, when present
  double dual_residual2 = 0.0;
  double seconds = 0.0;           // wall time since solve start
  long long inner_iterations = 0;  // cumulative, nested solver only
};
using SolverTrace = std::vector<IterationRecord>;

struct Solution {
  Eigen::VectorXd x;
  SolveStatus status = SolveStatus::MaxIterations;
  SolverTrace trace;
  double final_lambda = 0.0;
  bool stalled = false;  // primal residual made no progress for 100 iterations
  Eigen::VectorXd dual;  // final scaled dual (ADMM family), for warm starts

  long long total_iterations() const {
    if (trace.empty()) return 0;
    const long long inner = trace.back().inner_iterations;
    return inner > 0 ? inner : static_cast<long long>(trace.size());
  }
};

// Shared sensing operator, one measurement column per task.
struct MultiTaskProblem {
  Eigen::MatrixXd phi;  // M x N
  Eigen::MatrixXd y;    // M x T

  MultiTaskProblem(Eigen::MatrixXd phi_in, Eigen::MatrixXd y_in);

  Eigen::Index measurements() const { return phi.rows(); }
  Eigen::Index dimension() const { return phi.cols(); }
  Eigen::Index tasks() const { return y.cols(); }
};

struct MultiTaskSolution {
  Eigen::MatrixXd x;  // N x T
  SolveStatus status = SolveStatus::MaxIterations;
  SolverTrace trace;
  double final_lambda = 0.0;
  bool stalled = false;
  Eigen::MatrixXd dual;  // final scaled dual (ADMM engine), for warm starts
};

enum class Engine { Fista, Admm };

// ---------------------------------------------------------------------------
// Stopping logic (Boyd et al. style combined absolute/relative thresholds).

enum class StopDecision { Continue, Converged };

// One residual against its tolerance: converged contribution when
//   norm <= sqrt(dim) * abs_tol + rel_tol * scale.
// Pass scale = 0 for a purely absolute test (used for scalar constraint
// feasibility).
struct ResidualCheck {
  double norm = 0.0;
  double dim = 0.0;
  double scale = 0.0;
};

// ADMM-family rule: every primal and every dual check must pass.
StopDecision check_stopping(const SolverOptions& opts,
                            std::span<const ResidualCheck> primal,
                            std::span<const ResidualCheck> dual);

// Iterate-change rule used by FISTA and the nested outer loop:
//   ||x_k - x_{k-1}|| <= abs_tol * max(1, ||x_k||).
StopDecision check_stopping(const SolverOptions& opts, double step_norm,
                            double iterate_norm);

// Euclidean distance from 0 to the subdifferential of
//   f(x) = g(x) + lambda ||x||_1 + beta ||x||_2^2
// at x: |grad_i + lambda sign(x_i)| on the support, max(|grad_i| - lambda, 0)
// off it. Requires exact zeros off-support, which shrinkage iterates have.
double optimality_residual(const SensingProblem& prob, double lambda,
                           const HuberParams& params, const Eigen::VectorXd& x,
                           double beta = 0.0);

// Row-group analogue for f(X) = g(X) + lambda * sum_rows ||X_row||_2.
double optimality_residual_multitask(const MultiTaskProblem& prob, double lambda,
                                     const HuberParams& params,
                                     const Eigen::MatrixXd& x);

// ---------------------------------------------------------------------------
// Solvers. All are deterministic given (inputs, opts), start from zeros unless
// opts.x0 says otherwise, and solve
//   min_x g(x) + lambda ||x||_1            (+ beta ||x||_2^2 when beta > 0)
// with g the Huber loss of the residual y - phi x, except where noted.
// A caller-supplied CachedSolver (matching the solver's linear system) lets a
// regularization path reuse one factorization; pass nullptr to build one.

// Accelerated proximal gradient with step 1/L, L = 2*lambda_max(phi^T phi).
Solution solve_fista_robust(const SensingProblem& prob, double lambda,
                            const HuberParams& params, const SolverOptions& opts);

// Single-loop generalized ADMM: exact shrinkage z-step, x-step minimizes the
// modified-residuals quadratic surrogate through a cached factorization of
// mu phi^T phi + (eta + 2 beta) I. Reports the exactly-sparse z iterate.
Solution solve_admm_robust(const SensingProblem& prob, double lambda,
                           const HuberParams& params, const SolverOptions& opts,
                           const CachedSolver* cached = nullptr);

// Double-loop baseline: outer surrogate refresh, inner ADMM solve of the
// resulting quadratic-loss problem to inner_opts tolerances.
Solution solve_nested_robust(const SensingProblem& prob, double lambda,
                             const HuberParams& params, const SolverOptions& opts,
                             const SolverOptions& inner_opts,
                             const CachedSolver* cached = nullptr);

// Adds the affine constraint c^T x = 1 through a second scaled dual variable.
// Returns the x iterate, which satisfies |c^T x - 1| <= abs_tol on
// convergence. The system matrix gains the rank-one term eta2 * c c^T.
Solution solve_admm_affine(const SensingProblem& prob, double lambda,
                           const Eigen::VectorXd& c, const HuberParams& params,
                           const SolverOptions& opts,
                           const CachedSolver* cached = nullptr);

// min ||y - phi x||_1 + lambda ||x||_1 by splitting both nonsmooth terms.
// Four residuals drive the stopping test. eta maps to the loss split, eta2 to
// the regularizer split.
Solution solve_admm_l1loss(const SensingProblem& prob, double lambda,
                           const SolverOptions& opts,
                           const CachedSolver* cached = nullptr);

// min sum_t g_t(x_t) + lambda * sum_rows ||X_row||_2 with either engine.
// Row-wise group shrinkage couples the tasks. x0/u0 warm-start the matrix
// iterates (nullptr -> zeros); opts.x0/u0 are ignored here.
MultiTaskSolution solve_multitask(const MultiTaskProblem& prob, double lambda,
                                  const HuberParams& params, Engine engine,
                                  const SolverOptions& opts,
                                  const CachedSolver* cached = nullptr,
                                  const Eigen::MatrixXd* x0 = nullptr,
                                  const Eigen::MatrixXd* u0 = nullptr);

// Constraint vector for a known coefficient total: c = (1/total) * ones, so
// that c^T x = 1 whenever sum_i x_i = total.
Eigen::VectorXd power_constraint_vector(double total, Eigen::Index n);

}  // namespace robustcs
