#pragma once

#include <Eigen/Dense>

#include <vector>

#include "robustcs/model.hpp"
#include "robustcs/solvers.hpp"

namespace robustcs {

enum class ResidualCriterion { Huber, L1, L2 };

enum class SolverChoice { Fista, Admm, Nested, Affine, L1Loss };

struct PathConfig {
  int grid_points = 20;            // coarse geometric grid size
  double decades = 4.0;            // grid span below lambda_max, in decades
  double bisect_rel_width = 1e-2;  // stop width of the bisection interval
  double epsilon = 0.0;            // residual budget, must be positive
  ResidualCriterion criterion = ResidualCriterion::Huber;

  void validate() const;
};

struct PathRecord {
  double lambda = 0.0;
  double criterion = 0.0;
  double l1_norm = 0.0;
  long long nnz = 0;
  long long iterations = 0;
  double seconds = 0.0;
};

enum class PathStatus { Met, NotMet };

struct PathResult {
  double lambda_star = 0.0;
  Solution solution;
  PathStatus status = PathStatus::NotMet;
  std::vector<PathRecord> records;  // sorted by decreasing lambda
};

// Smallest lambda at which x = 0 is optimal, for the given loss:
//   Huber: ||phi^T psi(y)||_inf   (reduces to the quadratic form when nothing
//          clips),  L2: ||phi^T y||_inf,  L1: ||phi^T sign(y)||_inf.
// Returns 0 for y = 0.
double lambda_max(const SensingProblem& prob, const HuberParams& params,
                  ResidualCriterion loss);

// Residual budget value: Huber -> sum rho(r_i), L2 -> ||r||_2^2, L1 -> ||r||_1.
double criterion_value(const Eigen::VectorXd& r, const HuberParams& params,
                       ResidualCriterion kind);

// Expected criterion value for m Gaussian noise entries of standard deviation
// sigma, in closed form. The Huber case integrates rho against the normal
// density; L1 gives m * sigma * sqrt(2/pi); L2 gives m * sigma^2.
double estimate_epsilon(const HuberParams& params, Eigen::Index m, double sigma,
                        ResidualCriterion kind = ResidualCriterion::Huber);

// Walks a geometric grid down from lambda_max, warm starting each solve, then
// bisects the first bracketing interval until its relative width is below
// cfg.bisect_rel_width. Returns the largest lambda whose solution meets
// criterion <= epsilon. When the criterion is never met the smallest-lambda
// solution is returned with status NotMet. One cached factorization serves
// every solve on the path.
PathResult select_lambda(const SensingProblem& prob, const HuberParams& params,
                         SolverChoice solver, const PathConfig& cfg,
                         const SolverOptions& opts,
                         const Eigen::VectorXd* affine_c = nullptr);

// Multi-task variant: the criterion is summed over task columns and compared
// against cfg.epsilon (callers scale the budget by the task count).
struct MultiTaskPathResult {
  double lambda_star = 0.0;
  MultiTaskSolution solution;
  PathStatus status = PathStatus::NotMet;
  std::vector<PathRecord> records;
};
MultiTaskPathResult select_lambda_multitask(const MultiTaskProblem& prob,
                                            const HuberParams& params, Engine engine,
                                            const PathConfig& cfg,
                                            const SolverOptions& opts);

}  // namespace robustcs
