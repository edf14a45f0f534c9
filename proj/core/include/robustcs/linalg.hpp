#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cstdint>
#include <optional>

namespace robustcs {

struct SpectralBound {
  double lambda_max = 0.0;  // largest eigenvalue of phi^T phi
  int iterations_used = 0;
  bool zero_matrix = false;
};

// Largest eigenvalue of phi^T phi by seeded power iteration on the smaller of
// phi^T phi and phi phi^T (same nonzero spectrum). Stops when the Rayleigh
// quotient changes by less than rel_tol relatively. An all-zero matrix yields
// lambda_max = 0 with the zero_matrix flag set.
SpectralBound spectral_bound(const Eigen::MatrixXd& phi, double rel_tol = 1e-8,
                             int max_iterations = 10000,
                             std::uint64_t seed = 0x9e3779b97f4a7c15ull);

// Q = rho1 * I + rho2 * c c^T (the rank-one part is optional). Positive
// definite by construction for rho1 > 0, rho2 > 0.
struct QSpec {
  struct RankOne {
    double rho2 = 1.0;
    Eigen::VectorXd c;
  };

  double rho1 = 1.0;
  std::optional<RankOne> rank_one;

  // Q^{-1} v via Sherman-Morrison: Q^{-1} = rho1^{-1} I - gamma c c^T with
  // gamma = rho2 / (rho1 * (rho1 + rho2 * c^T c)).
  Eigen::VectorXd inverse_apply(const Eigen::VectorXd& v) const;
  Eigen::MatrixXd inverse_apply(const Eigen::MatrixXd& v) const;
  Eigen::MatrixXd dense(Eigen::Index n) const;
  void validate(Eigen::Index n) const;
};

// Reusable direct solver for systems (mu * phi^T phi + Q) x = q. The
// factorization is built once; solves are two triangular substitutions.
//
// When phi is fat (M < N) the M x M matrix P = I + mu * phi Q^{-1} phi^T is
// factored instead of the N x N system, and solves go through the matrix
// inversion lemma:
//   (mu phi^T phi + Q)^{-1} q = Q^{-1} (q - phi^T P^{-1} (mu phi Q^{-1} q)).
// Immutable after construction; concurrent solves are safe.
class CachedSolver {
 public:
  CachedSolver(Eigen::MatrixXd phi, double mu, QSpec qspec);

  Eigen::VectorXd solve(const Eigen::VectorXd& q) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& q) const;

  const Eigen::MatrixXd& phi() const { return phi_; }
  double mu() const { return mu_; }
  const QSpec& qspec() const { return qspec_; }

  // True when the factored matrix is the M x M lemma system P rather than the
  // N x N normal system.
  bool factored_small_side() const { return use_lemma_; }
  // Lower-triangular Cholesky factor of the factored matrix (empty when mu = 0,
  // where no factorization is needed).
  Eigen::MatrixXd cholesky_factor() const;

  // Process-wide count of Cholesky factorizations performed by this class.
  static long long factorization_count();
  static void reset_factorization_count();

 private:
  Eigen::MatrixXd phi_;
  double mu_;
  QSpec qspec_;
  bool use_lemma_ = false;
  bool factored_ = false;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

// Free-function spelling of CachedSolver::solve.
Eigen::VectorXd cached_solve(const CachedSolver& solver, const Eigen::VectorXd& q);

}  // namespace robustcs
