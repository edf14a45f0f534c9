#include "robustcs/linalg.hpp"

#include <atomic>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace robustcs {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

std::atomic<long long> g_factorizations{0};

// First nonpositive pivot of an (attempted) Cholesky factorization, for error
// reporting after Eigen's LLT flags a numerical issue.
Eigen::Index find_bad_pivot(const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = a(j, j) - l.row(j).head(j).squaredNorm();
    if (!(d > 0.0)) return j;
    l(j, j) = std::sqrt(d);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      l(i, j) = (a(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / l(j, j);
    }
  }
  return -1;
}

}  // namespace

SpectralBound spectral_bound(const Eigen::MatrixXd& phi, double rel_tol,
                             int max_iterations, std::uint64_t seed) {
  require(phi.size() > 0, "spectral_bound: empty matrix");
  SpectralBound out;
  if (phi.isZero(0.0)) {
    out.zero_matrix = true;
    return out;
  }

  const bool use_gram = phi.cols() <= phi.rows();  // iterate on the smaller side
  const Eigen::Index n = use_gram ? phi.cols() : phi.rows();

  std::mt19937_64 gen(seed);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    v[i] = 1.0 + static_cast<double>(gen() >> 11) * 0x1.0p-53;
  }
  v.normalize();

  double lambda = 0.0;
  for (int it = 1; it <= max_iterations; ++it) {
    Eigen::VectorXd w;
    if (use_gram) {
      w = phi.transpose() * (phi * v);
    } else {
      w = phi * (phi.transpose() * v);
    }
    const double next = v.dot(w);  // Rayleigh quotient for unit v
    out.iterations_used = it;
    const double wnorm = w.norm();
    if (wnorm == 0.0) {
      // Start vector sat in the null space; reseed once.
      for (Eigen::Index i = 0; i < n; ++i) {
        v[i] = static_cast<double>(gen() >> 11) * 0x1.0p-53 - 0.5;
      }
      v.normalize();
      continue;
    }
    v = w / wnorm;
    if (std::abs(next - lambda) <= rel_tol * std::abs(next)) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  out.lambda_max = std::max(lambda, 0.0);
  return out;
}

void QSpec::validate(Eigen::Index n) const {
  require(std::isfinite(rho1) && rho1 > 0.0, "QSpec: rho1 must be positive");
  if (rank_one) {
    require(std::isfinite(rank_one->rho2) && rank_one->rho2 > 0.0,
            "QSpec: rho2 must be positive");
    require(rank_one->c.allFinite(), "QSpec: c has non-finite entries");
    require(n < 0 || rank_one->c.size() == n, "QSpec: c has wrong length");
  }
}

Eigen::VectorXd QSpec::inverse_apply(const Eigen::VectorXd& v) const {
  if (!rank_one) return v / rho1;
  const auto& r1 = *rank_one;
  const double gamma = r1.rho2 / (rho1 * (rho1 + r1.rho2 * r1.c.squaredNorm()));
  return v / rho1 - gamma * r1.c * r1.c.dot(v);
}

Eigen::MatrixXd QSpec::inverse_apply(const Eigen::MatrixXd& v) const {
  if (!rank_one) return v / rho1;
  const auto& r1 = *rank_one;
  const double gamma = r1.rho2 / (rho1 * (rho1 + r1.rho2 * r1.c.squaredNorm()));
  return v / rho1 - gamma * r1.c * (r1.c.transpose() * v);
}

Eigen::MatrixXd QSpec::dense(Eigen::Index n) const {
  Eigen::MatrixXd q = rho1 * Eigen::MatrixXd::Identity(n, n);
  if (rank_one) q += rank_one->rho2 * rank_one->c * rank_one->c.transpose();
  return q;
}

CachedSolver::CachedSolver(Eigen::MatrixXd phi, double mu, QSpec qspec)
    : phi_(std::move(phi)), mu_(mu), qspec_(std::move(qspec)) {
  require(phi_.size() > 0, "CachedSolver: empty matrix");
  require(std::isfinite(mu_) && mu_ >= 0.0, "CachedSolver: mu must be nonnegative");
  qspec_.validate(phi_.cols());

  if (mu_ == 0.0) return;  // pure Q^{-1}, analytic

  const Eigen::Index m = phi_.rows();
  const Eigen::Index n = phi_.cols();
  use_lemma_ = m < n;

  Eigen::MatrixXd system;
  if (use_lemma_) {
    system = Eigen::MatrixXd::Identity(m, m) +
             mu_ * phi_ * qspec_.inverse_apply(Eigen::MatrixXd(phi_.transpose()));
  } else {
    system = mu_ * phi_.transpose() * phi_ + qspec_.dense(n);
  }
  llt_.compute(system);
  ++g_factorizations;
  if (llt_.info() != Eigen::Success) {
    const Eigen::Index pivot = find_bad_pivot(system);
    throw std::runtime_error("CachedSolver: system is not positive definite (pivot " +
                             std::to_string(pivot) + ")");
  }
  factored_ = true;
}

Eigen::VectorXd CachedSolver::solve(const Eigen::VectorXd& q) const {
  require(q.size() == phi_.cols(), "CachedSolver::solve: wrong right-hand-side length");
  if (mu_ == 0.0) return qspec_.inverse_apply(q);
  if (use_lemma_) {
    const Eigen::VectorXd qinv_q = qspec_.inverse_apply(q);
    const Eigen::VectorXd w = llt_.solve(Eigen::VectorXd(mu_ * (phi_ * qinv_q)));
    return qspec_.inverse_apply(Eigen::VectorXd(q - phi_.transpose() * w));
  }
  return llt_.solve(q);
}

Eigen::MatrixXd CachedSolver::solve(const Eigen::MatrixXd& q) const {
  require(q.rows() == phi_.cols(), "CachedSolver::solve: wrong right-hand-side rows");
  if (mu_ == 0.0) return qspec_.inverse_apply(q);
  if (use_lemma_) {
    const Eigen::MatrixXd qinv_q = qspec_.inverse_apply(q);
    const Eigen::MatrixXd w = llt_.solve(Eigen::MatrixXd(mu_ * (phi_ * qinv_q)));
    return qspec_.inverse_apply(Eigen::MatrixXd(q - phi_.transpose() * w));
  }
  return llt_.solve(q);
}

Eigen::MatrixXd CachedSolver::cholesky_factor() const {
  if (!factored_) return Eigen::MatrixXd();
  return llt_.matrixL();
}

long long CachedSolver::factorization_count() { return g_factorizations.load(); }

void CachedSolver::reset_factorization_count() { g_factorizations.store(0); }

Eigen::VectorXd cached_solve(const CachedSolver& solver, const Eigen::VectorXd& q) {
  return solver.solve(q);
}

}  // namespace robustcs
