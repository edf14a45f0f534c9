#include "robustcs/prox.hpp"

#include <cmath>
#include <stdexcept>

namespace robustcs {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

double soft_threshold(double v, double tau) {
  require(std::isfinite(tau) && tau >= 0.0, "soft_threshold: tau must be nonnegative");
  if (v > tau) return v - tau;
  if (v < -tau) return v + tau;
  return 0.0;
}

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double tau) {
  require(std::isfinite(tau) && tau >= 0.0, "soft_threshold: tau must be nonnegative");
  return ((v.array() - tau).max(0.0) + (v.array() + tau).min(0.0)).matrix();
}

double group_shrink_factor(double norm, double tau) {
  if (norm <= tau || norm == 0.0) return 0.0;
  return (norm - tau) / norm;
}

Eigen::VectorXd group_shrink(const Eigen::VectorXd& v, double tau) {
  require(std::isfinite(tau) && tau >= 0.0, "group_shrink: tau must be nonnegative");
  const double norm = v.norm();
  const double factor = group_shrink_factor(norm, tau);
  if (factor == 0.0) return Eigen::VectorXd::Zero(v.size());
  return factor * v;
}

Eigen::VectorXd elastic_shrink(const Eigen::VectorXd& v, double lambda, double beta,
                               double L) {
  require(std::isfinite(L) && L > 0.0, "elastic_shrink: L must be positive");
  require(std::isfinite(beta) && beta >= 0.0, "elastic_shrink: beta must be nonnegative");
  require(std::isfinite(lambda) && lambda >= 0.0, "elastic_shrink: lambda must be nonnegative");
  return soft_threshold(Eigen::VectorXd(v / (1.0 + beta / L)), lambda / (L + beta));
}

}  // namespace robustcs
