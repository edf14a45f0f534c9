#pragma once

#include <Eigen/Dense>

namespace robustcs {

// Soft thresholding, the proximal map of tau * |x|: sign(v) * max(|v| - tau, 0).
// sign(0) = 0.
double soft_threshold(double v, double tau);
Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double tau);

// Block shrinkage, the proximal map of tau * ||z||_2:
//   v * max(||v||_2 - tau, 0) / ||v||_2, and 0 when ||v||_2 <= tau or v = 0.
// The output is always a nonnegative multiple of v.
Eigen::VectorXd group_shrink(const Eigen::VectorXd& v, double tau);

// Scaling applied by group_shrink to a block of the given norm.
double group_shrink_factor(double norm, double tau);

// Minimizer of 0.5 * L * ||x - v||^2 + lambda * ||x||_1 + 0.5 * beta * ||x||_2^2,
// i.e. soft_threshold(v / (1 + beta / L), lambda / (L + beta)). With beta = 0 this
// is exactly soft_threshold(v, lambda / L).
Eigen::VectorXd elastic_shrink(const Eigen::VectorXd& v, double lambda, double beta,
                               double L);

}  // namespace robustcs
