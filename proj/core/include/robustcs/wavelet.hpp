#pragma once

#include <Eigen/Dense>

namespace robustcs {

bool is_power_of_two(Eigen::Index n);

// Full-depth orthonormal 2-D Haar analysis (pyramid layout, one level per
// halving of the low-pass block). The coefficient vector is the transformed
// matrix flattened column-major; its l2 norm equals the Frobenius norm of the
// input. Dimensions must be powers of two.
Eigen::VectorXd haar2d(const Eigen::MatrixXd& frame);

// Exact inverse of haar2d for the given output shape.
Eigen::MatrixXd ihaar2d(const Eigen::VectorXd& coeffs, Eigen::Index rows,
                        Eigen::Index cols);

}  // namespace robustcs
