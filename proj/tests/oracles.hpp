#pragma once

// Independent brute-force references used by the unit and acceptance suites.
// Everything here is deliberately written against the mathematical definitions
// rather than the library's solution paths.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace oracles {

// argmin of f over the 1-D grid [lo, hi] with the given step.
inline double grid_minimize_1d(const std::function<double(double)>& f, double lo,
                               double hi, double step) {
  double best_x = lo;
  double best_f = std::numeric_limits<double>::infinity();
  for (double x = lo; x <= hi + 0.5 * step; x += step) {
    const double fx = f(x);
    if (fx < best_f) {
      best_f = fx;
      best_x = x;
    }
  }
  return best_x;
}

// argmin of f over an axis-aligned 2-D grid with `cells` cells per axis.
inline Eigen::Vector2d grid_minimize_2d(
    const std::function<double(const Eigen::Vector2d&)>& f, double lo, double hi,
    int cells) {
  Eigen::Vector2d best(lo, lo);
  double best_f = std::numeric_limits<double>::infinity();
  const double step = (hi - lo) / cells;
  for (int i = 0; i <= cells; ++i) {
    for (int j = 0; j <= cells; ++j) {
      const Eigen::Vector2d z(lo + i * step, lo + j * step);
      const double fz = f(z);
      if (fz < best_f) {
        best_f = fz;
        best = z;
      }
    }
  }
  return best;
}

// Central finite differences of a scalar field.
inline Eigen::VectorXd finite_difference_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
    double h = 1e-6) {
  Eigen::VectorXd grad(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double fp = f(probe);
    probe[i] = x[i] - h;
    const double fm = f(probe);
    probe[i] = x[i];
    grad[i] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

// Dense solve of A x = b by full-pivot LU (independent of any Cholesky path).
inline Eigen::VectorXd dense_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  return a.fullPivLu().solve(b);
}

// Exact minimizer of ||y - phi x||_1 + lambda ||x||_1 for small problems by
// enumerating kink-hyperplane intersections: the objective is piecewise linear
// and convex, so some optimum lies on the intersection of n hyperplanes drawn
// from {phi_i x = y_i} and {x_j = 0}.
inline double l1loss_vertex_minimum(const Eigen::MatrixXd& phi,
                                    const Eigen::VectorXd& y, double lambda) {
  const int m = static_cast<int>(phi.rows());
  const int n = static_cast<int>(phi.cols());
  const int total = m + n;
  std::vector<int> pick(n);
  double best = std::numeric_limits<double>::infinity();

  std::function<void(int, int)> recurse = [&](int start, int depth) {
    if (depth == n) {
      Eigen::MatrixXd a(n, n);
      Eigen::VectorXd b(n);
      for (int r = 0; r < n; ++r) {
        if (pick[r] < m) {
          a.row(r) = phi.row(pick[r]);
          b[r] = y[pick[r]];
        } else {
          a.row(r).setZero();
          a(r, pick[r] - m) = 1.0;
          b[r] = 0.0;
        }
      }
      const Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
      if (lu.isInvertible()) {
        const Eigen::VectorXd x = lu.solve(b);
        const double f = (y - phi * x).lpNorm<1>() + lambda * x.lpNorm<1>();
        best = std::min(best, f);
      }
      return;
    }
    for (int i = start; i <= total - (n - depth); ++i) {
      pick[depth] = i;
      recurse(i + 1, depth + 1);
    }
  };
  recurse(0, 0);
  return best;
}

}  // namespace oracles
