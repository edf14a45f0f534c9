#pragma once

#include <Eigen/Dense>

#include <variant>

namespace robustcs {

// Dense sensing model y = phi * x + n. phi is M x N; M < N is the usual
// compressive regime but nothing here assumes it.
struct SensingProblem {
  Eigen::MatrixXd phi;
  Eigen::VectorXd y;

  SensingProblem(Eigen::MatrixXd phi_in, Eigen::VectorXd y_in);

  Eigen::Index measurements() const { return phi.rows(); }
  Eigen::Index dimension() const { return phi.cols(); }
};

// Huber loss configuration. The clipping threshold is c = k * nu^2 and is
// kept in sync whenever k or nu changes.
class HuberParams {
 public:
  // Classical 95%-efficiency tuning constant for Gaussian data.
  static constexpr double kDefaultTuning = 1.345;

  HuberParams(double k, double nu);

  // Params whose threshold is c = tuning * nu, the usual robust-regression
  // convention for a scale estimate nu.
  static HuberParams from_scale(double nu, double tuning = kDefaultTuning);

  // Effectively infinite threshold: the loss degenerates to 0.5 * r^2 for
  // every representable residual, i.e. ordinary least squares.
  static HuberParams quadratic();

  double k() const { return k_; }
  double nu() const { return nu_; }
  double threshold() const { return c_; }

  void set_k(double k);
  void set_nu(double nu);

 private:
  double k_;
  double nu_;
  double c_;
};

// Diagonal weight choices for the quadratic surrogate of the Huber loss.
struct ModifiedResiduals {
  double mu = 1.0;
};
struct IterativelyReweighted {
  double epsilon_floor = 1e-12;
};
using WeightScheme = std::variant<ModifiedResiduals, IterativelyReweighted>;

// Huber penalty: 0.5 r^2 inside |r| <= c, linear with slope c outside.
double huber_rho(double r, const HuberParams& params);

// Its derivative, the clipped identity psi(r) = clamp(r, -c, c).
double huber_psi(double r, const HuberParams& params);

// Elementwise psi on a residual vector (no finiteness checks; solver hot path).
Eigen::VectorXd huber_psi_vec(const Eigen::VectorXd& r, const HuberParams& params);

// Sum of huber_rho over the entries of a residual vector.
double robust_loss_residual(const Eigen::VectorXd& r, const HuberParams& params);

// g(x) = sum_i rho(y_i - (phi x)_i).
double robust_loss(const Eigen::VectorXd& x, const SensingProblem& prob,
                   const HuberParams& params);

// grad g(x) = phi^T psi(phi x - y). g is C^1: at |r| = c both branches give
// the same derivative, so the clipped branch is the true gradient there.
Eigen::VectorXd robust_grad(const Eigen::VectorXd& x, const SensingProblem& prob,
                            const HuberParams& params);

// Gaussian-consistent MAD scale: 1.4826 * median(|r_i - median(r)|).
// If the MAD is exactly zero falls back to 1.4826 * median(|r_i|); if that is
// still zero returns `floor`.
double estimate_scale_mad(const Eigen::VectorXd& residual, double floor = 1e-12);

// Diagonal surrogate weights. Modified residuals: all entries mu.
// Iteratively reweighted: w_ii = psi(r_i)/r_i, with the analytic limit 1 when
// |r_i| falls below the configured floor.
Eigen::VectorXd irls_weights(const Eigen::VectorXd& residual, const HuberParams& params,
                             const WeightScheme& scheme);

// Expansion point of the quadratic surrogate: v = W^{-1} psi(y - phi x) + phi x.
Eigen::VectorXd majorization_point(const Eigen::VectorXd& x, const SensingProblem& prob,
                                   const HuberParams& params,
                                   const Eigen::VectorXd& weights);

}  // namespace robustcs
