#include "robustcs/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace robustcs {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

double median_inplace(std::vector<double>& v) {
  const std::size_t n = v.size();
  auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (n % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(v.begin(), mid);
  return 0.5 * (lo + hi);
}

}  // namespace

SensingProblem::SensingProblem(Eigen::MatrixXd phi_in, Eigen::VectorXd y_in)
    : phi(std::move(phi_in)), y(std::move(y_in)) {
  require(phi.rows() >= 1 && phi.cols() >= 1, "SensingProblem: phi must be at least 1x1");
  require(y.size() == phi.rows(), "SensingProblem: y length must equal rows of phi");
  require(phi.allFinite(), "SensingProblem: phi has non-finite entries");
  require(y.allFinite(), "SensingProblem: y has non-finite entries");
}

HuberParams::HuberParams(double k, double nu) : k_(k), nu_(nu), c_(k * nu * nu) {
  require(std::isfinite(k) && k > 0.0, "HuberParams: k must be positive");
  require(std::isfinite(nu) && nu > 0.0, "HuberParams: nu must be positive");
  require(c_ > 0.0, "HuberParams: threshold underflowed to zero");
}

HuberParams HuberParams::from_scale(double nu, double tuning) {
  require(std::isfinite(nu) && nu > 0.0, "HuberParams::from_scale: nu must be positive");
  require(std::isfinite(tuning) && tuning > 0.0,
          "HuberParams::from_scale: tuning must be positive");
  return HuberParams(tuning / nu, nu);  // c = k nu^2 = tuning * nu
}

HuberParams HuberParams::quadratic() { return HuberParams(1e30, 1.0); }

void HuberParams::set_k(double k) {
  require(std::isfinite(k) && k > 0.0, "HuberParams: k must be positive");
  k_ = k;
  c_ = k_ * nu_ * nu_;
}

void HuberParams::set_nu(double nu) {
  require(std::isfinite(nu) && nu > 0.0, "HuberParams: nu must be positive");
  nu_ = nu;
  c_ = k_ * nu_ * nu_;
}

double huber_rho(double r, const HuberParams& params) {
  require(std::isfinite(r), "huber_rho: residual must be finite");
  const double c = params.threshold();
  const double a = std::abs(r);
  if (a <= c) return 0.5 * r * r;
  return c * a - 0.5 * c * c;
}

double huber_psi(double r, const HuberParams& params) {
  require(std::isfinite(r), "huber_psi: residual must be finite");
  const double c = params.threshold();
  return std::clamp(r, -c, c);
}

Eigen::VectorXd huber_psi_vec(const Eigen::VectorXd& r, const HuberParams& params) {
  const double c = params.threshold();
  return r.array().min(c).max(-c).matrix();
}

double robust_loss_residual(const Eigen::VectorXd& r, const HuberParams& params) {
  const double c = params.threshold();
  double total = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    const double a = std::abs(r[i]);
    total += (a <= c) ? 0.5 * r[i] * r[i] : c * a - 0.5 * c * c;
  }
  return total;
}

double robust_loss(const Eigen::VectorXd& x, const SensingProblem& prob,
                   const HuberParams& params) {
  require(x.size() == prob.dimension(), "robust_loss: x length must equal cols of phi");
  return robust_loss_residual(prob.y - prob.phi * x, params);
}

Eigen::VectorXd robust_grad(const Eigen::VectorXd& x, const SensingProblem& prob,
                            const HuberParams& params) {
  require(x.size() == prob.dimension(), "robust_grad: x length must equal cols of phi");
  return prob.phi.transpose() * huber_psi_vec(prob.phi * x - prob.y, params);
}

double estimate_scale_mad(const Eigen::VectorXd& residual, double floor) {
  require(residual.size() >= 1, "estimate_scale_mad: empty residual");
  constexpr double kGaussianConsistency = 1.4826;

  std::vector<double> work(residual.data(), residual.data() + residual.size());
  const double med = median_inplace(work);
  for (std::size_t i = 0; i < work.size(); ++i)
    work[i] = std::abs(residual[static_cast<Eigen::Index>(i)] - med);
  double mad = median_inplace(work);
  if (mad == 0.0) {
    for (std::size_t i = 0; i < work.size(); ++i)
      work[i] = std::abs(residual[static_cast<Eigen::Index>(i)]);
    mad = median_inplace(work);
  }
  const double scale = kGaussianConsistency * mad;
  return scale > 0.0 ? scale : floor;
}

Eigen::VectorXd irls_weights(const Eigen::VectorXd& residual, const HuberParams& params,
                             const WeightScheme& scheme) {
  if (const auto* mr = std::get_if<ModifiedResiduals>(&scheme)) {
    require(mr->mu > 0.0, "irls_weights: mu must be positive");
    return Eigen::VectorXd::Constant(residual.size(), mr->mu);
  }
  const auto& irls = std::get<IterativelyReweighted>(scheme);
  require(irls.epsilon_floor > 0.0, "irls_weights: epsilon_floor must be positive");
  const double c = params.threshold();
  Eigen::VectorXd w(residual.size());
  for (Eigen::Index i = 0; i < residual.size(); ++i) {
    const double r = residual[i];
    // psi(r)/r -> 1 as r -> 0.
    w[i] = (std::abs(r) < irls.epsilon_floor) ? 1.0 : std::clamp(r, -c, c) / r;
  }
  return w;
}

Eigen::VectorXd majorization_point(const Eigen::VectorXd& x, const SensingProblem& prob,
                                   const HuberParams& params,
                                   const Eigen::VectorXd& weights) {
  require(x.size() == prob.dimension(), "majorization_point: x length must equal cols of phi");
  require(weights.size() == prob.measurements(),
          "majorization_point: weights length must equal rows of phi");
  require((weights.array() > 0.0).all(), "majorization_point: weights must be positive");
  const Eigen::VectorXd phi_x = prob.phi * x;
  return (huber_psi_vec(prob.y - phi_x, params).array() / weights.array()).matrix() + phi_x;
}

}  // namespace robustcs
