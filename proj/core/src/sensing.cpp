#include "robustcs/sensing.hpp"

#include <cmath>
#include <stdexcept>

#include "robustcs/random.hpp"

namespace robustcs {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

double mixture_base_sigma(const Eigen::VectorXd& clean, double snr_db, double p,
                          double kappa) {
  const double m = static_cast<double>(clean.size());
  const double sigma_eff_sq = clean.squaredNorm() / (m * std::pow(10.0, snr_db / 10.0));
  return std::sqrt(sigma_eff_sq / (1.0 - p + p * kappa));
}

}  // namespace

Eigen::MatrixXd gen_sensing_matrix(Eigen::Index m, Eigen::Index n, std::uint64_t seed,
                                   bool orthogonal_rows) {
  require(m >= 1 && n >= 1, "gen_sensing_matrix: dimensions must be positive");
  Rng rng(mix_seed(seed, 0x70686921u));  // "phi!"
  Eigen::MatrixXd phi(m, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  for (Eigen::Index r = 0; r < m; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) {
      phi(r, c) = scale * rng.normal();
    }
  }
  if (orthogonal_rows) {
    require(m <= n, "gen_sensing_matrix: orthogonal rows need m <= n");
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(phi.transpose());
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, m);
    // Fix the column signs so the result is deterministic up to R's diagonal.
    const Eigen::MatrixXd r_mat = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
    for (Eigen::Index c = 0; c < m; ++c) {
      if (r_mat(c, c) < 0.0) q.col(c) = -q.col(c);
    }
    phi = q.transpose();
  }
  return phi;
}

double noise_base_sigma(const Eigen::VectorXd& clean, const NoiseSpec& spec) {
  if (const auto* gmm = std::get_if<GaussianMixtureNoise>(&spec)) {
    return mixture_base_sigma(clean, gmm->snr_db, gmm->contamination, gmm->kappa);
  }
  if (const auto* g = std::get_if<GaussianNoise>(&spec)) {
    return mixture_base_sigma(clean, g->snr_db, 0.0, 1.0);
  }
  return std::get<CauchyNoise>(spec).scale;
}

Eigen::VectorXd apply_noise(const Eigen::VectorXd& clean, const NoiseSpec& spec,
                            std::uint64_t seed) {
  require(clean.size() >= 1, "apply_noise: empty measurement vector");
  Rng rng(mix_seed(seed, 0x6e6f6973u));  // "nois"
  Eigen::VectorXd noisy = clean;

  if (const auto* cauchy = std::get_if<CauchyNoise>(&spec)) {
    require(cauchy->scale > 0.0, "apply_noise: Cauchy scale must be positive");
    for (Eigen::Index i = 0; i < noisy.size(); ++i) {
      noisy[i] += cauchy->scale * rng.cauchy();
    }
    return noisy;
  }

  double snr_db = 20.0, p = 0.0, kappa = 1.0;
  if (const auto* gmm = std::get_if<GaussianMixtureNoise>(&spec)) {
    require(gmm->contamination >= 0.0 && gmm->contamination < 1.0,
            "apply_noise: contamination must lie in [0, 1)");
    require(gmm->kappa >= 1.0, "apply_noise: kappa must be at least 1");
    snr_db = gmm->snr_db;
    p = gmm->contamination;
    kappa = gmm->kappa;
  } else {
    snr_db = std::get<GaussianNoise>(spec).snr_db;
  }

  const double sigma = mixture_base_sigma(clean, snr_db, p, kappa);
  const double sigma_outlier = sigma * std::sqrt(kappa);
  for (Eigen::Index i = 0; i < noisy.size(); ++i) {
    const bool outlier = p > 0.0 && rng.uniform() < p;
    noisy[i] += (outlier ? sigma_outlier : sigma) * rng.normal();
  }
  return noisy;
}

}  // namespace robustcs
