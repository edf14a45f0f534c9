#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <variant>

namespace robustcs {

// i.i.d. Gaussian entries scaled by 1/sqrt(m), deterministic per seed. With
// orthogonal_rows (requires m <= n) the rows are orthonormalized, so
// phi phi^T = I.
Eigen::MatrixXd gen_sensing_matrix(Eigen::Index m, Eigen::Index n, std::uint64_t seed,
                                   bool orthogonal_rows = false);

// Two-component Gaussian mixture: each entry is contaminated independently
// with probability `contamination`, the outlier component having kappa times
// the base variance. The base variance is set so that
//   10 log10(||clean||^2 / (m sigma_eff^2)) = snr_db,
// where sigma_eff^2 = sigma^2 (1 - p + p kappa) is the mixture variance.
struct GaussianMixtureNoise {
  double snr_db = 20.0;
  double contamination = 0.1;
  double kappa = 100.0;
};

struct GaussianNoise {
  double snr_db = 20.0;
};

// Additive scale * standard-Cauchy draws.
struct CauchyNoise {
  double scale = 0.05;
};

using NoiseSpec = std::variant<GaussianMixtureNoise, GaussianNoise, CauchyNoise>;

// Base (uncontaminated component) standard deviation implied by the spec for
// this clean measurement vector; the Cauchy case returns its scale.
double noise_base_sigma(const Eigen::VectorXd& clean, const NoiseSpec& spec);

Eigen::VectorXd apply_noise(const Eigen::VectorXd& clean, const NoiseSpec& spec,
                            std::uint64_t seed);

}  // namespace robustcs
