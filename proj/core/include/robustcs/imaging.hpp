#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace robustcs {

// Unit-range image, H x W, H and W powers of two.
using ImageFrame = Eigen::MatrixXd;

// Black background with n_bars axis-aligned bars of thickness 1-3 and
// intensity in [0.5, 1], deterministic per seed. Overlaps keep the brighter
// value, so frames stay piecewise constant and wavelet-compressible.
ImageFrame gen_random_bars(int size, int n_bars, std::uint64_t seed);

// Static random-bars background shared by every frame plus a bright
// block_size x block_size square translating deterministically across frames.
// block_size = 0 yields identical frames.
std::vector<ImageFrame> gen_bar_sequence(int size, int n_static_bars, int n_frames,
                                         int block_size, std::uint64_t seed);

// 10 log10(peak^2 / MSE) with peak = 1. Identical frames report +infinity.
double psnr(const ImageFrame& reference, const ImageFrame& recovered);

// 8-bit quantization used for PGM output: round half up, clamped to [0, 255].
Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> quantize8(
    const ImageFrame& frame);

}  // namespace robustcs
