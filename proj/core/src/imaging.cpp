#include "robustcs/imaging.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "robustcs/random.hpp"

namespace robustcs {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

void paint_bar(ImageFrame& frame, Rng& rng) {
  const int size = static_cast<int>(frame.rows());
  const bool horizontal = rng.uniform() < 0.5;
  const int thickness = rng.uniform_int(1, 3);
  const int position = rng.uniform_int(0, size - thickness);
  const double intensity = 0.5 + 0.5 * rng.uniform();
  for (int t = 0; t < thickness; ++t) {
    if (horizontal) {
      for (int c = 0; c < size; ++c) {
        frame(position + t, c) = std::max(frame(position + t, c), intensity);
      }
    } else {
      for (int r = 0; r < size; ++r) {
        frame(r, position + t) = std::max(frame(r, position + t), intensity);
      }
    }
  }
}

}  // namespace

ImageFrame gen_random_bars(int size, int n_bars, std::uint64_t seed) {
  require(size >= 8 && (size & (size - 1)) == 0, "gen_random_bars: size must be a power of two >= 8");
  require(n_bars >= 0, "gen_random_bars: n_bars must be nonnegative");
  ImageFrame frame = ImageFrame::Zero(size, size);
  Rng rng(mix_seed(seed, 0x62617273u));  // "bars"
  for (int i = 0; i < n_bars; ++i) paint_bar(frame, rng);
  return frame;
}

std::vector<ImageFrame> gen_bar_sequence(int size, int n_static_bars, int n_frames,
                                         int block_size, std::uint64_t seed) {
  require(n_frames >= 1, "gen_bar_sequence: need at least one frame");
  require(block_size >= 0 && block_size < size, "gen_bar_sequence: block too large");
  const ImageFrame background = gen_random_bars(size, n_static_bars, seed);

  Rng rng(mix_seed(seed, 0x626c6f63u));  // "bloc"
  const double block_intensity = 0.7 + 0.3 * rng.uniform();
  const int row0 = block_size > 0 ? rng.uniform_int(0, size - block_size) : 0;
  const int col0 = block_size > 0 ? rng.uniform_int(0, size - block_size) : 0;
  const int step = 2;

  std::vector<ImageFrame> frames;
  frames.reserve(static_cast<std::size_t>(n_frames));
  for (int t = 0; t < n_frames; ++t) {
    ImageFrame frame = background;
    if (block_size > 0) {
      const int span = size - block_size + 1;
      const int col = (col0 + t * step) % span;
      for (int r = 0; r < block_size; ++r) {
        for (int c = 0; c < block_size; ++c) {
          frame(row0 + r, col + c) = std::max(frame(row0 + r, col + c), block_intensity);
        }
      }
    }
    frames.push_back(std::move(frame));
  }
  return frames;
}

double psnr(const ImageFrame& reference, const ImageFrame& recovered) {
  require(reference.rows() == recovered.rows() && reference.cols() == recovered.cols(),
          "psnr: dimension mismatch");
  const double mse = (reference - recovered).squaredNorm() /
                     static_cast<double>(reference.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> quantize8(
    const ImageFrame& frame) {
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> out(frame.rows(),
                                                                  frame.cols());
  for (Eigen::Index r = 0; r < frame.rows(); ++r) {
    for (Eigen::Index c = 0; c < frame.cols(); ++c) {
      const double v = std::floor(frame(r, c) * 255.0 + 0.5);
      out(r, c) = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
    }
  }
  return out;
}

}  // namespace robustcs
