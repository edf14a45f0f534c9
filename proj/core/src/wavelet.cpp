#include "robustcs/wavelet.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace robustcs {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

// One analysis butterfly along a strided slice of length len (even):
// pairs (a, b) -> ((a + b)/sqrt2, (a - b)/sqrt2), averages packed first.
void analyze_slice(double* data, Eigen::Index len, Eigen::Index stride,
                   std::vector<double>& tmp) {
  const Eigen::Index half = len / 2;
  for (Eigen::Index i = 0; i < half; ++i) {
    const double a = data[(2 * i) * stride];
    const double b = data[(2 * i + 1) * stride];
    tmp[i] = (a + b) * kInvSqrt2;
    tmp[half + i] = (a - b) * kInvSqrt2;
  }
  for (Eigen::Index i = 0; i < len; ++i) data[i * stride] = tmp[i];
}

void synthesize_slice(double* data, Eigen::Index len, Eigen::Index stride,
                      std::vector<double>& tmp) {
  const Eigen::Index half = len / 2;
  for (Eigen::Index i = 0; i < half; ++i) {
    const double avg = data[i * stride];
    const double diff = data[(half + i) * stride];
    tmp[2 * i] = (avg + diff) * kInvSqrt2;
    tmp[2 * i + 1] = (avg - diff) * kInvSqrt2;
  }
  for (Eigen::Index i = 0; i < len; ++i) data[i * stride] = tmp[i];
}

}  // namespace

bool is_power_of_two(Eigen::Index n) { return n > 0 && (n & (n - 1)) == 0; }

Eigen::VectorXd haar2d(const Eigen::MatrixXd& frame) {
  require(is_power_of_two(frame.rows()) && is_power_of_two(frame.cols()),
          "haar2d: dimensions must be powers of two");
  Eigen::MatrixXd a = frame;
  const Eigen::Index lead = a.outerStride();
  std::vector<double> tmp(static_cast<std::size_t>(std::max(a.rows(), a.cols())));

  Eigen::Index h = a.rows();
  Eigen::Index w = a.cols();
  while (h > 1 || w > 1) {
    if (w > 1) {  // along each of the first h rows
      for (Eigen::Index r = 0; r < h; ++r) analyze_slice(a.data() + r, w, lead, tmp);
    }
    if (h > 1) {  // along each of the first w columns
      for (Eigen::Index c = 0; c < w; ++c) analyze_slice(a.data() + c * lead, h, 1, tmp);
    }
    if (w > 1) w /= 2;
    if (h > 1) h /= 2;
  }
  return Eigen::Map<const Eigen::VectorXd>(a.data(), a.size());
}

Eigen::MatrixXd ihaar2d(const Eigen::VectorXd& coeffs, Eigen::Index rows,
                        Eigen::Index cols) {
  require(is_power_of_two(rows) && is_power_of_two(cols),
          "ihaar2d: dimensions must be powers of two");
  require(coeffs.size() == rows * cols, "ihaar2d: coefficient length mismatch");
  Eigen::MatrixXd a = Eigen::Map<const Eigen::MatrixXd>(coeffs.data(), rows, cols);
  const Eigen::Index lead = a.outerStride();
  std::vector<double> tmp(static_cast<std::size_t>(std::max(rows, cols)));

  // Replay the analysis block sizes, then undo them in reverse order.
  std::vector<std::pair<Eigen::Index, Eigen::Index>> stages;
  for (Eigen::Index h = rows, w = cols; h > 1 || w > 1;) {
    stages.emplace_back(h, w);
    if (w > 1) w /= 2;
    if (h > 1) h /= 2;
  }
  for (auto it = stages.rbegin(); it != stages.rend(); ++it) {
    const auto [h, w] = *it;
    if (h > 1) {
      for (Eigen::Index c = 0; c < w; ++c) synthesize_slice(a.data() + c * lead, h, 1, tmp);
    }
    if (w > 1) {
      for (Eigen::Index r = 0; r < h; ++r) synthesize_slice(a.data() + r, w, lead, tmp);
    }
  }
  return a;
}

}  // namespace robustcs
