#include "biorec/preprocess.hpp"

#include <cmath>

#include <fmt/format.h>

#include "biorec/error.hpp"

namespace biorec {

namespace {

constexpr double kStdFloor = 1e-12;

Eigen::Index reflect101(Eigen::Index i, Eigen::Index n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
  }
  return i;
}

}  // namespace

void NormalizationMode::validate() const {
  if (variant == Normalization::luminous && (ln_window < 3 || ln_window % 2 == 0))
    throw ConfigError(fmt::format("ln_window must be odd and >= 3, got {}", ln_window));
}

std::string to_string(Normalization n) {
  switch (n) {
    case Normalization::none: return "none";
    case Normalization::standard: return "sn";
    case Normalization::luminous: return "ln";
  }
  return "none";
}

Normalization normalization_from_string(const std::string& name) {
  if (name == "none" || name == "NONE") return Normalization::none;
  if (name == "sn" || name == "SN") return Normalization::standard;
  if (name == "ln" || name == "LN") return Normalization::luminous;
  throw ConfigError(fmt::format("unknown normalization '{}'", name));
}

Image per_image_standardize(const Image& image) {
  if (image.size() == 0) throw InvalidArgument("cannot standardize an empty image");
  const double mean = image.mean();
  const Image centered = image.array() - mean;
  const double sd = std::sqrt(centered.squaredNorm() / static_cast<double>(image.size()));
  if (sd < kStdFloor) return Image::Zero(image.rows(), image.cols());
  return centered / sd;
}

Image luminous_normalize(const Image& image, int window) {
  if (image.size() == 0) throw InvalidArgument("cannot normalize an empty image");
  if (window < 3 || window % 2 == 0)
    throw InvalidArgument(fmt::format("ln_window must be odd and >= 3, got {}", window));
  const auto h = image.rows();
  const auto w = image.cols();
  const int r = window / 2;
  const double count = static_cast<double>(window) * window;

  Image local(h, w);
  for (Eigen::Index y = 0; y < h; ++y) {
    for (Eigen::Index x = 0; x < w; ++x) {
      double sum = 0;
      for (int dy = -r; dy <= r; ++dy) {
        const auto yy = reflect101(y + dy, h);
        for (int dx = -r; dx <= r; ++dx) sum += image(yy, reflect101(x + dx, w));
      }
      const double mean = sum / count;
      double ss = 0;
      for (int dy = -r; dy <= r; ++dy) {
        const auto yy = reflect101(y + dy, h);
        for (int dx = -r; dx <= r; ++dx) {
          const double d = image(yy, reflect101(x + dx, w)) - mean;
          ss += d * d;
        }
      }
      const double var = ss / count;
      local(y, x) = (image(y, x) - mean) / (std::sqrt(var) + kStdFloor);
    }
  }
  const double lo = local.minCoeff();
  const double hi = local.maxCoeff();
  if (hi - lo < kStdFloor) return Image::Zero(h, w);
  return ((local.array() - lo) / (hi - lo)).cwiseMax(0.0).cwiseMin(1.0);
}

Image normalize(const Image& image, const NormalizationMode& mode) {
  switch (mode.variant) {
    case Normalization::none: return image;
    case Normalization::standard: return per_image_standardize(image);
    case Normalization::luminous: return luminous_normalize(image, mode.ln_window);
  }
  return image;
}

Vector vectorize(const Image& image) {
  return Eigen::Map<const Vector>(image.data(), image.size());
}

Image unvectorize(const Vector& v, Eigen::Index height, Eigen::Index width) {
  if (v.size() != height * width)
    throw InvalidArgument(fmt::format("vector of length {} cannot be {}x{}", v.size(), height, width));
  return Eigen::Map<const Image>(v.data(), height, width);
}

}  // namespace biorec
