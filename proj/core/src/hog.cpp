#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "biorec/error.hpp"
#include "biorec/features.hpp"

namespace biorec {

namespace {

constexpr double kBlockEps = 1e-6;
constexpr double kBinWidth = 180.0 / HogConfig::kBins;

}  // namespace

void HogConfig::validate() const {
  if (cell_y < 2 || cell_x < 2)
    throw InvalidArgument(fmt::format("HOG cells must be at least 2x2, got {}x{}", cell_y, cell_x));
}

Eigen::Index HogConfig::descriptor_length(int height, int width) const {
  const Eigen::Index blocks_y = height / cell_y - (kBlockCells - 1);
  const Eigen::Index blocks_x = width / cell_x - (kBlockCells - 1);
  if (blocks_y < 1 || blocks_x < 1) return 0;
  return blocks_y * blocks_x * kBlockCells * kBlockCells * kBins;
}

Vector hog_descriptor(const Image& image, const HogConfig& cfg) {
  cfg.validate();
  const auto h = image.rows();
  const auto w = image.cols();
  if (h < HogConfig::kBlockCells * cfg.cell_y || w < HogConfig::kBlockCells * cfg.cell_x)
    throw InvalidArgument(fmt::format("{}x{} image smaller than one {}x{}-pixel HOG block", h, w,
                                      HogConfig::kBlockCells * cfg.cell_y,
                                      HogConfig::kBlockCells * cfg.cell_x));
  const auto cells_y = h / cfg.cell_y;
  const auto cells_x = w / cfg.cell_x;

  // Per-cell orientation histograms, cell (cy, cx) at offset (cy*cells_x + cx)*kBins.
  Vector cells = Vector::Zero(cells_y * cells_x * HogConfig::kBins);
  for (Eigen::Index y = 0; y < cells_y * cfg.cell_y; ++y) {
    const auto up = std::max<Eigen::Index>(y - 1, 0);
    const auto down = std::min<Eigen::Index>(y + 1, h - 1);
    const auto cy = y / cfg.cell_y;
    for (Eigen::Index x = 0; x < cells_x * cfg.cell_x; ++x) {
      const auto left = std::max<Eigen::Index>(x - 1, 0);
      const auto right = std::min<Eigen::Index>(x + 1, w - 1);
      const double gx = image(y, right) - image(y, left);
      const double gy = image(down, x) - image(up, x);
      const double mag = std::hypot(gx, gy);
      if (mag == 0.0) continue;
      double angle = std::atan2(gy, gx) * 180.0 / std::numbers::pi;
      if (angle < 0.0) angle += 180.0;
      if (angle >= 180.0) angle -= 180.0;

      const double pos = angle / kBinWidth - 0.5;
      const double lower = std::floor(pos);
      const double frac = pos - lower;
      const int b0 = (static_cast<int>(lower) + HogConfig::kBins) % HogConfig::kBins;
      const int b1 = (b0 + 1) % HogConfig::kBins;
      const auto base = (cy * cells_x + x / cfg.cell_x) * HogConfig::kBins;
      cells[base + b0] += (1.0 - frac) * mag;
      cells[base + b1] += frac * mag;
    }
  }

  constexpr int block_len = HogConfig::kBlockCells * HogConfig::kBlockCells * HogConfig::kBins;
  const auto blocks_y = cells_y - 1;
  const auto blocks_x = cells_x - 1;
  Vector out(blocks_y * blocks_x * block_len);
  Eigen::Index offset = 0;
  for (Eigen::Index by = 0; by < blocks_y; ++by) {
    for (Eigen::Index bx = 0; bx < blocks_x; ++bx) {
      auto block = out.segment(offset, block_len);
      Eigen::Index k = 0;
      for (int dy = 0; dy < HogConfig::kBlockCells; ++dy)
        for (int dx = 0; dx < HogConfig::kBlockCells; ++dx, k += HogConfig::kBins)
          block.segment(k, HogConfig::kBins) =
              cells.segment(((by + dy) * cells_x + bx + dx) * HogConfig::kBins, HogConfig::kBins);
      // Sequential sum so the result does not depend on SIMD reduction order.
      double energy = 0.0;
      for (Eigen::Index i = 0; i < block_len; ++i) energy += block[i] * block[i];
      block /= std::sqrt(energy + kBlockEps * kBlockEps);
      offset += block_len;
    }
  }
  return out;
}

}  // namespace biorec
