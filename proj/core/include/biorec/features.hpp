#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "biorec/image.hpp"

namespace biorec {

/// Uniform-pattern LBP over a grid of blocks.
struct LbpConfig {
  int points = 8;   ///< P, sampling points on the circle
  int radius = 1;   ///< R, in pixels
  int grid_y = 6;
  int grid_x = 6;

  void validate() const;
  int bins_per_block() const { return points * (points - 1) + 3; }
  Eigen::Index descriptor_length() const {
    return static_cast<Eigen::Index>(grid_y) * grid_x * bins_per_block();
  }
  friend bool operator==(const LbpConfig&, const LbpConfig&) = default;
};

/// Dense HOG: 2x2-cell blocks, one-cell stride, 9 unsigned orientation bins.
struct HogConfig {
  static constexpr int kBins = 9;
  static constexpr int kBlockCells = 2;

  int cell_y = 8;
  int cell_x = 8;

  void validate() const;
  Eigen::Index descriptor_length(int height, int width) const;
  friend bool operator==(const HogConfig&, const HogConfig&) = default;
};

/// Raw code of the circular neighbourhood at (y, x). Bit p is set when the
/// sample at angle 2*pi*p/P (counterclockwise from +x, bilinear) is >= the
/// centre. Throws InvalidArgument if the circle leaves the image.
std::uint32_t lbp_code(const Image& image, int y, int x, int points, int radius);

/// Number of 0/1 transitions in the circular P-bit pattern.
int lbp_transitions(std::uint32_t code, int points);

/// Maps raw codes to histogram bins: uniform codes in ascending order, then
/// one shared bin for every non-uniform code.
class UniformLbpTable {
 public:
  explicit UniformLbpTable(int points);
  int bin(std::uint32_t code) const { return bins_[code]; }
  int num_bins() const { return num_bins_; }

 private:
  std::vector<int> bins_;
  int num_bins_ = 0;
};

/// Concatenated per-block histograms over the interior (border of width R
/// excluded); trailing interior rows/columns fall into the last block.
Vector lbp_descriptor(const Image& image, const LbpConfig& cfg);

Vector hog_descriptor(const Image& image, const HogConfig& cfg);

enum class Channel { raw, lbp, hog };
inline constexpr Channel kAllChannels[] = {Channel::raw, Channel::lbp, Channel::hog};

std::string to_string(Channel c);
Channel channel_from_string(const std::string& name);

}  // namespace biorec
