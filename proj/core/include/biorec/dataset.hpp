#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "biorec/image.hpp"

namespace biorec {

struct ImageSize {
  int height = 0;
  int width = 0;
  friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

/// In-memory corpus of equally sized grayscale images with category labels.
///
/// Labels index into `category_names`; intensities lie in [0, 1].
struct ImageSet {
  std::vector<Image> images;
  std::vector<int> labels;
  std::vector<std::string> category_names;
  std::vector<std::string> source_paths;
  int height = 0;
  int width = 0;

  std::size_t size() const { return images.size(); }
  int num_categories() const { return static_cast<int>(category_names.size()); }

  /// Throws DataError when an invariant is violated.
  void validate() const;

  /// Samples at `indices`, in that order; categories are kept as-is.
  ImageSet subset(const std::vector<std::size_t>& indices) const;
};

/// Luma-weighted grayscale of an interleaved raster with samples in [0,1].
/// Channels: 1 (gray), 3 (RGB) or 4 (RGBA, alpha ignored).
Image rgb_to_gray(const std::vector<double>& interleaved, int height, int width, int channels);

/// Bilinear resampling with pixel-center alignment.
Image resize_bilinear(const Image& image, ImageSize size);

/// Decodes a PGM/PNG/JPEG/BMP/TIFF file to a grayscale image in [0,1].
Image read_image(const std::filesystem::path& path);

/// Writes an 8-bit grayscale image (values clamped to [0,1]); format by extension.
void write_image(const std::filesystem::path& path, const Image& image);

/// Loads `root/<category>/<files>`; categories in lexicographic order.
ImageSet load_dataset(const std::filesystem::path& root,
                      std::optional<ImageSize> resize_to = std::nullopt);

}  // namespace biorec
