#pragma once

#include <string>

#include "biorec/image.hpp"

namespace biorec {

enum class Normalization { none, standard, luminous };

struct NormalizationMode {
  Normalization variant = Normalization::none;
  int ln_window = 7;  ///< odd, >= 3; used by `luminous` only

  void validate() const;
  friend bool operator==(const NormalizationMode&, const NormalizationMode&) = default;
};

std::string to_string(Normalization n);
Normalization normalization_from_string(const std::string& name);

/// Zero mean, unit population standard deviation over all pixels.
/// Images with standard deviation below 1e-12 map to all zeros.
Image per_image_standardize(const Image& image);

/// Local contrast normalization: each pixel becomes
/// (p - local_mean) / (local_std + 1e-12) over a window x window
/// neighbourhood (reflect-101 padding), then the result is rescaled
/// affinely to [0,1]. Flat results map to all zeros.
Image luminous_normalize(const Image& image, int window);

Image normalize(const Image& image, const NormalizationMode& mode);

/// Column-major flattening, length H*W.
Vector vectorize(const Image& image);
Image unvectorize(const Vector& v, Eigen::Index height, Eigen::Index width);

}  // namespace biorec
