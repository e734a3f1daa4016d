#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "biorec/config.hpp"
#include "biorec/dataset.hpp"
#include "biorec/image.hpp"
#include "biorec/pipeline.hpp"
#include "biorec/split.hpp"

namespace biorec::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "biorec");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

Image random_image(int height, int width, std::uint64_t seed);
Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed, double lo = -1,
                              double hi = 1);

/// Category-specific pattern (oriented stripes with a per-category phase and
/// frequency) plus mild noise; categories are easy to tell apart.
Image toy_image(int category, int instance, int height, int width, std::uint64_t seed);

/// `categories` x `per_category` toy images in memory.
ImageSet toy_image_set(int categories, int per_category, int height, int width, std::uint64_t seed);

/// Writes a toy corpus as `root/cat_XX/img_YY.png`.
void write_toy_dataset(const std::filesystem::path& root, int categories, int per_category, int height,
                       int width, std::uint64_t seed);

/// Gaussian clusters: `channels` feature matrices (dims[k] x n) whose
/// class means are separated by `separation` standard deviations.
FeatureBank cluster_bank(int categories, int per_category, const std::vector<int>& dims, double separation,
                         std::uint64_t seed);

/// Small, fast end-to-end config on 24x24 toy images.
ExperimentConfig toy_config(const std::filesystem::path& dataset_root, const std::filesystem::path& out_dir);

/// Fits the toy config's pipeline on the learn/val part of `plan`.
TrainedPipeline toy_pipeline(const ImageSet& data, const SplitPlan& plan, FusionMode fusion, std::uint64_t seed);

std::string read_file(const std::filesystem::path& path);

}  // namespace biorec::testing
