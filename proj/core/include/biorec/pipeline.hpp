#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "biorec/dataset.hpp"
#include "biorec/features.hpp"
#include "biorec/fusion.hpp"
#include "biorec/mlp.hpp"
#include "biorec/pca.hpp"
#include "biorec/preprocess.hpp"

namespace biorec {

/// Per-image transforms; nothing here is fitted to data.
struct FeatureSettings {
  NormalizationMode normalization;
  LbpConfig lbp;
  HogConfig hog;
  std::vector<Channel> channels{Channel::raw, Channel::lbp, Channel::hog};
};

/// Descriptor of one already-normalized image for one channel.
Vector channel_descriptor(const Image& normalized, Channel channel, const FeatureSettings& settings);

/// Feature matrices (d_k x n) of every enabled channel for a set of images.
struct FeatureBank {
  std::vector<FeatureMatrix> channels;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  FeatureBank select(const std::vector<std::size_t>& indices) const;
  LabeledData channel_data(std::size_t k) const { return {channels.at(k), labels}; }
};

FeatureBank extract_features(std::span<const Image> images, const std::vector<int>& labels,
                             const FeatureSettings& settings);

struct ChannelArchitecture {
  int pcs = 40;
  int neurons = 20;
  bool standardize = true;
};

struct ChannelModel {
  Channel channel = Channel::raw;
  PcaModel pca;
  MlpModel mlp;
  TrainReport report;
};

/// Everything needed to classify new images.
struct TrainedPipeline {
  std::optional<ImageSize> resize_to;
  ImageSize image_size;
  FeatureSettings features;
  std::vector<ChannelModel> channels;
  FusionMode fusion = FusionMode::sum_rule;
  std::optional<FusedHybridNetwork> fhn;
  TrainReport fhn_report;
  std::vector<std::string> category_names;

  int num_categories() const { return static_cast<int>(category_names.size()); }
};

struct FitOptions {
  std::vector<ChannelArchitecture> architectures;  ///< one per enabled channel
  FusionMode fusion = FusionMode::sum_rule;
  TrainOptions training;
  Eigen::Index skip_leading = 0;
  std::uint64_t seed = 0;
};

/// PCA and MLP per channel fitted on `learn`, early-stopped on `val`, then
/// fused per `options.fusion`. Only `learn` and `val` are read.
TrainedPipeline fit_pipeline(const FeatureBank& learn, const FeatureBank& val,
                             const std::vector<std::string>& category_names, const FeatureSettings& settings,
                             const FitOptions& options);

struct PipelineScores {
  std::vector<Eigen::MatrixXd> members;  ///< per-channel probabilities, C x M
  Eigen::MatrixXd fused;                 ///< sum-rule sum, or fused-network probabilities
  std::vector<int> predictions;
  FusionMode fusion = FusionMode::sum_rule;

  /// Fused scores scaled to [0,1] (sum-rule sums divided by K).
  Eigen::MatrixXd normalized_fused() const;
};

PipelineScores score(const TrainedPipeline& pipeline, const FeatureBank& data);

/// Resizes (when the pipeline was trained on resized data), normalizes and
/// extracts features before scoring.
PipelineScores score_images(const TrainedPipeline& pipeline, std::span<const Image> images);

}  // namespace biorec
