#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "biorec/dataset.hpp"
#include "biorec/features.hpp"
#include "biorec/fusion.hpp"
#include "biorec/mlp.hpp"
#include "biorec/pipeline.hpp"
#include "biorec/preprocess.hpp"
#include "biorec/search.hpp"
#include "biorec/split.hpp"

namespace biorec {

struct ChannelSettings {
  bool enabled = true;
  int pcs = 40;
  int neurons = 20;
  bool standardize = true;  ///< per-dimension z-scoring before PCA
};

struct SearchSettings {
  bool enabled = false;
  SearchSpace space = search_preset("faces");
  bool joint = false;  ///< one (pcs, neurons) shared by all channels, scored by fusion
};

/// Every knob of an end-to-end run. All fields have defaults; a YAML file
/// only needs to override what differs.
struct ExperimentConfig {
  std::string dataset_root;
  std::optional<ImageSize> resize = ImageSize{96, 96};
  NormalizationMode normalization{Normalization::standard, 7};
  SplitScheme split = PerCategoryScheme{5, 0.1};
  int n_splits = 10;
  std::uint64_t seed = 42;
  LbpConfig lbp;
  HogConfig hog;
  std::array<ChannelSettings, 3> channels;  ///< indexed raw, lbp, hog
  int skip_leading = 0;
  SearchSettings search;
  FusionMode fusion = FusionMode::sum_rule;
  TrainOptions training;
  std::string output_dir = "runs/default";
  int threads = 1;

  ChannelSettings& channel(Channel c) { return channels[static_cast<std::size_t>(c)]; }
  const ChannelSettings& channel(Channel c) const { return channels[static_cast<std::size_t>(c)]; }

  std::vector<Channel> enabled_channels() const;
  FeatureSettings feature_settings() const;

  /// Throws ConfigError.
  void validate() const;
};

/// Throws ConfigError on syntax errors, unknown keys and invalid values.
ExperimentConfig parse_config(const std::string& yaml_text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string to_yaml(const ExperimentConfig& config);

/// `faces`: 96x96, LBP P=8 R=1 on 6x6 blocks, 8x8 HOG cells, faces search grid.
/// `objects`: 192x192, LBP P=14 R=1 on 10x10 blocks, 16x16 HOG cells, objects grid.
void apply_preset(ExperimentConfig& config, const std::string& preset);

}  // namespace biorec
