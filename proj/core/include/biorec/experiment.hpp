#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "biorec/bundle.hpp"
#include "biorec/config.hpp"
#include "biorec/metrics.hpp"
#include "biorec/split.hpp"

namespace biorec {

struct SplitOutcome {
  SplitPlan plan;
  std::vector<ChannelArchitecture> architectures;
  Metrics metrics;
  std::vector<double> channel_accuracy;  ///< per enabled channel, test set
  RocCurve roc;
};

struct ExperimentResult {
  std::vector<SplitOutcome> splits;
  MetricSummary summary;
};

using ProgressFn = std::function<void(const std::string&)>;

/// Seeds of the named sub-streams for split `index`.
std::uint64_t split_seed(std::uint64_t root, int index);
std::uint64_t fit_seed(std::uint64_t root, int index);
std::uint64_t search_seed(std::uint64_t root, int index);

/// Architectures for one split: searched on learn/val when enabled, else
/// taken from the channel settings. Leaderboards go to `leaderboards`.
std::vector<ChannelArchitecture> choose_architectures(const ExperimentConfig& config, const FeatureBank& learn,
                                                      const FeatureBank& val, int num_categories,
                                                      std::uint64_t seed,
                                                      std::vector<SearchResult>* leaderboards = nullptr);

/// Runs every split on an already loaded dataset. When `out_dir` is
/// non-empty, writes per-split records, bundles, metrics.tsv and
/// summary.tsv there.
ExperimentResult run_experiment(const ExperimentConfig& config, const ImageSet& data,
                                const std::filesystem::path& out_dir, const ProgressFn& progress = {});

/// Loads the dataset named in the config, then runs it.
ExperimentResult run_experiment(const ExperimentConfig& config, const ProgressFn& progress = {});

/// Grid search per split; writes leaderboards to the output directory.
std::vector<std::vector<SearchResult>> run_search(const ExperimentConfig& config, const ImageSet& data,
                                                  const std::filesystem::path& out_dir,
                                                  const ProgressFn& progress = {});

struct Prediction {
  std::string path;
  int label = 0;
  std::string category;
  Vector scores;  ///< fused score per category
};

std::vector<Prediction> predict(const ModelBundle& bundle, const std::vector<std::filesystem::path>& images);

/// Human-readable summary of a run directory's metrics.tsv.
std::string report(const std::filesystem::path& run_dir);

std::string metrics_tsv(const ExperimentResult& result, const std::vector<Channel>& channels);
std::string summary_tsv(const MetricSummary& summary);
std::string roc_tsv(const RocCurve& roc);

}  // namespace biorec
