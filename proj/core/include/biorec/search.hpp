#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "biorec/mlp.hpp"
#include "biorec/pipeline.hpp"

namespace biorec {

struct IntRange {
  int min = 1;
  int max = 1;
  int step = 1;

  std::vector<int> values() const;
  friend bool operator==(const IntRange&, const IntRange&) = default;
};

/// Grid over (number of PCs, hidden neurons).
struct SearchSpace {
  IntRange pcs{1, 150, 1};
  IntRange neurons{20, 35, 1};
  bool refine = false;  ///< step-1 pass around the top_k coarse points
  int top_k = 10;

  void validate() const;
  std::size_t grid_size() const { return pcs.values().size() * neurons.values().size(); }
  friend bool operator==(const SearchSpace&, const SearchSpace&) = default;
};

/// `faces`, `objects` or `large`.
SearchSpace search_preset(const std::string& name);

struct SearchEntry {
  int pcs = 0;
  int neurons = 0;
  double val_accuracy = 0;
  Eigen::Index param_count = 0;
  bool refined = false;
};

/// Ranking: higher accuracy, then fewer parameters, then lower (pcs, neurons).
bool ranks_before(const SearchEntry& a, const SearchEntry& b);

struct SearchResult {
  SearchEntry best;
  std::vector<SearchEntry> leaderboard;  ///< sorted by ranks_before
  std::vector<std::string> warnings;     ///< skipped infeasible points

  double best_val_accuracy() const { return best.val_accuracy; }
  std::string to_tsv() const;
};

struct SearchOptions {
  /// Index of the channel within the feature bank; nullopt searches all
  /// channels jointly (same PCs and neurons, scored by sum-rule fusion).
  std::optional<std::size_t> channel = 0;
  /// Per feature-bank channel; missing entries default to true.
  std::vector<bool> standardize;
  Eigen::Index skip_leading = 0;  ///< leading PCA axes dropped, as in fit_pipeline
  TrainOptions training;
  std::uint64_t seed = 0;  ///< one weight-init seed shared by every grid point
  int threads = 1;
};

/// Trains one early-stopped MLP per grid point on `learn` and ranks the
/// points by validation accuracy. PCA is fitted once per channel on
/// `learn`; points asking for more PCs than the learn data's rank are
/// skipped with a warning.
SearchResult grid_search(const FeatureBank& learn, const FeatureBank& val, int num_categories,
                         const SearchSpace& space, const SearchOptions& options);

}  // namespace biorec
