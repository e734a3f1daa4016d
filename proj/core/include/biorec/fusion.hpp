#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "biorec/mlp.hpp"

namespace biorec {

enum class FusionMode { sum_rule, fpt, fnpt };

std::string to_string(FusionMode mode);
FusionMode fusion_mode_from_string(const std::string& name);

struct FusedScores {
  Eigen::MatrixXd sum;           ///< C x M elementwise sum of the member matrices
  std::vector<int> predictions;  ///< argmax per column, ties to the lowest index
};

/// Sum-rule decision fusion over K member score matrices of equal shape.
/// The sum is left unnormalized.
FusedScores sum_rule_fuse(std::span<const Eigen::MatrixXd> members);

/// Member MLPs fused at the hidden layer: the inputs of channel k feed only
/// hidden block k, and all hidden units feed one shared output layer.
///
/// Stored as a single MlpModel over the concatenated inputs whose W1 is
/// block-diagonal; `mask` marks the permitted W1 entries and stays fixed.
struct FusedHybridNetwork {
  std::vector<int> input_sizes;
  std::vector<int> hidden_sizes;
  MlpModel net;
  RowMatrix mask;  ///< n_hidden x n_in, 1 inside a block, 0 across blocks
  FusionMode mode = FusionMode::fpt;

  int num_blocks() const { return static_cast<int>(input_sizes.size()); }
  /// Parameters that can be non-zero (masked W1 entries excluded).
  Eigen::Index trainable_parameter_count() const;
};

/// Block-diagonal connectivity mask for the given block sizes.
RowMatrix block_mask(const std::vector<int>& input_sizes, const std::vector<int>& hidden_sizes);

/// FPT copies each member's W1/b1 into its block, concatenates the members'
/// W2 horizontally and sums their b2, so initial logits are the sum of the
/// member logits. FNPT draws each block from init_weights with a seed
/// derived from `seed` and zero output biases.
FusedHybridNetwork build_fhn(std::span<const MlpModel> members, FusionMode mode, std::uint64_t seed = 0);

/// Stacks per-channel inputs (each n_k x M) into the network's input layout.
FeatureMatrix concat_inputs(std::span<const FeatureMatrix> channels);

struct FhnTrainResult {
  FusedHybridNetwork network;
  TrainReport report;
};

/// scg_train on the fused network with cross-block gradients masked out.
FhnTrainResult train_fhn(const FusedHybridNetwork& fhn, const LabeledData& learn, const LabeledData& val,
                         const TrainOptions& options);

}  // namespace biorec
