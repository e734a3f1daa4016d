#include "biorec/fusion.hpp"

#include <numeric>

#include <fmt/format.h>

#include "biorec/error.hpp"
#include "biorec/random.hpp"

namespace biorec {

std::string to_string(FusionMode mode) {
  switch (mode) {
    case FusionMode::sum_rule: return "sum_rule";
    case FusionMode::fpt: return "fpt";
    case FusionMode::fnpt: return "fnpt";
  }
  return "sum_rule";
}

FusionMode fusion_mode_from_string(const std::string& name) {
  if (name == "sum_rule" || name == "sum") return FusionMode::sum_rule;
  if (name == "fpt") return FusionMode::fpt;
  if (name == "fnpt") return FusionMode::fnpt;
  throw ConfigError(fmt::format("unknown fusion mode '{}'", name));
}

FusedScores sum_rule_fuse(std::span<const Eigen::MatrixXd> members) {
  if (members.empty()) throw InvalidArgument("sum rule needs at least one member");
  FusedScores out;
  out.sum = members.front();
  for (std::size_t k = 1; k < members.size(); ++k) {
    if (members[k].rows() != out.sum.rows() || members[k].cols() != out.sum.cols())
      throw InvalidArgument(fmt::format("member {} is {}x{}, expected {}x{}", k, members[k].rows(),
                                        members[k].cols(), out.sum.rows(), out.sum.cols()));
    out.sum += members[k];
  }
  out.predictions = argmax_columns(out.sum);
  return out;
}

Eigen::Index FusedHybridNetwork::trainable_parameter_count() const {
  return net.parameter_count() - net.w1.size() + static_cast<Eigen::Index>(mask.sum());
}

RowMatrix block_mask(const std::vector<int>& input_sizes, const std::vector<int>& hidden_sizes) {
  if (input_sizes.size() != hidden_sizes.size()) throw InvalidArgument("block size lists differ in length");
  const int n_in = std::accumulate(input_sizes.begin(), input_sizes.end(), 0);
  const int n_hidden = std::accumulate(hidden_sizes.begin(), hidden_sizes.end(), 0);
  RowMatrix mask = RowMatrix::Zero(n_hidden, n_in);
  int row = 0;
  int col = 0;
  for (std::size_t k = 0; k < input_sizes.size(); ++k) {
    mask.block(row, col, hidden_sizes[k], input_sizes[k]).setOnes();
    row += hidden_sizes[k];
    col += input_sizes[k];
  }
  return mask;
}

FusedHybridNetwork build_fhn(std::span<const MlpModel> members, FusionMode mode, std::uint64_t seed) {
  if (members.empty()) throw InvalidArgument("fused network needs at least one member");
  if (mode == FusionMode::sum_rule) throw InvalidArgument("sum_rule is not a fused-network mode");
  const int n_out = members.front().n_out;

  FusedHybridNetwork fhn;
  fhn.mode = mode;
  for (const auto& m : members) {
    if (m.n_out != n_out) throw InvalidArgument("members disagree on the category count");
    fhn.input_sizes.push_back(m.n_in);
    fhn.hidden_sizes.push_back(m.n_hidden);
  }
  fhn.mask = block_mask(fhn.input_sizes, fhn.hidden_sizes);

  MlpModel& net = fhn.net;
  net.n_in = static_cast<int>(fhn.mask.cols());
  net.n_hidden = static_cast<int>(fhn.mask.rows());
  net.n_out = n_out;
  net.seed = seed;
  net.w1 = RowMatrix::Zero(net.n_hidden, net.n_in);
  net.b1 = Vector::Zero(net.n_hidden);
  net.w2 = RowMatrix::Zero(n_out, net.n_hidden);
  net.b2 = Vector::Zero(n_out);

  int row = 0;
  int col = 0;
  for (std::size_t k = 0; k < members.size(); ++k) {
    const MlpModel block = mode == FusionMode::fpt
                               ? members[k]
                               : init_weights(members[k].n_in, members[k].n_hidden, n_out,
                                              derive_seed(seed, "fnpt-block", k));
    net.w1.block(row, col, block.n_hidden, block.n_in) = block.w1;
    net.b1.segment(row, block.n_hidden) = block.b1;
    net.w2.middleCols(row, block.n_hidden) = block.w2;
    net.b2 += block.b2;
    row += block.n_hidden;
    col += block.n_in;
  }
  return fhn;
}

FeatureMatrix concat_inputs(std::span<const FeatureMatrix> channels) {
  if (channels.empty()) throw InvalidArgument("no channels to concatenate");
  Eigen::Index rows = 0;
  for (const auto& c : channels) {
    if (c.cols() != channels.front().cols()) throw InvalidArgument("channels disagree on sample count");
    rows += c.rows();
  }
  FeatureMatrix out(rows, channels.front().cols());
  Eigen::Index r = 0;
  for (const auto& c : channels) {
    out.middleRows(r, c.rows()) = c;
    r += c.rows();
  }
  return out;
}

FhnTrainResult train_fhn(const FusedHybridNetwork& fhn, const LabeledData& learn, const LabeledData& val,
                         const TrainOptions& options) {
  auto trained = scg_train(fhn.net, learn, val, options, &fhn.mask);
  FhnTrainResult out{fhn, std::move(trained.report)};
  out.network.net = std::move(trained.model);
  return out;
}

}  // namespace biorec
