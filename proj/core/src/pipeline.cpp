#include "biorec/pipeline.hpp"

#include <fmt/format.h>

#include "biorec/error.hpp"
#include "biorec/random.hpp"

namespace biorec {

Vector channel_descriptor(const Image& normalized, Channel channel, const FeatureSettings& settings) {
  switch (channel) {
    case Channel::raw: return vectorize(normalized);
    case Channel::lbp: return lbp_descriptor(normalized, settings.lbp);
    case Channel::hog: return hog_descriptor(normalized, settings.hog);
  }
  return {};
}

FeatureBank FeatureBank::select(const std::vector<std::size_t>& indices) const {
  FeatureBank out;
  for (const auto& c : channels) {
    FeatureMatrix m(c.rows(), static_cast<Eigen::Index>(indices.size()));
    for (std::size_t j = 0; j < indices.size(); ++j) m.col(static_cast<Eigen::Index>(j)) = c.col(static_cast<Eigen::Index>(indices[j]));
    out.channels.push_back(std::move(m));
  }
  for (auto i : indices) out.labels.push_back(labels.at(i));
  return out;
}

FeatureBank extract_features(std::span<const Image> images, const std::vector<int>& labels,
                             const FeatureSettings& settings) {
  if (labels.size() != images.size()) throw InvalidArgument("label count differs from image count");
  if (settings.channels.empty()) throw ConfigError("no feature channels enabled");
  settings.normalization.validate();
  FeatureBank bank;
  bank.labels = labels;
  bank.channels.resize(settings.channels.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    const Image normalized = normalize(images[i], settings.normalization);
    for (std::size_t k = 0; k < settings.channels.size(); ++k) {
      const Vector d = channel_descriptor(normalized, settings.channels[k], settings);
      auto& m = bank.channels[k];
      if (i == 0) m.resize(d.size(), static_cast<Eigen::Index>(images.size()));
      if (d.size() != m.rows()) throw DataError("images produce descriptors of different lengths");
      m.col(static_cast<Eigen::Index>(i)) = d;
    }
  }
  return bank;
}

TrainedPipeline fit_pipeline(const FeatureBank& learn, const FeatureBank& val,
                             const std::vector<std::string>& category_names, const FeatureSettings& settings,
                             const FitOptions& options) {
  const auto k_channels = settings.channels.size();
  if (options.architectures.size() != k_channels)
    throw ConfigError(fmt::format("{} architectures for {} channels", options.architectures.size(), k_channels));
  if (learn.channels.size() != k_channels || val.channels.size() != k_channels)
    throw InvalidArgument("feature bank does not match the channel list");
  const int n_out = static_cast<int>(category_names.size());

  TrainedPipeline out;
  out.features = settings;
  out.fusion = options.fusion;
  out.category_names = category_names;

  std::vector<FeatureMatrix> learn_proj;
  std::vector<FeatureMatrix> val_proj;
  for (std::size_t k = 0; k < k_channels; ++k) {
    const auto& arch = options.architectures[k];
    ChannelModel cm;
    cm.channel = settings.channels[k];
    cm.pca = fit_pca(learn.channels[k], arch.pcs, arch.standardize, PcaRoute::automatic, options.skip_leading);
    if (cm.pca.num_components() < 1)
      throw DataError(fmt::format("{} channel has no variance in the learn set", to_string(cm.channel)));
    LabeledData l{project(cm.pca, learn.channels[k]), learn.labels};
    LabeledData v{project(cm.pca, val.channels[k]), val.labels};
    const auto init = init_weights(static_cast<int>(cm.pca.num_components()), arch.neurons, n_out,
                                   derive_seed(options.seed, "init-" + to_string(cm.channel)));
    auto trained = scg_train(init, l, v, options.training);
    cm.mlp = std::move(trained.model);
    cm.report = std::move(trained.report);
    learn_proj.push_back(std::move(l.x));
    val_proj.push_back(std::move(v.x));
    out.channels.push_back(std::move(cm));
  }

  if (options.fusion != FusionMode::sum_rule) {
    std::vector<MlpModel> members;
    for (const auto& cm : out.channels) members.push_back(cm.mlp);
    const auto fhn = build_fhn(members, options.fusion, derive_seed(options.seed, "fnpt"));
    auto trained = train_fhn(fhn, {concat_inputs(learn_proj), learn.labels}, {concat_inputs(val_proj), val.labels},
                             options.training);
    out.fhn = std::move(trained.network);
    out.fhn_report = std::move(trained.report);
  }
  return out;
}

Eigen::MatrixXd PipelineScores::normalized_fused() const {
  if (fusion == FusionMode::sum_rule && !members.empty()) return fused / static_cast<double>(members.size());
  return fused;
}

PipelineScores score(const TrainedPipeline& pipeline, const FeatureBank& data) {
  if (data.channels.size() != pipeline.channels.size())
    throw InvalidArgument("feature bank does not match the pipeline channels");
  PipelineScores out;
  out.fusion = pipeline.fusion;
  std::vector<FeatureMatrix> projected;
  for (std::size_t k = 0; k < pipeline.channels.size(); ++k) {
    const auto& cm = pipeline.channels[k];
    projected.push_back(project(cm.pca, data.channels[k]));
    out.members.push_back(forward(cm.mlp, projected.back()));
  }
  if (pipeline.fusion == FusionMode::sum_rule) {
    auto fused = sum_rule_fuse(out.members);
    out.fused = std::move(fused.sum);
    out.predictions = std::move(fused.predictions);
  } else {
    if (!pipeline.fhn) throw InvalidArgument("pipeline has no fused network");
    out.fused = forward(pipeline.fhn->net, concat_inputs(projected));
    out.predictions = argmax_columns(out.fused);
  }
  return out;
}

PipelineScores score_images(const TrainedPipeline& pipeline, std::span<const Image> images) {
  std::vector<Image> prepared;
  prepared.reserve(images.size());
  for (const auto& img : images) {
    Image x = pipeline.resize_to ? resize_bilinear(img, *pipeline.resize_to) : img;
    if (x.rows() != pipeline.image_size.height || x.cols() != pipeline.image_size.width)
      throw DataError(fmt::format("image is {}x{}, pipeline expects {}x{}", x.rows(), x.cols(),
                                  pipeline.image_size.height, pipeline.image_size.width));
    prepared.push_back(std::move(x));
  }
  const std::vector<int> labels(images.size(), 0);
  return score(pipeline, extract_features(prepared, labels, pipeline.features));
}

}  // namespace biorec
