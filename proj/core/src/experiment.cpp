#include "biorec/experiment.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "biorec/error.hpp"
#include "biorec/random.hpp"

namespace biorec {

namespace fs = std::filesystem;

namespace {

template <typename F>
auto stage(std::string_view name, int split, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    const auto where = split < 0 ? fmt::format("stage '{}'", name) : fmt::format("stage '{}' (split {})", name, split);
    throw_error(e.kind(), fmt::format("{}: {}", where, e.what()));
  }
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot write {}", path.string()));
  out << text;
}

void notify(const ProgressFn& progress, const std::string& msg) {
  if (progress) progress(msg);
}

std::string predictions_tsv(const ImageSet& data, const std::vector<std::size_t>& idx, const PipelineScores& scores) {
  std::string out = "index\tpath\ttruth\tpredicted";
  for (const auto& name : data.category_names) out += "\tscore_" + name;
  out += '\n';
  for (std::size_t j = 0; j < idx.size(); ++j) {
    const auto i = idx[j];
    out += fmt::format("{}\t{}\t{}\t{}", i, data.source_paths.empty() ? "" : data.source_paths[i], data.labels[i],
                       scores.predictions[j]);
    for (Eigen::Index c = 0; c < scores.fused.rows(); ++c)
      out += fmt::format("\t{:.17g}", scores.fused(c, static_cast<Eigen::Index>(j)));
    out += '\n';
  }
  return out;
}

std::vector<double> split_columns(const std::string& line) {
  std::vector<double> out;
  std::istringstream in(line);
  std::string cell;
  while (std::getline(in, cell, '\t')) out.push_back(std::stod(cell));
  return out;
}

}  // namespace

std::uint64_t split_seed(std::uint64_t root, int index) {
  return derive_seed(root, "split", static_cast<std::uint64_t>(index));
}
std::uint64_t fit_seed(std::uint64_t root, int index) {
  return derive_seed(root, "fit", static_cast<std::uint64_t>(index));
}
std::uint64_t search_seed(std::uint64_t root, int index) {
  return derive_seed(root, "search", static_cast<std::uint64_t>(index));
}

std::vector<ChannelArchitecture> choose_architectures(const ExperimentConfig& config, const FeatureBank& learn,
                                                      const FeatureBank& val, int num_categories,
                                                      std::uint64_t seed,
                                                      std::vector<SearchResult>* leaderboards) {
  const auto channels = config.enabled_channels();
  std::vector<ChannelArchitecture> archs;
  for (Channel c : channels) {
    const auto& s = config.channel(c);
    archs.push_back({s.pcs, s.neurons, s.standardize});
  }
  if (!config.search.enabled) return archs;

  SearchOptions opts;
  opts.training = config.training;
  opts.threads = config.threads;
  opts.skip_leading = config.skip_leading;
  opts.seed = seed;
  for (Channel c : channels) opts.standardize.push_back(config.channel(c).standardize);

  if (config.search.joint) {
    opts.channel.reset();
    auto result = grid_search(learn, val, num_categories, config.search.space, opts);
    for (auto& a : archs) {
      a.pcs = result.best.pcs;
      a.neurons = result.best.neurons;
    }
    if (leaderboards) leaderboards->push_back(std::move(result));
    return archs;
  }
  for (std::size_t k = 0; k < channels.size(); ++k) {
    opts.channel = k;
    opts.seed = derive_seed(seed, to_string(channels[k]));
    auto result = grid_search(learn, val, num_categories, config.search.space, opts);
    archs[k].pcs = result.best.pcs;
    archs[k].neurons = result.best.neurons;
    if (leaderboards) leaderboards->push_back(std::move(result));
  }
  return archs;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const ImageSet& data, const fs::path& out_dir,
                                const ProgressFn& progress) {
  config.validate();
  stage("dataset", -1, [&] {
    data.validate();
    return 0;
  });
  if (data.num_categories() < 2) throw DataError("stage 'dataset': need at least two categories");
  const auto settings = config.feature_settings();
  const auto channels = settings.channels;
  const int n_cat = data.num_categories();

  notify(progress, fmt::format("extracting features for {} images", data.size()));
  const FeatureBank bank = stage("features", -1, [&] { return extract_features(data.images, data.labels, settings); });

  const bool write = !out_dir.empty();
  if (write) {
    fs::create_directories(out_dir);
    write_file(out_dir / "config.yaml", to_yaml(config));
  }

  ExperimentResult result;
  std::vector<Metrics> all_metrics;
  for (int i = 0; i < config.n_splits; ++i) {
    SplitOutcome outcome;
    outcome.plan = stage("split", i, [&] { return make_split(data, config.split, split_seed(config.seed, i)); });
    const auto learn = bank.select(outcome.plan.learn_idx);
    const auto val = bank.select(outcome.plan.val_idx);
    const auto test = bank.select(outcome.plan.test_idx);

    std::vector<SearchResult> boards;
    outcome.architectures = stage("search", i, [&] {
      return choose_architectures(config, learn, val, n_cat, search_seed(config.seed, i), &boards);
    });

    FitOptions fit;
    fit.architectures = outcome.architectures;
    fit.fusion = config.fusion;
    fit.training = config.training;
    fit.skip_leading = config.skip_leading;
    fit.seed = fit_seed(config.seed, i);
    TrainedPipeline pipeline =
        stage("train", i, [&] { return fit_pipeline(learn, val, data.category_names, settings, fit); });
    pipeline.resize_to = config.resize;
    pipeline.image_size = {data.height, data.width};

    const auto scores = stage("evaluate", i, [&] { return score(pipeline, test); });
    outcome.metrics = compute_metrics(scores.predictions, test.labels, n_cat);
    for (const auto& member : scores.members)
      outcome.channel_accuracy.push_back(compute_metrics(argmax_columns(member), test.labels, n_cat).accuracy);
    outcome.roc = roc_one_vs_rest(scores.normalized_fused(), test.labels);
    notify(progress, fmt::format("split {}: test accuracy {:.4f}", i, outcome.metrics.accuracy));

    if (write) {
      const auto dir = out_dir / fmt::format("split_{:02}", i);
      fs::create_directories(dir);
      write_file(dir / "split.txt", split_to_text(outcome.plan));
      write_file(dir / "predictions.tsv", predictions_tsv(data, outcome.plan.test_idx, scores));
      write_file(dir / "roc.tsv", roc_tsv(outcome.roc));
      for (const auto& cm : pipeline.channels)
        write_file(dir / fmt::format("train_{}.tsv", to_string(cm.channel)), cm.report.to_text());
      if (pipeline.fhn) write_file(dir / "train_fhn.tsv", pipeline.fhn_report.to_text());
      for (std::size_t k = 0; k < boards.size(); ++k) {
        const auto name = config.search.joint ? std::string("joint") : to_string(channels[k]);
        write_file(dir / fmt::format("leaderboard_{}.tsv", name), boards[k].to_tsv());
      }
      save_bundle({ModelBundle::kFormatVersion, to_yaml(config), pipeline}, dir / "bundle.bin");
    }
    all_metrics.push_back(outcome.metrics);
    result.splits.push_back(std::move(outcome));
  }

  result.summary = aggregate_splits(all_metrics);
  if (write) {
    write_file(out_dir / "metrics.tsv", metrics_tsv(result, channels));
    write_file(out_dir / "summary.tsv", summary_tsv(result.summary));
  }
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const ProgressFn& progress) {
  if (config.dataset_root.empty()) throw ConfigError("dataset.root is not set");
  notify(progress, fmt::format("loading {}", config.dataset_root));
  const auto data = stage("load", -1, [&] { return load_dataset(config.dataset_root, config.resize); });
  return run_experiment(config, data, config.output_dir, progress);
}

std::vector<std::vector<SearchResult>> run_search(const ExperimentConfig& config, const ImageSet& data,
                                                  const fs::path& out_dir, const ProgressFn& progress) {
  ExperimentConfig cfg = config;
  cfg.search.enabled = true;
  cfg.validate();
  data.validate();
  const auto settings = cfg.feature_settings();
  const FeatureBank bank = stage("features", -1, [&] { return extract_features(data.images, data.labels, settings); });
  if (!out_dir.empty()) fs::create_directories(out_dir);

  std::vector<std::vector<SearchResult>> all;
  for (int i = 0; i < cfg.n_splits; ++i) {
    const auto plan = stage("split", i, [&] { return make_split(data, cfg.split, split_seed(cfg.seed, i)); });
    std::vector<SearchResult> boards;
    stage("search", i, [&] {
      return choose_architectures(cfg, bank.select(plan.learn_idx), bank.select(plan.val_idx),
                                  data.num_categories(), search_seed(cfg.seed, i), &boards);
    });
    for (std::size_t k = 0; k < boards.size(); ++k) {
      const auto name = cfg.search.joint ? std::string("joint") : to_string(settings.channels[k]);
      notify(progress, fmt::format("split {} {}: best pcs={} neurons={} val_accuracy={:.4f}", i, name,
                                   boards[k].best.pcs, boards[k].best.neurons, boards[k].best.val_accuracy));
      if (!out_dir.empty())
        write_file(out_dir / fmt::format("leaderboard_split{:02}_{}.tsv", i, name), boards[k].to_tsv());
    }
    all.push_back(std::move(boards));
  }
  return all;
}

std::vector<Prediction> predict(const ModelBundle& bundle, const std::vector<fs::path>& images) {
  std::vector<Image> decoded;
  for (const auto& p : images) decoded.push_back(read_image(p));
  const auto scores = score_images(bundle.pipeline, decoded);
  std::vector<Prediction> out;
  for (std::size_t j = 0; j < images.size(); ++j) {
    const int label = scores.predictions[j];
    out.push_back({images[j].string(), label, bundle.pipeline.category_names.at(static_cast<std::size_t>(label)),
                   scores.fused.col(static_cast<Eigen::Index>(j))});
  }
  return out;
}

std::string metrics_tsv(const ExperimentResult& result, const std::vector<Channel>& channels) {
  std::string out = "split\tseed\taccuracy\tmacro_precision\tmacro_recall\tmacro_f1\tmacro_auc";
  for (Channel c : channels) out += fmt::format("\taccuracy_{0}\tpcs_{0}\tneurons_{0}", to_string(c));
  out += '\n';
  for (std::size_t i = 0; i < result.splits.size(); ++i) {
    const auto& s = result.splits[i];
    out += fmt::format("{}\t{}\t{:.17g}\t{:.17g}\t{:.17g}\t{:.17g}\t{:.17g}", i, s.plan.seed, s.metrics.accuracy,
                       s.metrics.macro_precision, s.metrics.macro_recall, s.metrics.macro_f1, s.roc.macro_auc);
    for (std::size_t k = 0; k < channels.size(); ++k)
      out += fmt::format("\t{:.17g}\t{}\t{}", s.channel_accuracy[k], s.architectures[k].pcs,
                         s.architectures[k].neurons);
    out += '\n';
  }
  return out;
}

std::string summary_tsv(const MetricSummary& s) {
  return fmt::format(
      "metric\tmean\tstd\nsplits\t{}\t0\naccuracy\t{:.17g}\t{:.17g}\naccuracy_best\t{:.17g}\t0\n"
      "macro_precision\t{:.17g}\t{:.17g}\nmacro_recall\t{:.17g}\t{:.17g}\nmacro_f1\t{:.17g}\t{:.17g}\n",
      s.splits, s.accuracy_mean, s.accuracy_std, s.accuracy_best, s.precision_mean, s.precision_std, s.recall_mean,
      s.recall_std, s.f1_mean, s.f1_std);
}

std::string roc_tsv(const RocCurve& roc) {
  std::string out = "category\tfpr\ttpr\n";
  for (std::size_t c = 0; c < roc.fpr.size(); ++c)
    for (std::size_t k = 0; k < roc.fpr[c].size(); ++k)
      out += fmt::format("{}\t{:.17g}\t{:.17g}\n", c, roc.fpr[c][k], roc.tpr[c][k]);
  out += "# auc";
  for (double a : roc.auc) out += fmt::format("\t{:.17g}", a);
  out += fmt::format("\n# macro_auc\t{:.17g}\n", roc.macro_auc);
  return out;
}

std::string report(const fs::path& run_dir) {
  std::ifstream in(run_dir / "metrics.tsv");
  if (!in) throw DataError(fmt::format("no metrics.tsv in {}", run_dir.string()));
  std::string header;
  std::getline(in, header);
  std::vector<std::string> names;
  {
    std::istringstream hs(header);
    std::string cell;
    while (std::getline(hs, cell, '\t')) names.push_back(cell);
  }
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) rows.push_back(split_columns(line));
  if (rows.empty()) throw DataError("metrics.tsv has no splits");

  std::string out = fmt::format("{} split(s) in {}\n", rows.size(), run_dir.string());
  for (std::size_t col = 2; col < names.size(); ++col) {
    if (names[col].rfind("pcs_", 0) == 0 || names[col].rfind("neurons_", 0) == 0) continue;
    double sum = 0;
    double best = rows.front().at(col);
    for (const auto& r : rows) {
      sum += r.at(col);
      best = std::max(best, r.at(col));
    }
    const double mean = sum / static_cast<double>(rows.size());
    double ss = 0;
    for (const auto& r : rows) ss += (r.at(col) - mean) * (r.at(col) - mean);
    out += fmt::format("{:<18} {:6.2f} ± {:5.2f}  (best {:6.2f})\n", names[col], 100 * mean,
                       100 * std::sqrt(ss / static_cast<double>(rows.size())), 100 * best);
  }
  return out;
}

}  // namespace biorec
