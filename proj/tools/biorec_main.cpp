// biorec: run, search, predict and report for the three-channel recognizer.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "biorec/bundle.hpp"
#include "biorec/config.hpp"
#include "biorec/error.hpp"
#include "biorec/experiment.hpp"

namespace {

enum ExitCode { kOk = 0, kConfig = 1, kData = 2, kDivergence = 3 };

int exit_code(biorec::ErrorKind kind) {
  switch (kind) {
    case biorec::ErrorKind::config:
    case biorec::ErrorKind::invalid_argument: return kConfig;
    case biorec::ErrorKind::data:
    case biorec::ErrorKind::format: return kData;
    case biorec::ErrorKind::training_divergence: return kDivergence;
  }
  return kData;
}

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> splits;
  std::optional<std::string> fusion;
  std::optional<std::string> out;
  std::optional<std::string> preset;
  std::optional<int> threads;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Root seed for every random stream");
    cmd->add_option("--splits", splits, "Number of random splits");
    cmd->add_option("--fusion", fusion, "Fusion mode")->check(CLI::IsMember({"sum_rule", "fpt", "fnpt"}));
    cmd->add_option("--out", out, "Output directory");
    cmd->add_option("--preset", preset, "Feature and search preset")->check(CLI::IsMember({"faces", "objects"}));
    cmd->add_option("--threads", threads, "Worker threads for grid search");
  }

  biorec::ExperimentConfig apply(biorec::ExperimentConfig cfg) const {
    if (preset) biorec::apply_preset(cfg, *preset);
    if (seed) cfg.seed = *seed;
    if (splits) cfg.n_splits = *splits;
    if (fusion) cfg.fusion = biorec::fusion_mode_from_string(*fusion);
    if (out) cfg.output_dir = *out;
    if (threads) cfg.threads = *threads;
    cfg.validate();
    return cfg;
  }
};

void log_line(const std::string& msg) { std::cerr << msg << '\n'; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"biorec - three-channel (pixels, LBP, HOG) PCA+MLP recognizer with decision fusion"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides overrides;

  auto* run = app.add_subcommand("run", "Train and evaluate over random splits");
  run->add_option("config", config_path, "Experiment config (YAML)")->required();
  overrides.add_to(run);

  auto* search = app.add_subcommand("search", "Grid-search (PCs, neurons) per split");
  search->add_option("config", config_path, "Experiment config (YAML)")->required();
  overrides.add_to(search);

  std::string bundle_path;
  std::vector<std::string> images;
  auto* predict = app.add_subcommand("predict", "Classify images with a saved bundle");
  predict->add_option("bundle", bundle_path, "Model bundle")->required();
  predict->add_option("images", images, "Image files")->required();

  std::string run_dir;
  auto* report = app.add_subcommand("report", "Summarize a run directory");
  report->add_option("run-dir", run_dir, "Directory written by 'run'")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfig;
  }

  try {
    if (*run) {
      const auto cfg = overrides.apply(biorec::load_config(config_path));
      const auto result = biorec::run_experiment(cfg, log_line);
      const auto& s = result.summary;
      fmt::print("accuracy {:.2f} ± {:.2f} (best {:.2f}) over {} split(s); macro F1 {:.2f}\n", 100 * s.accuracy_mean,
                 100 * s.accuracy_std, 100 * s.accuracy_best, s.splits, 100 * s.f1_mean);
      fmt::print("results in {}\n", cfg.output_dir);
    } else if (*search) {
      const auto cfg = overrides.apply(biorec::load_config(config_path));
      if (cfg.dataset_root.empty()) throw biorec::ConfigError("dataset.root is not set");
      const auto data = biorec::load_dataset(cfg.dataset_root, cfg.resize);
      biorec::run_search(cfg, data, cfg.output_dir, [](const std::string& m) { fmt::print("{}\n", m); });
    } else if (*predict) {
      const auto bundle = biorec::load_bundle(bundle_path);
      std::vector<std::filesystem::path> paths(images.begin(), images.end());
      for (const auto& p : biorec::predict(bundle, paths)) {
        fmt::print("{}\t{}\t{}", p.path, p.label, p.category);
        for (double v : p.scores) fmt::print("\t{:.6f}", v);
        fmt::print("\n");
      }
    } else if (*report) {
      fmt::print("{}", biorec::report(run_dir));
    }
  } catch (const biorec::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
  return kOk;
}
