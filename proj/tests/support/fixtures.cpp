#include "fixtures.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <unistd.h>

#include <fmt/format.h>

#include "biorec/random.hpp"

namespace fs = std::filesystem;

namespace biorec::testing {

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  Rng rng(static_cast<std::uint64_t>(std::chrono::steady_clock::now().time_since_epoch().count()));
  path_ = fs::temp_directory_path() /
          fmt::format("{}-{}-{}-{:x}", tag, ::getpid(), counter++, rng.next_u64() & 0xffffff);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

Image random_image(int height, int width, std::uint64_t seed) {
  Rng rng(seed);
  Image img(height, width);
  for (Eigen::Index i = 0; i < img.size(); ++i) img.data()[i] = rng.uniform01();
  return img;
}

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed, double lo, double hi) {
  Rng rng(seed);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(lo, hi);
  return m;
}

Image toy_image(int category, int instance, int height, int width, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "toy", static_cast<std::uint64_t>(category * 1000 + instance)));
  const double angle = std::numbers::pi * category / 5.0;
  const double freq = 0.35 + 0.15 * (category % 3);
  const double phase = rng.uniform(-0.3, 0.3);
  const double c = std::cos(angle), s = std::sin(angle);
  Image img(height, width);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const double t = freq * (c * x + s * y) + phase;
      const double v = 0.5 + 0.35 * std::sin(t) + rng.uniform(-0.08, 0.08);
      img(y, x) = std::clamp(v, 0.0, 1.0);
    }
  return img;
}

ImageSet toy_image_set(int categories, int per_category, int height, int width, std::uint64_t seed) {
  ImageSet set;
  set.height = height;
  set.width = width;
  for (int c = 0; c < categories; ++c) {
    set.category_names.push_back(fmt::format("cat_{:02}", c));
    for (int i = 0; i < per_category; ++i) {
      set.images.push_back(toy_image(c, i, height, width, seed));
      set.labels.push_back(c);
      set.source_paths.push_back(fmt::format("cat_{:02}/img_{:02}.png", c, i));
    }
  }
  return set;
}

void write_toy_dataset(const fs::path& root, int categories, int per_category, int height, int width,
                       std::uint64_t seed) {
  for (int c = 0; c < categories; ++c) {
    const auto dir = root / fmt::format("cat_{:02}", c);
    fs::create_directories(dir);
    for (int i = 0; i < per_category; ++i)
      write_image(dir / fmt::format("img_{:02}.png", i), toy_image(c, i, height, width, seed));
  }
}

FeatureBank cluster_bank(int categories, int per_category, const std::vector<int>& dims, double separation,
                         std::uint64_t seed) {
  Rng rng(seed);
  FeatureBank bank;
  const int n = categories * per_category;
  for (int i = 0; i < n; ++i) bank.labels.push_back(i % categories);
  for (int d : dims) {
    Eigen::MatrixXd centres(d, categories);
    for (Eigen::Index i = 0; i < centres.size(); ++i) centres.data()[i] = separation * rng.uniform(-1, 1);
    FeatureMatrix x(d, n);
    for (int i = 0; i < n; ++i)
      for (int r = 0; r < d; ++r) {
        // Irwin-Hall(4) approximates a unit-variance normal well enough here.
        double g = 0;
        for (int k = 0; k < 4; ++k) g += rng.uniform01();
        x(r, i) = centres(r, bank.labels[static_cast<std::size_t>(i)]) + (g - 2.0) * std::sqrt(3.0);
      }
    bank.channels.push_back(std::move(x));
  }
  return bank;
}

ExperimentConfig toy_config(const fs::path& dataset_root, const fs::path& out_dir) {
  ExperimentConfig cfg;
  cfg.dataset_root = dataset_root.string();
  cfg.resize = std::nullopt;
  cfg.normalization = {Normalization::standard, 7};
  cfg.split = PerCategoryScheme{6, 0.34};
  cfg.n_splits = 2;
  cfg.seed = 7;
  cfg.lbp = {8, 1, 2, 2};
  cfg.hog = {6, 6};
  for (auto& ch : cfg.channels) {
    ch.pcs = 6;
    ch.neurons = 6;
  }
  cfg.training.max_epochs = 60;
  cfg.output_dir = out_dir.string();
  return cfg;
}

TrainedPipeline toy_pipeline(const ImageSet& data, const SplitPlan& plan, FusionMode fusion, std::uint64_t seed) {
  const auto cfg = toy_config({}, {});
  const auto settings = cfg.feature_settings();
  const auto bank = extract_features(data.images, data.labels, settings);
  FitOptions fit;
  for (Channel c : cfg.enabled_channels())
    fit.architectures.push_back({cfg.channel(c).pcs, cfg.channel(c).neurons, cfg.channel(c).standardize});
  fit.fusion = fusion;
  fit.training = cfg.training;
  fit.seed = seed;
  auto pipeline =
      fit_pipeline(bank.select(plan.learn_idx), bank.select(plan.val_idx), data.category_names, settings, fit);
  pipeline.image_size = {data.height, data.width};
  return pipeline;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace biorec::testing
