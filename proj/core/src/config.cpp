#include "biorec/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "biorec/error.hpp"

namespace biorec {

namespace {

void check_keys(const YAML::Node& node, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!node) return;
  if (!node.IsMap()) throw ConfigError(fmt::format("'{}' must be a mapping", where));
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(fmt::format("unknown key '{}' in '{}'", key, where.empty() ? "<root>" : where));
  }
}

template <typename T>
void read(const YAML::Node& node, const char* key, T& out, const std::string& where) {
  if (!node || !node[key]) return;
  try {
    out = node[key].as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(fmt::format("invalid value for '{}.{}'", where, key));
  }
}

std::pair<int, int> read_pair(const YAML::Node& node, const std::string& where) {
  if (!node.IsSequence() || node.size() != 2) throw ConfigError(fmt::format("'{}' must be a [y, x] pair", where));
  try {
    return {node[0].as<int>(), node[1].as<int>()};
  } catch (const YAML::Exception&) {
    throw ConfigError(fmt::format("'{}' must hold integers", where));
  }
}

IntRange read_range(const YAML::Node& node, IntRange base, const std::string& where) {
  if (node.IsSequence()) {
    if (node.size() != 3) throw ConfigError(fmt::format("'{}' must be [min, max, step]", where));
    try {
      return {node[0].as<int>(), node[1].as<int>(), node[2].as<int>()};
    } catch (const YAML::Exception&) {
      throw ConfigError(fmt::format("'{}' must hold integers", where));
    }
  }
  check_keys(node, {"min", "max", "step"}, where);
  read(node, "min", base.min, where);
  read(node, "max", base.max, where);
  read(node, "step", base.step, where);
  return base;
}

void emit_range(YAML::Emitter& out, const char* key, const IntRange& r) {
  out << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "min" << YAML::Value
      << r.min << YAML::Key << "max" << YAML::Value << r.max << YAML::Key << "step" << YAML::Value << r.step
      << YAML::EndMap;
}

void emit_pair(YAML::Emitter& out, const char* key, int a, int b) {
  out << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginSeq << a << b << YAML::EndSeq;
}

}  // namespace

std::vector<Channel> ExperimentConfig::enabled_channels() const {
  std::vector<Channel> out;
  for (Channel c : kAllChannels)
    if (channel(c).enabled) out.push_back(c);
  return out;
}

FeatureSettings ExperimentConfig::feature_settings() const {
  return {normalization, lbp, hog, enabled_channels()};
}

void ExperimentConfig::validate() const {
  try {
    normalization.validate();
    lbp.validate();
    hog.validate();
    search.space.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  if (resize && (resize->height < 1 || resize->width < 1)) throw ConfigError("resize must be positive");
  if (n_splits < 1) throw ConfigError("split count must be >= 1");
  if (enabled_channels().empty()) throw ConfigError("at least one channel must be enabled");
  for (Channel c : kAllChannels) {
    const auto& ch = channel(c);
    if (ch.enabled && (ch.pcs < 1 || ch.neurons < 1))
      throw ConfigError(fmt::format("channel {} needs pcs >= 1 and neurons >= 1", to_string(c)));
  }
  if (skip_leading < 0) throw ConfigError("skip_leading must be >= 0");
  if (training.max_epochs < 0 || training.patience < 1) throw ConfigError("need max_epochs >= 0, patience >= 1");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  std::visit(
      [](const auto& s) {
        if (s.val_fraction_of_train < 0 || s.val_fraction_of_train >= 1)
          throw ConfigError("val_fraction must lie in [0, 1)");
      },
      split);
  if (const auto* f = std::get_if<FractionScheme>(&split); f && (f->train_fraction <= 0 || f->train_fraction >= 1))
    throw ConfigError("train_fraction must lie in (0, 1)");
}

void apply_preset(ExperimentConfig& config, const std::string& preset) {
  if (preset == "faces") {
    config.resize = ImageSize{96, 96};
    config.lbp = {8, 1, 6, 6};
    config.hog = {8, 8};
    config.search.space = search_preset("faces");
  } else if (preset == "objects") {
    config.resize = ImageSize{192, 192};
    config.lbp = {14, 1, 10, 10};
    config.hog = {16, 16};
    config.search.space = search_preset("objects");
  } else {
    throw ConfigError(fmt::format("unknown preset '{}'", preset));
  }
}

ExperimentConfig parse_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("config is not valid YAML: {}", e.what()));
  }
  ExperimentConfig cfg;
  if (root.IsNull()) return cfg;
  check_keys(root,
             {"preset", "dataset", "normalization", "split", "seed", "features", "channels", "pca", "search",
              "fusion", "training", "output", "threads"},
             "");

  if (root["preset"]) apply_preset(cfg, root["preset"].as<std::string>());

  if (const auto ds = root["dataset"]) {
    check_keys(ds, {"root", "resize"}, "dataset");
    read(ds, "root", cfg.dataset_root, "dataset");
    if (const auto r = ds["resize"]) {
      if (r.IsScalar() && r.as<std::string>() == "none") {
        cfg.resize.reset();
      } else {
        const auto [h, w] = read_pair(r, "dataset.resize");
        cfg.resize = ImageSize{h, w};
      }
    }
  }

  if (const auto n = root["normalization"]) {
    check_keys(n, {"mode", "ln_window"}, "normalization");
    std::string mode = to_string(cfg.normalization.variant);
    read(n, "mode", mode, "normalization");
    cfg.normalization.variant = normalization_from_string(mode);
    read(n, "ln_window", cfg.normalization.ln_window, "normalization");
  }

  if (const auto s = root["split"]) {
    check_keys(s, {"scheme", "train_fraction", "n_train", "k_first", "k_random", "val_fraction", "count"}, "split");
    std::string scheme = "per_category";
    read(s, "scheme", scheme, "split");
    double vf = 0.1;
    read(s, "val_fraction", vf, "split");
    read(s, "count", cfg.n_splits, "split");
    if (scheme == "fraction") {
      FractionScheme f{0.5, vf};
      read(s, "train_fraction", f.train_fraction, "split");
      cfg.split = f;
    } else if (scheme == "per_category") {
      PerCategoryScheme p{5, vf};
      read(s, "n_train", p.n_train, "split");
      cfg.split = p;
    } else if (scheme == "fixed_first_k") {
      FixedFirstKScheme k{0, 0, vf};
      read(s, "k_first", k.k_first, "split");
      read(s, "k_random", k.k_random, "split");
      cfg.split = k;
    } else {
      throw ConfigError(fmt::format("unknown split scheme '{}'", scheme));
    }
  }

  read(root, "seed", cfg.seed, "");

  if (const auto f = root["features"]) {
    check_keys(f, {"lbp", "hog"}, "features");
    if (const auto l = f["lbp"]) {
      check_keys(l, {"points", "radius", "grid"}, "features.lbp");
      read(l, "points", cfg.lbp.points, "features.lbp");
      read(l, "radius", cfg.lbp.radius, "features.lbp");
      if (l["grid"]) std::tie(cfg.lbp.grid_y, cfg.lbp.grid_x) = read_pair(l["grid"], "features.lbp.grid");
    }
    if (const auto h = f["hog"]) {
      check_keys(h, {"cell"}, "features.hog");
      if (h["cell"]) std::tie(cfg.hog.cell_y, cfg.hog.cell_x) = read_pair(h["cell"], "features.hog.cell");
    }
  }

  if (const auto chans = root["channels"]) {
    check_keys(chans, {"raw", "lbp", "hog"}, "channels");
    for (Channel c : kAllChannels) {
      const auto name = to_string(c);
      const auto node = chans[name];
      if (!node) continue;
      const auto where = "channels." + name;
      check_keys(node, {"enabled", "pcs", "neurons", "standardize"}, where);
      auto& ch = cfg.channel(c);
      read(node, "enabled", ch.enabled, where);
      read(node, "pcs", ch.pcs, where);
      read(node, "neurons", ch.neurons, where);
      read(node, "standardize", ch.standardize, where);
    }
  }

  if (const auto p = root["pca"]) {
    check_keys(p, {"skip_leading"}, "pca");
    read(p, "skip_leading", cfg.skip_leading, "pca");
  }

  if (const auto s = root["search"]) {
    check_keys(s, {"enabled", "preset", "pcs", "neurons", "refine", "top_k", "joint"}, "search");
    read(s, "enabled", cfg.search.enabled, "search");
    if (s["preset"]) cfg.search.space = search_preset(s["preset"].as<std::string>());
    if (s["pcs"]) cfg.search.space.pcs = read_range(s["pcs"], cfg.search.space.pcs, "search.pcs");
    if (s["neurons"]) cfg.search.space.neurons = read_range(s["neurons"], cfg.search.space.neurons, "search.neurons");
    read(s, "refine", cfg.search.space.refine, "search");
    read(s, "top_k", cfg.search.space.top_k, "search");
    read(s, "joint", cfg.search.joint, "search");
  }

  if (root["fusion"]) cfg.fusion = fusion_mode_from_string(root["fusion"].as<std::string>());

  if (const auto t = root["training"]) {
    check_keys(t, {"max_epochs", "patience", "grad_tol"}, "training");
    read(t, "max_epochs", cfg.training.max_epochs, "training");
    read(t, "patience", cfg.training.patience, "training");
    read(t, "grad_tol", cfg.training.grad_tol, "training");
  }

  read(root, "output", cfg.output_dir, "");
  read(root, "threads", cfg.threads, "");
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config {}", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string to_yaml(const ExperimentConfig& c) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;

  out << YAML::Key << "dataset" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "root" << YAML::Value << c.dataset_root;
  if (c.resize)
    emit_pair(out, "resize", c.resize->height, c.resize->width);
  else
    out << YAML::Key << "resize" << YAML::Value << "none";
  out << YAML::EndMap;

  out << YAML::Key << "normalization" << YAML::Value << YAML::BeginMap << YAML::Key << "mode" << YAML::Value
      << to_string(c.normalization.variant) << YAML::Key << "ln_window" << YAML::Value << c.normalization.ln_window
      << YAML::EndMap;

  out << YAML::Key << "split" << YAML::Value << YAML::BeginMap;
  if (const auto* f = std::get_if<FractionScheme>(&c.split)) {
    out << YAML::Key << "scheme" << YAML::Value << "fraction" << YAML::Key << "train_fraction" << YAML::Value
        << f->train_fraction;
  } else if (const auto* p = std::get_if<PerCategoryScheme>(&c.split)) {
    out << YAML::Key << "scheme" << YAML::Value << "per_category" << YAML::Key << "n_train" << YAML::Value
        << p->n_train;
  } else {
    const auto& k = std::get<FixedFirstKScheme>(c.split);
    out << YAML::Key << "scheme" << YAML::Value << "fixed_first_k" << YAML::Key << "k_first" << YAML::Value
        << k.k_first << YAML::Key << "k_random" << YAML::Value << k.k_random;
  }
  out << YAML::Key << "val_fraction" << YAML::Value
      << std::visit([](const auto& s) { return s.val_fraction_of_train; }, c.split);
  out << YAML::Key << "count" << YAML::Value << c.n_splits << YAML::EndMap;

  out << YAML::Key << "seed" << YAML::Value << c.seed;

  out << YAML::Key << "features" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "lbp" << YAML::Value << YAML::BeginMap << YAML::Key << "points" << YAML::Value << c.lbp.points
      << YAML::Key << "radius" << YAML::Value << c.lbp.radius;
  emit_pair(out, "grid", c.lbp.grid_y, c.lbp.grid_x);
  out << YAML::EndMap;
  out << YAML::Key << "hog" << YAML::Value << YAML::BeginMap;
  emit_pair(out, "cell", c.hog.cell_y, c.hog.cell_x);
  out << YAML::EndMap << YAML::EndMap;

  out << YAML::Key << "channels" << YAML::Value << YAML::BeginMap;
  for (Channel ch : kAllChannels) {
    const auto& s = c.channel(ch);
    out << YAML::Key << to_string(ch) << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "enabled"
        << YAML::Value << s.enabled << YAML::Key << "pcs" << YAML::Value << s.pcs << YAML::Key << "neurons"
        << YAML::Value << s.neurons << YAML::Key << "standardize" << YAML::Value << s.standardize << YAML::EndMap;
  }
  out << YAML::EndMap;

  out << YAML::Key << "pca" << YAML::Value << YAML::BeginMap << YAML::Key << "skip_leading" << YAML::Value
      << c.skip_leading << YAML::EndMap;

  out << YAML::Key << "search" << YAML::Value << YAML::BeginMap << YAML::Key << "enabled" << YAML::Value
      << c.search.enabled;
  emit_range(out, "pcs", c.search.space.pcs);
  emit_range(out, "neurons", c.search.space.neurons);
  out << YAML::Key << "refine" << YAML::Value << c.search.space.refine << YAML::Key << "top_k" << YAML::Value
      << c.search.space.top_k << YAML::Key << "joint" << YAML::Value << c.search.joint << YAML::EndMap;

  out << YAML::Key << "fusion" << YAML::Value << to_string(c.fusion);
  out << YAML::Key << "training" << YAML::Value << YAML::BeginMap << YAML::Key << "max_epochs" << YAML::Value
      << c.training.max_epochs << YAML::Key << "patience" << YAML::Value << c.training.patience << YAML::Key
      << "grad_tol" << YAML::Value << c.training.grad_tol << YAML::EndMap;
  out << YAML::Key << "output" << YAML::Value << c.output_dir;
  out << YAML::Key << "threads" << YAML::Value << c.threads;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace biorec
