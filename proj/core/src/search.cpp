#include "biorec/search.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <set>
#include <thread>
#include <tuple>

#include <fmt/format.h>

#include "biorec/error.hpp"
#include "biorec/fusion.hpp"
#include "biorec/random.hpp"

namespace biorec {

std::vector<int> IntRange::values() const {
  std::vector<int> out;
  for (int v = min; v <= max; v += step) out.push_back(v);
  return out;
}

void SearchSpace::validate() const {
  for (const auto* r : {&pcs, &neurons}) {
    if (r->step < 1) throw ConfigError("search step must be >= 1");
    if (r->min < 1 || r->max < r->min) throw ConfigError(fmt::format("empty search range [{}, {}]", r->min, r->max));
  }
  if (top_k < 1) throw ConfigError("top_k must be >= 1");
}

SearchSpace search_preset(const std::string& name) {
  if (name == "faces") return {{1, 150, 1}, {20, 35, 1}, false, 10};
  if (name == "objects") return {{1, 50, 1}, {1, 100, 1}, false, 10};
  if (name == "large") return {{30, 150, 5}, {5, 1000, 5}, true, 10};
  throw ConfigError(fmt::format("unknown search preset '{}'", name));
}

bool ranks_before(const SearchEntry& a, const SearchEntry& b) {
  if (a.val_accuracy != b.val_accuracy) return a.val_accuracy > b.val_accuracy;
  if (a.param_count != b.param_count) return a.param_count < b.param_count;
  return std::tie(a.pcs, a.neurons) < std::tie(b.pcs, b.neurons);
}

std::string SearchResult::to_tsv() const {
  std::string out = "pcs\tneurons\tval_accuracy\tparam_count\trefined\n";
  for (const auto& e : leaderboard)
    out += fmt::format("{}\t{}\t{:.17g}\t{}\t{}\n", e.pcs, e.neurons, e.val_accuracy, e.param_count, e.refined ? 1 : 0);
  for (const auto& w : warnings) out += fmt::format("# {}\n", w);
  return out;
}

namespace {

struct ProjectedChannel {
  FeatureMatrix learn;
  FeatureMatrix val;
};

class Evaluator {
 public:
  Evaluator(const FeatureBank& learn, const FeatureBank& val, int num_categories, const SearchOptions& options)
      : learn_labels_(learn.labels), val_labels_(val.labels), n_out_(num_categories), options_(options) {
    if (learn.channels.size() != val.channels.size()) throw InvalidArgument("learn/val channel mismatch");
    if (options.channel) {
      channels_.push_back(*options.channel);
      if (*options.channel >= learn.channels.size()) throw InvalidArgument("search channel out of range");
    } else {
      for (std::size_t k = 0; k < learn.channels.size(); ++k) channels_.push_back(k);
    }
  }

  void prepare(const FeatureBank& learn, const FeatureBank& val, int max_pcs) {
    max_feasible_ = INT32_MAX;
    for (auto k : channels_) {
      const bool standardize = k < options_.standardize.size() ? options_.standardize[k] : true;
      const auto pca = fit_pca(learn.channels[k], max_pcs, standardize, PcaRoute::automatic, options_.skip_leading);
      projected_.push_back({project(pca, learn.channels[k]), project(pca, val.channels[k])});
      max_feasible_ = std::min(max_feasible_, static_cast<int>(pca.num_components()));
    }
  }

  int max_feasible() const { return max_feasible_; }

  SearchEntry evaluate(int pcs, int neurons) const {
    SearchEntry e{pcs, neurons, 0.0, 0, false};
    std::vector<Eigen::MatrixXd> outputs;
    for (std::size_t i = 0; i < channels_.size(); ++i) {
      const auto& p = projected_[i];
      const LabeledData l{p.learn.topRows(pcs), learn_labels_};
      const LabeledData v{p.val.topRows(pcs), val_labels_};
      const auto init = init_weights(pcs, neurons, n_out_, options_.seed);
      const auto trained = scg_train(init, l, v, options_.training);
      outputs.push_back(forward(trained.model, v.x));
      e.param_count += trained.model.parameter_count();
    }
    const auto fused = sum_rule_fuse(outputs);
    std::size_t correct = 0;
    for (std::size_t j = 0; j < val_labels_.size(); ++j) correct += fused.predictions[j] == val_labels_[j];
    e.val_accuracy = static_cast<double>(correct) / static_cast<double>(val_labels_.size());
    return e;
  }

 private:
  std::vector<int> learn_labels_;
  std::vector<int> val_labels_;
  int n_out_;
  SearchOptions options_;
  std::vector<std::size_t> channels_;
  std::vector<ProjectedChannel> projected_;
  int max_feasible_ = 0;
};

std::vector<SearchEntry> evaluate_all(const Evaluator& evaluator, const std::vector<std::pair<int, int>>& points,
                                      int threads) {
  std::vector<SearchEntry> results(points.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      try {
        results[i] = evaluator.evaluate(points[i].first, points[i].second);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = points.size();
      }
    }
  };
  const int n = std::max(1, std::min<int>(threads, static_cast<int>(points.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

}  // namespace

SearchResult grid_search(const FeatureBank& learn, const FeatureBank& val, int num_categories,
                         const SearchSpace& space, const SearchOptions& options) {
  space.validate();
  if (learn.size() == 0 || val.size() == 0) throw InvalidArgument("grid search needs learn and validation data");

  Evaluator evaluator(learn, val, num_categories, options);
  evaluator.prepare(learn, val, space.pcs.max);

  SearchResult result;
  std::set<std::pair<int, int>> seen;
  auto collect = [&](const std::vector<std::pair<int, int>>& candidates, bool refined) {
    std::vector<std::pair<int, int>> points;
    for (const auto& pt : candidates) {
      if (!seen.insert(pt).second) continue;
      if (pt.first > evaluator.max_feasible()) {
        result.warnings.push_back(fmt::format("skipped pcs={} neurons={}: only {} components available", pt.first,
                                              pt.second, evaluator.max_feasible()));
        continue;
      }
      points.push_back(pt);
    }
    auto entries = evaluate_all(evaluator, points, options.threads);
    for (auto& e : entries) {
      e.refined = refined;
      result.leaderboard.push_back(e);
    }
  };

  std::vector<std::pair<int, int>> coarse;
  for (int p : space.pcs.values())
    for (int h : space.neurons.values()) coarse.emplace_back(p, h);
  collect(coarse, false);
  std::sort(result.leaderboard.begin(), result.leaderboard.end(), ranks_before);

  if (space.refine && !result.leaderboard.empty()) {
    std::set<std::pair<int, int>> window;
    const auto top = std::min<std::size_t>(static_cast<std::size_t>(space.top_k), result.leaderboard.size());
    for (std::size_t i = 0; i < top; ++i) {
      const auto& e = result.leaderboard[i];
      for (int p = std::max(space.pcs.min, e.pcs - space.pcs.step);
           p <= std::min(space.pcs.max, e.pcs + space.pcs.step); ++p)
        for (int h = std::max(space.neurons.min, e.neurons - space.neurons.step);
             h <= std::min(space.neurons.max, e.neurons + space.neurons.step); ++h)
          window.emplace(p, h);
    }
    collect({window.begin(), window.end()}, true);
    std::sort(result.leaderboard.begin(), result.leaderboard.end(), ranks_before);
  }

  if (result.leaderboard.empty())
    throw DataError(fmt::format("no feasible grid point: learn data supports at most {} components",
                                evaluator.max_feasible()));
  result.best = result.leaderboard.front();
  return result;
}

}  // namespace biorec
