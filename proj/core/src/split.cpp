#include "biorec/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "biorec/error.hpp"
#include "biorec/random.hpp"

namespace biorec {

namespace {

int round_half_up(double x) { return static_cast<int>(std::floor(x + 0.5 + 1e-9)); }

void check_fraction(double f, const char* name, bool allow_zero) {
  if (!(f < 1.0) || f < 0.0 || (!allow_zero && f == 0.0))
    throw InvalidArgument(fmt::format("{} must lie in {}0, 1)", name, allow_zero ? "[" : "("));
}

double val_fraction(const SplitScheme& scheme) {
  return std::visit([](const auto& s) { return s.val_fraction_of_train; }, scheme);
}

}  // namespace

std::vector<int> largest_remainder(const std::vector<double>& quotas, int total) {
  std::vector<int> counts(quotas.size());
  int assigned = 0;
  for (std::size_t i = 0; i < quotas.size(); ++i) {
    counts[i] = static_cast<int>(std::floor(quotas[i] + 1e-9));
    assigned += counts[i];
  }
  std::vector<std::size_t> order(quotas.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return quotas[a] - counts[a] > quotas[b] - counts[b];
  });
  for (std::size_t k = 0; assigned < total && k < order.size(); ++k, ++assigned) ++counts[order[k]];
  return counts;
}

SplitPlan make_split(const std::vector<int>& labels, int num_categories, const SplitScheme& scheme,
                     std::uint64_t seed) {
  if (num_categories < 1) throw InvalidArgument("split needs at least one category");
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(num_categories));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_categories)
      throw InvalidArgument(fmt::format("label {} out of range", labels[i]));
    members[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  const auto n_cat = members.size();

  std::vector<int> train(n_cat);
  if (const auto* s = std::get_if<FractionScheme>(&scheme)) {
    check_fraction(s->train_fraction, "train_fraction", false);
    std::vector<double> quotas(n_cat);
    for (std::size_t c = 0; c < n_cat; ++c) quotas[c] = s->train_fraction * members[c].size();
    train = largest_remainder(quotas, round_half_up(s->train_fraction * labels.size()));
  } else if (const auto* s = std::get_if<PerCategoryScheme>(&scheme)) {
    if (s->n_train < 1) throw InvalidArgument("n_train must be at least 1");
    std::fill(train.begin(), train.end(), s->n_train);
  } else {
    const auto& f = std::get<FixedFirstKScheme>(scheme);
    if (f.k_first < 0 || f.k_random < 0 || f.k_first + f.k_random < 1)
      throw InvalidArgument("fixed_first_k needs k_first + k_random >= 1");
    std::fill(train.begin(), train.end(), f.k_first + f.k_random);
  }
  check_fraction(val_fraction(scheme), "val_fraction_of_train", true);

  for (std::size_t c = 0; c < n_cat; ++c) {
    const auto have = static_cast<int>(members[c].size());
    if (train[c] < 1 || train[c] + 1 > have)
      throw InvalidArgument(fmt::format(
          "infeasible split: category {} has {} samples, needs {} training + 1 test", c, have,
          train[c]));
  }

  const double vf = val_fraction(scheme);
  std::vector<double> val_quotas(n_cat);
  int train_total = 0;
  for (std::size_t c = 0; c < n_cat; ++c) {
    val_quotas[c] = vf * train[c];
    train_total += train[c];
  }
  const auto val = largest_remainder(val_quotas, round_half_up(vf * train_total));

  SplitPlan plan;
  plan.seed = seed;
  plan.scheme = scheme;
  Rng rng(seed);
  const auto* fixed = std::get_if<FixedFirstKScheme>(&scheme);
  for (std::size_t c = 0; c < n_cat; ++c) {
    std::vector<std::size_t> order = members[c];
    std::vector<std::size_t> chosen;
    std::vector<std::size_t> rest;
    if (fixed) {
      const auto k = static_cast<std::size_t>(fixed->k_first);
      chosen.assign(order.begin(), order.begin() + k);
      rest.assign(order.begin() + k, order.end());
      rng.shuffle(rest);
      chosen.insert(chosen.end(), rest.begin(), rest.begin() + fixed->k_random);
      rest.erase(rest.begin(), rest.begin() + fixed->k_random);
      rng.shuffle(chosen);
    } else {
      rng.shuffle(order);
      chosen.assign(order.begin(), order.begin() + train[c]);
      rest.assign(order.begin() + train[c], order.end());
    }
    for (int k = 0; k < static_cast<int>(chosen.size()); ++k)
      (k < val[c] ? plan.val_idx : plan.learn_idx).push_back(chosen[static_cast<std::size_t>(k)]);
    plan.test_idx.insert(plan.test_idx.end(), rest.begin(), rest.end());
  }
  std::sort(plan.learn_idx.begin(), plan.learn_idx.end());
  std::sort(plan.val_idx.begin(), plan.val_idx.end());
  std::sort(plan.test_idx.begin(), plan.test_idx.end());
  return plan;
}

std::string scheme_to_string(const SplitScheme& scheme) {
  if (const auto* s = std::get_if<FractionScheme>(&scheme))
    return fmt::format("fraction {:.17g} {:.17g}", s->train_fraction, s->val_fraction_of_train);
  if (const auto* s = std::get_if<PerCategoryScheme>(&scheme))
    return fmt::format("per_category {} {:.17g}", s->n_train, s->val_fraction_of_train);
  const auto& f = std::get<FixedFirstKScheme>(scheme);
  return fmt::format("fixed_first_k {} {} {:.17g}", f.k_first, f.k_random,
                     f.val_fraction_of_train);
}

SplitScheme scheme_from_string(const std::string& text) {
  std::istringstream in(text);
  std::string kind;
  in >> kind;
  SplitScheme out;
  if (kind == "fraction") {
    FractionScheme s;
    in >> s.train_fraction >> s.val_fraction_of_train;
    out = s;
  } else if (kind == "per_category") {
    PerCategoryScheme s;
    in >> s.n_train >> s.val_fraction_of_train;
    out = s;
  } else if (kind == "fixed_first_k") {
    FixedFirstKScheme s;
    in >> s.k_first >> s.k_random >> s.val_fraction_of_train;
    out = s;
  } else {
    throw FormatError(fmt::format("unknown split scheme '{}'", kind));
  }
  if (in.fail()) throw FormatError(fmt::format("malformed split scheme '{}'", text));
  return out;
}

std::string split_to_text(const SplitPlan& plan) {
  std::string out = fmt::format("seed {}\nscheme {}\n", plan.seed, scheme_to_string(plan.scheme));
  auto list = [&out](const char* name, const std::vector<std::size_t>& idx) {
    out += name;
    for (auto i : idx) out += fmt::format(" {}", i);
    out += '\n';
  };
  list("learn", plan.learn_idx);
  list("val", plan.val_idx);
  list("test", plan.test_idx);
  return out;
}

SplitPlan split_from_text(const std::string& text) {
  SplitPlan plan;
  std::istringstream in(text);
  std::string line;
  int fields = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "seed") {
      ls >> plan.seed;
    } else if (key == "scheme") {
      std::string rest;
      std::getline(ls, rest);
      plan.scheme = scheme_from_string(rest);
    } else if (key == "learn" || key == "val" || key == "test") {
      auto& idx = key == "learn" ? plan.learn_idx : key == "val" ? plan.val_idx : plan.test_idx;
      std::size_t v;
      while (ls >> v) idx.push_back(v);
      if (!ls.eof()) throw FormatError(fmt::format("malformed index list '{}'", key));
    } else {
      throw FormatError(fmt::format("unknown split record field '{}'", key));
    }
    ++fields;
  }
  if (fields != 5) throw FormatError("split record must have 5 fields");
  return plan;
}

}  // namespace biorec
