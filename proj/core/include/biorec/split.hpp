#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "biorec/dataset.hpp"

namespace biorec {

/// Fraction of each category for training; the rest is test.
struct FractionScheme {
  double train_fraction = 0.5;
  double val_fraction_of_train = 0.1;
  friend bool operator==(const FractionScheme&, const FractionScheme&) = default;
};

/// Fixed number of training samples per category.
struct PerCategoryScheme {
  int n_train = 5;
  double val_fraction_of_train = 0.1;
  friend bool operator==(const PerCategoryScheme&, const PerCategoryScheme&) = default;
};

/// First k samples of each category (in load order) plus k_random drawn
/// from the remainder form the training part.
struct FixedFirstKScheme {
  int k_first = 0;
  int k_random = 0;
  double val_fraction_of_train = 0.1;
  friend bool operator==(const FixedFirstKScheme&, const FixedFirstKScheme&) = default;
};

using SplitScheme = std::variant<FractionScheme, PerCategoryScheme, FixedFirstKScheme>;

struct SplitPlan {
  std::vector<std::size_t> learn_idx;
  std::vector<std::size_t> val_idx;
  std::vector<std::size_t> test_idx;
  std::uint64_t seed = 0;
  SplitScheme scheme;

  friend bool operator==(const SplitPlan&, const SplitPlan&) = default;
};

/// Stratified learn/validation/test partition.
///
/// Per category the samples are shuffled with a generator seeded by `seed`;
/// training counts come from the scheme, and validation counts are spread
/// over categories with the largest-remainder rule (ties to the lower
/// category index). Throws InvalidArgument for infeasible schemes.
SplitPlan make_split(const std::vector<int>& labels, int num_categories, const SplitScheme& scheme,
                     std::uint64_t seed);

inline SplitPlan make_split(const ImageSet& set, const SplitScheme& scheme, std::uint64_t seed) {
  return make_split(set.labels, set.num_categories(), scheme, seed);
}

/// Largest-remainder apportionment of `total` over `quotas`.
std::vector<int> largest_remainder(const std::vector<double>& quotas, int total);

std::string scheme_to_string(const SplitScheme& scheme);
SplitScheme scheme_from_string(const std::string& text);

/// Plain-text record: seed, scheme, then the three sorted index lists.
std::string split_to_text(const SplitPlan& plan);
SplitPlan split_from_text(const std::string& text);

}  // namespace biorec
