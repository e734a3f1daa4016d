#include <algorithm>
#include <set>

#include <gtest/gtest.h>

#include "biorec/error.hpp"
#include "biorec/search.hpp"
#include "fixtures.hpp"

using namespace biorec;
using biorec::testing::cluster_bank;

namespace {

struct Data {
  FeatureBank learn, val;
};

Data separable(std::uint64_t seed = 1, double separation = 6.0) {
  return {cluster_bank(3, 12, {6, 5}, separation, seed), cluster_bank(3, 5, {6, 5}, separation, seed)};
}

/// Overlapping clusters so accuracy varies across the grid.
Data noisy() { return {cluster_bank(4, 15, {8, 8}, 0.9, 3), cluster_bank(4, 10, {8, 8}, 0.9, 3)}; }

SearchOptions fast_options() {
  SearchOptions o;
  o.training.max_epochs = 40;
  o.seed = 5;
  return o;
}

}  // namespace

TEST(GridSearch, SinglePointSpaceReturnsThatPoint) {
  const auto d = separable();
  const SearchSpace space{{3, 3, 1}, {4, 4, 1}, false, 10};
  const auto r = grid_search(d.learn, d.val, 3, space, fast_options());
  EXPECT_EQ(r.best.pcs, 3);
  EXPECT_EQ(r.best.neurons, 4);
  EXPECT_EQ(r.leaderboard.size(), 1u);
  EXPECT_EQ(r.best.param_count, mlp_parameter_count(3, 4, 3));
}

TEST(GridSearch, EqualAccuracyPrefersFewerParameters) {
  const auto d = separable(2, 12.0);
  const SearchSpace space{{4, 4, 1}, {20, 30, 10}, false, 10};
  const auto r = grid_search(d.learn, d.val, 3, space, fast_options());
  ASSERT_EQ(r.leaderboard.size(), 2u);
  ASSERT_EQ(r.leaderboard[0].val_accuracy, r.leaderboard[1].val_accuracy);
  EXPECT_LT(mlp_parameter_count(4, 20, 3), mlp_parameter_count(4, 30, 3));
  EXPECT_EQ(r.best.neurons, 20);
}

TEST(RanksBefore, AccuracyThenParametersThenLexicographic) {
  const SearchEntry hi{5, 30, 0.9, 500};
  const SearchEntry lo{1, 1, 0.8, 10};
  const SearchEntry small{5, 20, 0.9, 400};
  const SearchEntry same_a{4, 25, 0.9, 400};
  EXPECT_TRUE(ranks_before(hi, lo));
  EXPECT_TRUE(ranks_before(small, hi));
  EXPECT_TRUE(ranks_before(same_a, small));
  EXPECT_FALSE(ranks_before(small, small));
}

TEST(SearchSpace, FacePresetHas2400Points) {
  EXPECT_EQ(search_preset("faces").grid_size(), 2400u);
  EXPECT_EQ(search_preset("objects").grid_size(), 5000u);
  EXPECT_TRUE(search_preset("large").refine);
  EXPECT_THROW(search_preset("huge"), ConfigError);
  EXPECT_THROW((SearchSpace{{5, 4, 1}, {1, 1, 1}}.validate()), ConfigError);
  EXPECT_THROW((SearchSpace{{1, 4, 0}, {1, 1, 1}}.validate()), ConfigError);
}

TEST(GridSearch, DeterministicAcrossRunsAndThreadCounts) {
  const auto d = noisy();
  const SearchSpace space{{1, 7, 2}, {2, 6, 2}, false, 10};
  auto opts = fast_options();
  const auto a = grid_search(d.learn, d.val, 4, space, opts);
  const auto b = grid_search(d.learn, d.val, 4, space, opts);
  opts.threads = 3;
  const auto c = grid_search(d.learn, d.val, 4, space, opts);
  EXPECT_EQ(a.to_tsv(), b.to_tsv());
  EXPECT_EQ(a.to_tsv(), c.to_tsv());
}

TEST(GridSearch, LeaderboardCoversGridMinusInfeasiblePoints) {
  // 6 learn samples support at most 5 components.
  const FeatureBank learn = cluster_bank(2, 3, {10}, 3.0, 4);
  const FeatureBank val = cluster_bank(2, 2, {10}, 3.0, 4);
  const SearchSpace space{{2, 8, 2}, {3, 4, 1}, false, 10};
  const auto r = grid_search(learn, val, 2, space, fast_options());
  std::set<std::pair<int, int>> seen;
  for (const auto& e : r.leaderboard) {
    EXPECT_LE(e.pcs, 5);
    seen.emplace(e.pcs, e.neurons);
  }
  EXPECT_EQ(seen, (std::set<std::pair<int, int>>{{2, 3}, {2, 4}, {4, 3}, {4, 4}}));
  EXPECT_EQ(r.warnings.size(), 4u);
  for (std::size_t i = 1; i < r.leaderboard.size(); ++i)
    EXPECT_FALSE(ranks_before(r.leaderboard[i], r.leaderboard[i - 1]));
}

TEST(GridSearch, NoFeasiblePointIsDataError) {
  const FeatureBank learn = cluster_bank(2, 2, {10}, 3.0, 4);
  const FeatureBank val = cluster_bank(2, 1, {10}, 3.0, 4);
  EXPECT_THROW(grid_search(learn, val, 2, SearchSpace{{9, 9, 1}, {2, 2, 1}, false, 10}, fast_options()), DataError);
}

TEST(GridSearch, RefinedPassNeverWorseThanCoarseBest) {
  for (std::uint64_t seed : {3u, 4u, 5u}) {
    const Data d{cluster_bank(4, 15, {8, 8}, 0.9, seed), cluster_bank(4, 10, {8, 8}, 0.9, seed)};
    SearchSpace coarse{{1, 7, 3}, {2, 8, 3}, false, 3};
    const auto c = grid_search(d.learn, d.val, 4, coarse, fast_options());
    coarse.refine = true;
    const auto r = grid_search(d.learn, d.val, 4, coarse, fast_options());
    EXPECT_GE(r.best.val_accuracy, c.best.val_accuracy);
    EXPECT_GT(r.leaderboard.size(), c.leaderboard.size());
    std::set<std::pair<int, int>> unique;
    for (const auto& e : r.leaderboard) EXPECT_TRUE(unique.emplace(e.pcs, e.neurons).second);
  }
}

TEST(GridSearch, JointModeCountsParametersOfEveryChannel) {
  const auto d = separable();
  auto opts = fast_options();
  opts.channel.reset();
  const auto r = grid_search(d.learn, d.val, 3, SearchSpace{{2, 2, 1}, {3, 3, 1}, false, 10}, opts);
  EXPECT_EQ(r.best.param_count, 2 * mlp_parameter_count(2, 3, 3));
}

TEST(SearchResult, TsvHasHeaderAndOneRowPerEntry) {
  SearchResult r;
  r.leaderboard = {{1, 2, 0.5, 10, false}, {3, 4, 0.25, 20, true}};
  r.warnings = {"skipped"};
  const auto tsv = r.to_tsv();
  EXPECT_EQ(std::count(tsv.begin(), tsv.end(), '\n'), 4);
  EXPECT_NE(tsv.find("pcs\tneurons"), std::string::npos);
}
