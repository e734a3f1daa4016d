#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include <gtest/gtest.h>

#include "biorec/dataset.hpp"
#include "biorec/error.hpp"
#include "biorec/random.hpp"
#include "biorec/split.hpp"
#include "fixtures.hpp"

namespace fs = std::filesystem;
using namespace biorec;
using biorec::testing::TempDir;

TEST(LoadDataset, EmptyRootReportsNoCategories) {
  TempDir dir;
  try {
    load_dataset(dir.path());
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("no categories found"), std::string::npos);
  }
}

TEST(LoadDataset, MissingRootIsDataError) { EXPECT_THROW(load_dataset("/nonexistent/biorec/root"), DataError); }

TEST(LoadDataset, TwoCategoriesOfThreeSmallImages) {
  TempDir dir;
  // Written out of lexicographic order on purpose.
  for (const char* cat : {"zeta", "alpha"}) {
    fs::create_directories(dir / cat);
    for (int i = 0; i < 3; ++i)
      write_image(dir.path() / cat / ("im" + std::to_string(i) + ".png"), biorec::testing::random_image(4, 4, i));
  }
  const auto set = load_dataset(dir.path());
  EXPECT_EQ(set.size(), 6u);
  EXPECT_EQ(set.num_categories(), 2);
  EXPECT_EQ(set.height, 4);
  EXPECT_EQ(set.width, 4);
  EXPECT_EQ(set.category_names, (std::vector<std::string>{"alpha", "zeta"}));
  EXPECT_EQ(set.labels, (std::vector<int>{0, 0, 0, 1, 1, 1}));
  for (const auto& img : set.images) {
    EXPECT_GE(img.minCoeff(), 0.0);
    EXPECT_LE(img.maxCoeff(), 1.0);
  }
  EXPECT_NO_THROW(set.validate());
}

TEST(LoadDataset, ResizesFaceImageTo96Square) {
  TempDir dir;
  fs::create_directories(dir / "s1");
  write_image(dir.path() / "s1" / "1.pgm", biorec::testing::random_image(112, 92, 3));
  const auto set = load_dataset(dir.path(), ImageSize{96, 96});
  ASSERT_EQ(set.size(), 1u);
  EXPECT_EQ(set.images[0].rows(), 96);
  EXPECT_EQ(set.images[0].cols(), 96);
  EXPECT_EQ(set.height, 96);
  EXPECT_EQ(set.width, 96);
}

TEST(LoadDataset, EmptyCategoryIsError) {
  TempDir dir;
  fs::create_directories(dir / "a");
  fs::create_directories(dir / "b");
  write_image(dir.path() / "a" / "x.png", biorec::testing::random_image(4, 4, 1));
  EXPECT_THROW(load_dataset(dir.path()), DataError);
}

TEST(LoadDataset, MixedDimensionsWithoutResizeIsError) {
  TempDir dir;
  fs::create_directories(dir / "a");
  write_image(dir.path() / "a" / "x.png", biorec::testing::random_image(4, 4, 1));
  write_image(dir.path() / "a" / "y.png", biorec::testing::random_image(5, 4, 2));
  EXPECT_THROW(load_dataset(dir.path()), DataError);
  EXPECT_NO_THROW(load_dataset(dir.path(), ImageSize{4, 4}));
}

TEST(LoadDataset, UndecodableFileIsError) {
  TempDir dir;
  fs::create_directories(dir / "a");
  std::ofstream(dir.path() / "a" / "broken.png") << "not an image";
  EXPECT_THROW(load_dataset(dir.path()), DataError);
}

TEST(ReadImage, EightBitRoundTrip) {
  TempDir dir;
  Image img(3, 2);
  img << 0, 1, 0.5, 0.25, 1, 0;
  write_image(dir / "g.png", img);
  const auto back = read_image(dir / "g.png");
  ASSERT_EQ(back.rows(), 3);
  ASSERT_EQ(back.cols(), 2);
  EXPECT_LE((back - img).cwiseAbs().maxCoeff(), 0.5 / 255.0 + 1e-12);
}

TEST(RgbToGray, UsesLumaWeights) {
  // One pixel each of pure red, green, blue and white.
  const std::vector<double> rgb{1, 0, 0, 0, 1, 0, 0, 0, 1, 1, 1, 1};
  const auto g = rgb_to_gray(rgb, 1, 4, 3);
  EXPECT_NEAR(g(0, 0), 0.299, 1e-12);
  EXPECT_NEAR(g(0, 1), 0.587, 1e-12);
  EXPECT_NEAR(g(0, 2), 0.114, 1e-12);
  EXPECT_NEAR(g(0, 3), 1.0, 1e-12);
}

TEST(ResizeBilinear, ConstantStaysConstantAndIdentityIsExact) {
  const Image flat = Image::Constant(7, 5, 0.3);
  const auto up = resize_bilinear(flat, {11, 13});
  EXPECT_LE((up.array() - 0.3).abs().maxCoeff(), 1e-15);
  const auto img = biorec::testing::random_image(6, 4, 9);
  EXPECT_EQ(resize_bilinear(img, {6, 4}), img);
}

TEST(ResizeBilinear, HalvingAveragesPixelPairs) {
  Image img(1, 4);
  img << 0, 1, 2, 3;
  const auto half = resize_bilinear(img, {1, 2});
  EXPECT_NEAR(half(0, 0), 0.5, 1e-12);
  EXPECT_NEAR(half(0, 1), 2.5, 1e-12);
}

// ---- splits -----------------------------------------------------------

namespace {

std::vector<int> grouped_labels(int categories, int per_category) {
  std::vector<int> labels;
  for (int c = 0; c < categories; ++c)
    for (int i = 0; i < per_category; ++i) labels.push_back(c);
  return labels;
}

std::vector<int> per_category_count(const std::vector<std::size_t>& idx, const std::vector<int>& labels, int c) {
  std::vector<int> counts(static_cast<std::size_t>(c));
  for (auto i : idx) ++counts[static_cast<std::size_t>(labels[i])];
  return counts;
}

}  // namespace

TEST(MakeSplit, HalfTrainingWithTenPercentValidationOn200Samples) {
  const auto labels = grouped_labels(20, 10);
  const auto plan = make_split(labels, 20, FractionScheme{0.5, 0.1}, 1);
  EXPECT_EQ(plan.learn_idx.size(), 90u);
  EXPECT_EQ(plan.val_idx.size(), 10u);
  EXPECT_EQ(plan.test_idx.size(), 100u);
}

TEST(MakeSplit, TrainingEveryoneLeavesNoTestAndFails) {
  const auto labels = grouped_labels(3, 4);
  EXPECT_THROW(make_split(labels, 3, PerCategoryScheme{4, 0.1}, 1), InvalidArgument);
  EXPECT_THROW(make_split(labels, 3, PerCategoryScheme{0, 0.1}, 1), InvalidArgument);
  EXPECT_THROW(make_split(labels, 3, FractionScheme{1.0, 0.1}, 1), InvalidArgument);
}

TEST(MakeSplit, PerCategoryFiveWithTwentyPercentValidation) {
  const auto labels = grouped_labels(10, 10);
  const auto plan = make_split(labels, 10, PerCategoryScheme{5, 0.2}, 99);
  for (int n : per_category_count(plan.test_idx, labels, 10)) EXPECT_EQ(n, 5);
  for (int n : per_category_count(plan.learn_idx, labels, 10)) EXPECT_EQ(n, 4);
  for (int n : per_category_count(plan.val_idx, labels, 10)) EXPECT_EQ(n, 1);
}

TEST(MakeSplit, ValidationRemainderGoesToLowerCategoryIndexOnTies) {
  // 5 categories x 5 training samples, 10% validation: 2.5 rounds to 3
  // slots, each category has quota 0.5, so categories 0..2 get one.
  const auto labels = grouped_labels(5, 8);
  const auto plan = make_split(labels, 5, PerCategoryScheme{5, 0.1}, 3);
  EXPECT_EQ(per_category_count(plan.val_idx, labels, 5), (std::vector<int>{1, 1, 1, 0, 0}));
}

TEST(MakeSplit, FixedFirstKKeepsLeadingSamplesInTraining) {
  const auto labels = grouped_labels(4, 10);
  const auto plan = make_split(labels, 4, FixedFirstKScheme{3, 2, 0.0}, 5);
  std::set<std::size_t> learn(plan.learn_idx.begin(), plan.learn_idx.end());
  for (std::size_t c = 0; c < 4; ++c)
    for (std::size_t i = 0; i < 3; ++i) EXPECT_TRUE(learn.count(c * 10 + i));
  EXPECT_EQ(plan.learn_idx.size(), 20u);
  EXPECT_EQ(plan.test_idx.size(), 20u);
}

TEST(LargestRemainder, MatchesHandComputation) {
  EXPECT_EQ(largest_remainder({1.2, 2.7, 0.1}, 4), (std::vector<int>{1, 3, 0}));
  EXPECT_EQ(largest_remainder({0.5, 0.5, 0.5}, 2), (std::vector<int>{1, 1, 0}));
  EXPECT_EQ(largest_remainder({2.0, 3.0}, 5), (std::vector<int>{2, 3}));
}

TEST(SplitProperties, DisjointCoveringStratifiedAndDeterministicOver1000Draws) {
  Rng gen(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const int categories = 1 + static_cast<int>(gen.below(8));
    std::vector<int> labels;
    std::vector<int> sizes;
    for (int c = 0; c < categories; ++c) {
      sizes.push_back(2 + static_cast<int>(gen.below(12)));
      for (int i = 0; i < sizes.back(); ++i) labels.push_back(c);
    }
    Rng(gen.next_u64()).shuffle(labels);
    const int min_size = *std::min_element(sizes.begin(), sizes.end());
    const double vf = gen.below(4) * 0.1;
    SplitScheme scheme;
    switch (gen.below(3)) {
      case 0: scheme = FractionScheme{0.3 + 0.4 * gen.uniform01(), vf}; break;
      case 1: scheme = PerCategoryScheme{1 + static_cast<int>(gen.below(static_cast<std::uint64_t>(min_size - 1))), vf}; break;
      default: {
        const int k = 1 + static_cast<int>(gen.below(static_cast<std::uint64_t>(min_size - 1)));
        const int first = static_cast<int>(gen.below(static_cast<std::uint64_t>(k + 1)));
        scheme = FixedFirstKScheme{first, k - first, vf};
      }
    }
    const std::uint64_t seed = gen.next_u64();
    SplitPlan plan;
    try {
      plan = make_split(labels, categories, scheme, seed);
    } catch (const InvalidArgument&) {
      // Fractions can round a small category down to zero training samples.
      ASSERT_TRUE(std::holds_alternative<FractionScheme>(scheme));
      continue;
    }
    std::vector<int> seen(labels.size(), 0);
    for (const auto* idx : {&plan.learn_idx, &plan.val_idx, &plan.test_idx}) {
      ASSERT_TRUE(std::is_sorted(idx->begin(), idx->end()));
      for (auto i : *idx) ++seen[i];
    }
    for (int s : seen) ASSERT_EQ(s, 1);
    ASSERT_EQ(plan, make_split(labels, categories, scheme, seed));

    const auto test = per_category_count(plan.test_idx, labels, categories);
    for (int c = 0; c < categories; ++c) {
      double target;
      if (const auto* f = std::get_if<FractionScheme>(&scheme))
        target = (1 - f->train_fraction) * sizes[static_cast<std::size_t>(c)];
      else if (const auto* p = std::get_if<PerCategoryScheme>(&scheme))
        target = sizes[static_cast<std::size_t>(c)] - p->n_train;
      else {
        const auto& k = std::get<FixedFirstKScheme>(scheme);
        target = sizes[static_cast<std::size_t>(c)] - k.k_first - k.k_random;
      }
      ASSERT_LE(std::abs(test[static_cast<std::size_t>(c)] - target), 1.0);
    }
  }
}

TEST(SplitText, RoundTrips) {
  const auto labels = grouped_labels(3, 6);
  for (const SplitScheme& scheme :
       {SplitScheme{FractionScheme{0.5, 0.1}}, SplitScheme{PerCategoryScheme{2, 0.25}},
        SplitScheme{FixedFirstKScheme{1, 2, 0.0}}}) {
    const auto plan = make_split(labels, 3, scheme, 0xdeadbeefcafeULL);
    EXPECT_EQ(split_from_text(split_to_text(plan)), plan);
  }
  EXPECT_THROW(split_from_text("seed 1\nscheme bogus 1\n"), FormatError);
}

TEST(DeriveSeed, NamedStreamsDifferAndRepeat) {
  EXPECT_EQ(derive_seed(42, "split"), derive_seed(42, "split"));
  EXPECT_NE(derive_seed(42, "split"), derive_seed(42, "search"));
  EXPECT_NE(derive_seed(42, "split", 0), derive_seed(42, "split", 1));
  EXPECT_NE(derive_seed(42, "split"), derive_seed(43, "split"));
}

TEST(Rng, BelowStaysInRangeAndShuffleIsPermutation) {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) EXPECT_LT(rng.below(7), 7u);
  std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7};
  rng.shuffle(v);
  std::sort(v.begin(), v.end());
  EXPECT_EQ(v, (std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7}));
}
