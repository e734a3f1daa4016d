#include <benchmark/benchmark.h>

#include "biorec/features.hpp"
#include "biorec/mlp.hpp"
#include "biorec/pca.hpp"
#include "biorec/random.hpp"

namespace {

biorec::Image random_image(int h, int w, std::uint64_t seed) {
  biorec::Rng rng(seed);
  biorec::Image img(h, w);
  for (Eigen::Index i = 0; i < img.size(); ++i) img.data()[i] = rng.uniform01();
  return img;
}

void BM_Lbp(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const auto img = random_image(side, side, 1);
  biorec::LbpConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(biorec::lbp_descriptor(img, cfg));
}
BENCHMARK(BM_Lbp)->Arg(96)->Arg(192);

void BM_Hog(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const auto img = random_image(side, side, 2);
  biorec::HogConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(biorec::hog_descriptor(img, cfg));
}
BENCHMARK(BM_Hog)->Arg(96)->Arg(192);

void BM_PcaFit(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const int n = static_cast<int>(state.range(1));
  biorec::Rng rng(3);
  biorec::FeatureMatrix x(d, n);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-1, 1);
  for (auto _ : state) benchmark::DoNotOptimize(biorec::fit_pca(x, 40, true));
}
BENCHMARK(BM_PcaFit)->Args({9216, 200})->Args({500, 2000});

void BM_MlpGradient(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  auto model = biorec::init_weights(40, 30, 40, 4);
  biorec::Rng rng(5);
  Eigen::MatrixXd x(40, n);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-1, 1);
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) labels[i] = i % 40;
  const auto targets = biorec::one_hot(labels, 40);
  for (auto _ : state) benchmark::DoNotOptimize(biorec::loss_and_gradient(model, x, targets));
}
BENCHMARK(BM_MlpGradient)->Arg(200)->Arg(2000);

}  // namespace
BENCHMARK_MAIN();
