#include <benchmark/benchmark.h>

#include "prunekit/data.hpp"
#include "prunekit/explain.hpp"
#include "prunekit/model.hpp"
#include "prunekit/pipeline.hpp"
#include "prunekit/rng.hpp"

using namespace prunekit;

namespace {

FeatureTable make_table(std::size_t n_samples, std::size_t n_relevant, int n_irrelevant,
                        std::uint64_t seed) {
  SyntheticSpec spec;
  spec.n_samples = n_samples;
  spec.relevant.assign(n_relevant, 2.0);
  spec.n_irrelevant = n_irrelevant;
  spec.noise_sigma = 0.5;
  spec.seed = seed;
  return generate_synthetic(spec);
}

void BM_DftMagnitude(benchmark::State& state) {
  RngStream stream(7, "bench");
  std::vector<double> xs(static_cast<std::size_t>(state.range(0)));
  for (double& x : xs) x = stream.next_gaussian();
  for (auto _ : state) {
    auto mags = dft_magnitude(xs);
    benchmark::DoNotOptimize(mags);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_DftMagnitude)->RangeMultiplier(4)->Range(256, 65536)->Complexity();

void BM_FitTree(benchmark::State& state) {
  FeatureTable table = make_table(static_cast<std::size_t>(state.range(0)), 3, 7, 11);
  const auto& y = table.target("y");
  TreeParams params{8, 2, 2};
  for (auto _ : state) {
    Tree tree = fit_tree(table.rows, y, params);
    benchmark::DoNotOptimize(tree);
  }
}
BENCHMARK(BM_FitTree)->Arg(100)->Arg(1000);

void BM_FitGbm(benchmark::State& state) {
  FeatureTable table = make_table(100, 3, 7, 11);
  const auto& y = table.target("y");
  ModelSpec spec = ModelSpec::gradient_boosting_default(1);
  spec.n_stages = static_cast<int>(state.range(0));
  for (auto _ : state) {
    Model model = fit_gbm(table.rows, y, spec);
    benchmark::DoNotOptimize(model);
  }
}
BENCHMARK(BM_FitGbm)->Arg(50)->Arg(200);

void BM_ShapleyExact(benchmark::State& state) {
  const auto n_features = static_cast<std::size_t>(state.range(0));
  FeatureTable table = make_table(64, n_features, 0, 13);
  ModelSpec spec = ModelSpec::decision_tree_default(1);
  Model model = train(spec, table, "y");
  std::vector<std::size_t> background;
  for (std::size_t i = 0; i < 16; ++i) background.push_back(i);
  for (auto _ : state) {
    auto expl = shapley_exact(model, table, {20}, background);
    benchmark::DoNotOptimize(expl);
  }
}
BENCHMARK(BM_ShapleyExact)->DenseRange(4, 10, 2);

}  // namespace

int main(int argc, char** argv) {
  ::benchmark::Initialize(&argc, argv);
  if (::benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  ::benchmark::RunSpecifiedBenchmarks();
  return 0;
}
