#include <benchmark/benchmark.h>

#include <map>
#include <numeric>

#include "multisom/ingest.hpp"
#include "multisom/intermap.hpp"
#include "multisom/som.hpp"

namespace {

using namespace multisom;

struct Pair {
  Dataset data;
  SomMap a, b;
  Projection pa, pb;
};

// Two partially coupled views trained on square grids of the given side.
const Pair& pair(int side) {
  static std::map<int, Pair> cache;
  auto it = cache.find(side);
  if (it != cache.end()) return it->second;
  SyntheticSpec spec;
  spec.item_count = 400;
  spec.group_count = 6;
  spec.coupling = 0.7;
  spec.seed = 5;
  spec.viewpoints = {{"a", 60, 0, 4, 1, 1.0, 1}, {"b", 48, 0, 3, 3, 0.9, 1}};
  Pair p;
  p.data = generate_synthetic(spec);
  const TrainingParams params = ScheduleSpec{}.for_grid(side, side);
  p.a = train_som(p.data.viewpoints[0], side, side, params, 1);
  p.b = train_som(p.data.viewpoints[1], side, side, params, 2);
  p.pa = project_data(p.a, p.data.viewpoints[0]);
  p.pb = project_data(p.b, p.data.viewpoints[1]);
  return cache.emplace(side, std::move(p)).first->second;
}

void BM_Propagate(benchmark::State& state) {
  const Pair& p = pair(static_cast<int>(state.range(0)));
  std::vector<NodeIndex> nodes(static_cast<std::size_t>(p.a.node_count() / 4));
  std::iota(nodes.begin(), nodes.end(), 0);
  const Activation act = activate(p.a, nodes);
  for (auto _ : state) benchmark::DoNotOptimize(propagate(act, p.pa, p.pb));
}
BENCHMARK(BM_Propagate)->Arg(6)->Arg(12)->Unit(benchmark::kMicrosecond);

void BM_PropagationConsistency(benchmark::State& state) {
  const Pair& p = pair(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(propagation_consistency(p.a, p.pa, p.b, p.pb));
}
BENCHMARK(BM_PropagationConsistency)->Arg(6)->Arg(12)->Arg(20)->Unit(benchmark::kMicrosecond);

void BM_Dispersion(benchmark::State& state) {
  std::vector<GridCoord> pts;
  for (int k = 0; k < state.range(0); ++k) pts.push_back({k % 17, k / 17});
  for (auto _ : state) benchmark::DoNotOptimize(dispersion(pts));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Dispersion)->RangeMultiplier(4)->Range(4, 256)->Complexity(benchmark::oNSquared);

}  // namespace
BENCHMARK_MAIN();
