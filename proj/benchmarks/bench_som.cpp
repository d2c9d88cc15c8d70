#include <benchmark/benchmark.h>

#include "multisom/ingest.hpp"
#include "multisom/quality.hpp"
#include "multisom/som.hpp"

namespace {

using namespace multisom;

ViewpointMatrix matrix(int items, int features, int groups) {
  SyntheticSpec spec;
  spec.item_count = items;
  spec.group_count = groups;
  spec.seed = 11;
  spec.viewpoints = {{"v", features, 0, 3, 3, 1.0, 1}};
  return generate_synthetic(spec).viewpoints.front();
}

void BM_TrainSquare(benchmark::State& state) {
  const auto side = static_cast<int>(state.range(0));
  const ViewpointMatrix m = matrix(200, 30, 5);
  const TrainingParams p = ScheduleSpec{}.for_grid(side, side);
  for (auto _ : state) benchmark::DoNotOptimize(train_som(m, side, side, p, 3));
  state.SetLabel(std::to_string(side) + "x" + std::to_string(side));
}
BENCHMARK(BM_TrainSquare)->Arg(3)->Arg(6)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_BestMatchingUnit(benchmark::State& state) {
  const auto dim = static_cast<int>(state.range(0));
  const ViewpointMatrix m = matrix(400, dim, 8);
  const SomMap map = train_som(m, 10, 10, ScheduleSpec{}.for_grid(10, 10), 1);
  std::size_t i = 0;
  std::vector<const SparseVector*> rows;
  for (const auto& [id, row] : m.rows) rows.push_back(&row);
  for (auto _ : state) {
    benchmark::DoNotOptimize(best_matching_unit(map, *rows[i]));
    i = (i + 1) % rows.size();
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_BestMatchingUnit)->Arg(32)->Arg(256)->Arg(2048);

void BM_ProjectData(benchmark::State& state) {
  const ViewpointMatrix m = matrix(400, 96, 8);
  const SomMap map = train_som(m, 8, 8, ScheduleSpec{}.for_grid(8, 8), 1);
  for (auto _ : state) benchmark::DoNotOptimize(project_data(map, m));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(m.row_count()));
}
BENCHMARK(BM_ProjectData)->Unit(benchmark::kMicrosecond);

void BM_ScanSizes(benchmark::State& state) {
  const ViewpointMatrix m = matrix(200, 30, 5);
  for (auto _ : state) benchmark::DoNotOptimize(scan_map_sizes(m, 3, static_cast<int>(state.range(0)), ScheduleSpec{}, 0, 1));
}
BENCHMARK(BM_ScanSizes)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

}  // namespace
