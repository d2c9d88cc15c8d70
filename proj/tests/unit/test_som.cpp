#include <gtest/gtest.h>

#include "multisom/error.hpp"
#include "multisom/som.hpp"
#include "oracles.hpp"

using namespace multisom;

TEST(GridShape, CoordinateRoundTrip) {
  for (int w = 1; w <= 7; ++w) {
    for (int h = 1; h <= 7; ++h) {
      const GridShape g{w, h};
      for (NodeIndex k = 0; k < g.node_count(); ++k) {
        const GridCoord c = g.coord(k);
        EXPECT_EQ(c.a, k % w);
        EXPECT_EQ(c.b, k / w);
        EXPECT_EQ(g.index(c), k);
      }
    }
  }
  EXPECT_DOUBLE_EQ((GridShape{4, 4}.squared_distance(0, 15)), 18.0);
}

TEST(Schedule, DefaultsExpandPerGrid) {
  const TrainingParams p = ScheduleSpec{}.for_grid(6, 4);
  EXPECT_EQ(p.ordering.iterations, 20 * 24);
  EXPECT_EQ(p.tuning.iterations, 50 * 24);
  EXPECT_DOUBLE_EQ(p.ordering.alpha_start, 0.5);
  EXPECT_DOUBLE_EQ(p.ordering.alpha_end, 0.05);
  EXPECT_DOUBLE_EQ(p.ordering.radius_start, 3.0);
  EXPECT_DOUBLE_EQ(p.ordering.radius_end, 1.0);
  EXPECT_DOUBLE_EQ(p.tuning.alpha_start, 0.05);
  EXPECT_DOUBLE_EQ(p.tuning.alpha_end, 0.01);
  EXPECT_DOUBLE_EQ(p.tuning.radius_start, 1.0);
  EXPECT_DOUBLE_EQ(p.tuning.radius_end, 0.0);
  EXPECT_NO_THROW(p.validate());
  // A 1x1 map would get radius 0.5 < 1; the start is lifted to the end radius.
  EXPECT_GE(ScheduleSpec{}.for_grid(1, 1).ordering.radius_start, 1.0);
}

TEST(Schedule, ValidationRejectsIncreasingRates) {
  TrainingParams p = ScheduleSpec{}.for_grid(3, 3);
  p.ordering.alpha_end = 0.9;
  EXPECT_THROW(p.validate(), Error);
  p = ScheduleSpec{}.for_grid(3, 3);
  p.tuning.radius_end = 5.0;
  EXPECT_THROW(p.validate(), Error);
}

TEST(SomMap, ConstructorChecksShape) {
  const TrainingParams p = ScheduleSpec{}.for_grid(2, 2);
  EXPECT_THROW(SomMap("v", {2, 2}, 3, p, 0, std::vector<double>(11, 0.0)), Error);
  std::vector<double> bad(12, 0.0);
  bad[5] = std::numeric_limits<double>::infinity();
  EXPECT_THROW(SomMap("v", {2, 2}, 3, p, 0, bad), Error);
  EXPECT_THROW(train_som(fixture::desk(0).viewpoints[0], 0, 3, p, 0), Error);
}

TEST(Bmu, LowestIndexWinsTies) {
  const TrainingParams p = ScheduleSpec{}.for_grid(3, 1);
  const SomMap map("v", {3, 1}, 2, p, 0, {0.0, 0.0, 1.0, 0.0, 1.0, 0.0});
  // nodes 1 and 2 hold the same codebook
  EXPECT_EQ(best_matching_unit(map, SparseVector({{0, 1.0}})), 1);
  EXPECT_EQ(best_matching_unit(map, SparseVector({{1, 1.0}})), 0);
}

TEST(BmuProperty, MatchesBruteForce) {
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const auto inst = fixture::random_instance(rng, "v", 1 + int(rng.index(6)), 1 + int(rng.index(6)), 6,
                                               1 + rng.index(12));
    for (const auto& [id, row] : inst.matrix.rows) {
      EXPECT_EQ(best_matching_unit(inst.map, row), oracle::bmu(inst.map, oracle::dense(row, inst.matrix.dimension())));
    }
  }
}

TEST(Projection, EveryRowAssignedWithCodebookCosine) {
  const Dataset ds = fixture::desk(1);
  const auto& m = ds.viewpoints[0];
  const SomMap map = train_som(m, 4, 4, ScheduleSpec{}.for_grid(4, 4), 3);
  const Projection p = project_data(map, m);
  ASSERT_EQ(p.items.size(), m.row_count());
  EXPECT_EQ(p.map_id, "alpha");
  EXPECT_EQ(p.node_count, 16);
  std::size_t members = 0;
  for (const auto& list : p.members()) {
    members += list.size();
    EXPECT_TRUE(std::is_sorted(list.begin(), list.end()));
  }
  EXPECT_EQ(members, m.row_count());
  for (const auto& [id, a] : p.items) {
    const auto& row = m.rows.at(id);
    EXPECT_EQ(a.node, best_matching_unit(map, row));
    const auto cb = map.codebook(a.node);
    EXPECT_NEAR(a.similarity, oracle::cosine(oracle::dense(row, m.dimension()), {cb.begin(), cb.end()}), 1e-12);
  }
  EXPECT_THROW(project_data(map, ds.viewpoints[1]), Error);
}

TEST(Training, DeterministicForSeed) {
  const Dataset ds = fixture::desk(2);
  const auto& m = ds.viewpoints[1];
  const auto p = ScheduleSpec{}.for_grid(5, 5);
  const SomMap a = train_som(m, 5, 5, p, 17);
  const SomMap b = train_som(m, 5, 5, p, 17);
  EXPECT_EQ(model_to_text(a), model_to_text(b));
  EXPECT_EQ(project_data(a, m), project_data(b, m));
  EXPECT_NE(model_to_text(a), model_to_text(train_som(m, 5, 5, p, 18)));
}

TEST(Training, ReducesQuantizationError) {
  const Dataset ds = fixture::desk(4);
  const auto& m = ds.viewpoints[0];
  const auto p = ScheduleSpec{}.for_grid(6, 6);
  const double before = quantization_error(initialize_som(m, 6, 6, p, 1), m);
  const double after = quantization_error(train_som(m, 6, 6, p, 1), m);
  EXPECT_LT(after, before);
}

TEST(Training, UnitNormRowsOption) {
  const Dataset ds = fixture::desk(4);
  ScheduleSpec spec;
  spec.unit_norm_rows = true;
  const SomMap map = train_som(ds.viewpoints[1], 3, 3, spec.for_grid(3, 3), 0);
  EXPECT_TRUE(map.params().unit_norm_rows);
  for (double c : map.codebooks()) EXPECT_LE(c, 1.0 + 1e-9);
}

TEST(ModelFile, RoundTripIsExact) {
  const Dataset ds = fixture::desk(5);
  const SomMap map = train_som(ds.viewpoints[0], 3, 4, ScheduleSpec{}.for_grid(3, 4), 8);
  const std::string text = model_to_text(map);
  const SomMap back = model_from_text(text);
  EXPECT_EQ(back, map);
  EXPECT_EQ(model_to_text(back), text);
  EXPECT_THROW(model_from_text("{\"format\":\"other\"}"), Error);
  EXPECT_THROW(model_from_text("not json"), ParseError);
}
