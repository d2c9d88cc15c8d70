#include <gtest/gtest.h>

#include "multisom/error.hpp"
#include "multisom/quality.hpp"
#include "oracles.hpp"

using namespace multisom;

namespace {

// Three items on a two-node map; every quantity is small enough to work out by hand.
struct TinyMap {
  ViewpointMatrix matrix = build_viewpoint_matrix(
      "v", std::vector<RawEntry>{{"i1", "f0", 1}, {"i2", "f0", 1}, {"i2", "f1", 1}, {"i3", "f1", 2}});
  SomMap map{"v", {2, 1}, 2, ScheduleSpec{}.for_grid(2, 1), 0, {1.0, 0.0, 0.0, 1.0}};
  Projection proj = project_data(map, matrix);
};

}  // namespace

TEST(FMeasure, Identities) {
  EXPECT_EQ(f_measure(1.0, 0.0), 0.0);
  EXPECT_EQ(f_measure(0.0, 1.0), 0.0);
  EXPECT_EQ(f_measure(0.0, 0.0), 0.0);
  EXPECT_EQ(f_measure(1.0, 1.0), 1.0);
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double x = rng.uniform();
    const double y = rng.uniform();
    EXPECT_EQ(f_measure(x, x), x);
    EXPECT_EQ(f_measure(x, y), f_measure(y, x));
    EXPECT_NEAR(f_measure(x, y), oracle::harmonic(x, y), 1e-15);
    EXPECT_LE(f_measure(x, y), std::max(x, y));
    EXPECT_GE(f_measure(x, y), std::min(x, y));
  }
  EXPECT_THROW(f_measure(1.5, 0.2), Error);
  EXPECT_THROW(f_measure(0.2, -0.1), Error);
}

TEST(Quality, HandComputedTinyMap) {
  TinyMap t;
  ASSERT_EQ(t.proj.items.at("i1").node, 0);
  ASSERT_EQ(t.proj.items.at("i2").node, 0);  // equidistant; lower index wins
  ASSERT_EQ(t.proj.items.at("i3").node, 1);
  const auto peculiar = peculiar_features(t.map, t.matrix, t.proj);
  EXPECT_EQ(peculiar.at(0), std::vector<FeatureIndex>{0});
  EXPECT_EQ(peculiar.at(1), std::vector<FeatureIndex>{1});
  const QualityReport q = map_recall_precision(t.map, t.matrix, t.proj);
  EXPECT_DOUBLE_EQ(q.clusters.at(0).recall, 1.0);
  EXPECT_DOUBLE_EQ(q.clusters.at(0).precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(q.clusters.at(1).recall, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(q.clusters.at(1).precision, 1.0);
  EXPECT_DOUBLE_EQ(q.recall, 5.0 / 6.0);
  EXPECT_DOUBLE_EQ(q.precision, 5.0 / 6.0);
  EXPECT_DOUBLE_EQ(q.f_measure, 5.0 / 6.0);
}

TEST(Quality, SingleClusterOwnsEverything) {
  const ViewpointMatrix m = build_viewpoint_matrix("v", std::vector<RawEntry>{{"a", "x", 1}, {"b", "y", 3}});
  const SomMap map("v", {1, 1}, 2, ScheduleSpec{}.for_grid(1, 1), 0, {0.5, 0.5});
  const QualityReport q = map_recall_precision(map, m, project_data(map, m));
  // One cluster holds both features: recall is full, precision is the mean
  // share of each peculiar feature in the cluster mass, (1/4 + 3/4) / 2.
  EXPECT_EQ(q.recall, 1.0);
  EXPECT_DOUBLE_EQ(q.precision, 0.5);
  EXPECT_DOUBLE_EQ(q.f_measure, 2.0 / 3.0);
}

// Library recall/precision recomputed from dense feature-mass tables.
TEST(QualityProperty, AgreesWithMassOracle) {
  Rng rng(21);
  for (int trial = 0; trial < 60; ++trial) {
    const auto inst = fixture::random_instance(rng, "v", 1 + int(rng.index(4)), 1 + int(rng.index(4)),
                                               5 + int(rng.index(20)), 2 + rng.index(10));
    const auto& m = inst.matrix;
    const std::size_t dim = m.dimension();
    const int nodes = inst.map.node_count();
    std::vector<std::vector<double>> mass(nodes, std::vector<double>(dim, 0.0));
    for (const auto& [id, a] : inst.projection.items) {
      const auto d = oracle::dense(m.rows.at(id), dim);
      for (std::size_t f = 0; f < dim; ++f) mass[a.node][f] += d[f];
    }
    // Feature recall sums to one over clusters for every feature with mass.
    for (std::size_t f = 0; f < dim; ++f) {
      double total = 0, fr = 0;
      for (int c = 0; c < nodes; ++c) total += mass[c][f];
      if (total == 0) continue;
      for (int c = 0; c < nodes; ++c) fr += mass[c][f] / total;
      EXPECT_NEAR(fr, 1.0, 1e-9);
    }
    const QualityReport q = map_recall_precision(inst.map, m, inst.projection);
    double rsum = 0, psum = 0;
    for (const auto& [c, cq] : q.clusters) {
      double r = 0, p = 0, ctot = 0;
      for (double w : mass[c]) ctot += w;
      for (FeatureIndex f : cq.peculiar) {
        double ftot = 0, best = 0;
        for (int k = 0; k < nodes; ++k) {
          ftot += mass[k][f];
          best = std::max(best, mass[k][f]);
        }
        EXPECT_EQ(mass[c][f], best);
        r += mass[c][f] / ftot;
        p += mass[c][f] / ctot;
      }
      EXPECT_NEAR(cq.recall, r / double(cq.peculiar.size()), 1e-12);
      EXPECT_NEAR(cq.precision, p / double(cq.peculiar.size()), 1e-12);
      rsum += cq.recall;
      psum += cq.precision;
    }
    EXPECT_NEAR(q.recall, rsum / double(q.clusters.size()), 1e-12);
    EXPECT_NEAR(q.precision, psum / double(q.clusters.size()), 1e-12);
    for (double v : {q.recall, q.precision, q.f_measure}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(ChooseSide, ArgmaxWithSmallerSideOnTies) {
  auto entry = [](int side, double f, bool degenerate = false) {
    ScanEntry e;
    e.side = side;
    e.degenerate = degenerate;
    e.quality.f_measure = f;
    return e;
  };
  EXPECT_EQ(choose_side({entry(3, 0.4), entry(4, 0.7), entry(5, 0.6)}), 4);
  EXPECT_EQ(choose_side({entry(3, 0.7), entry(4, 0.7)}), 3);
  EXPECT_EQ(choose_side({entry(4, 0.7), entry(3, 0.7)}), 3);
  EXPECT_EQ(choose_side({entry(3, 0.9, true), entry(4, 0.2)}), 4);
  EXPECT_THROW(choose_side({entry(3, 0.9, true)}), Error);
  EXPECT_THROW(choose_side({}), Error);
}

TEST(Scan, EntriesAscendAndChoiceIsArgmax) {
  const Dataset ds = fixture::desk(3);
  const ScanResult r = scan_map_sizes(ds.viewpoints[0], 2, 6, ScheduleSpec{}, 5, 1);
  ASSERT_EQ(r.entries.size(), 5u);
  double best = -1;
  int best_side = 0;
  for (std::size_t i = 0; i < r.entries.size(); ++i) {
    EXPECT_EQ(r.entries[i].side, 2 + int(i));
    if (!r.entries[i].degenerate && r.entries[i].quality.f_measure > best) {
      best = r.entries[i].quality.f_measure;
      best_side = r.entries[i].side;
    }
  }
  EXPECT_EQ(r.chosen_side, best_side);
  EXPECT_THROW(scan_map_sizes(ds.viewpoints[0], 5, 4, ScheduleSpec{}, 0), Error);
}

TEST(Scan, ThreadCountDoesNotChangeResults) {
  const Dataset ds = fixture::desk(6);
  const ScanResult a = scan_map_sizes(ds.viewpoints[1], 3, 6, ScheduleSpec{}, 2, 1);
  const ScanResult b = scan_map_sizes(ds.viewpoints[1], 3, 6, ScheduleSpec{}, 2, 4);
  EXPECT_EQ(a, b);
  EXPECT_EQ(scan_to_table(a), scan_to_table(b));
}

TEST(Scan, TableLayout) {
  const Dataset ds = fixture::desk(6);
  const ScanResult r = scan_map_sizes(ds.viewpoints[0], 3, 4, ScheduleSpec{}, 2, 1);
  const std::string table = scan_to_table(r);
  EXPECT_EQ(table.substr(0, table.find('\n')), "side,nodes,clusters,recall,precision,f_measure,quantization_error,chosen");
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 3);
  EXPECT_NE(scan_to_table(r, '\t').find("side\tnodes"), std::string::npos);
}
