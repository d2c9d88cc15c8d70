#include <gtest/gtest.h>

#include <numeric>

#include "multisom/error.hpp"
#include "multisom/intermap.hpp"
#include "oracles.hpp"

using namespace multisom;

namespace {

SomMap blank_map(const std::string& id, int w, int h) {
  return SomMap(id, {w, h}, 1, ScheduleSpec{}.for_grid(w, h), 0, std::vector<double>(std::size_t(w * h), 1.0));
}

Projection manual(const std::string& id, int nodes, std::map<std::string, Assignment> items) {
  Projection p;
  p.map_id = id;
  p.node_count = nodes;
  p.items = std::move(items);
  return p;
}

Projection scaled(Projection p, double c) {
  for (auto& [id, a] : p.items) a.similarity *= c;
  return p;
}

struct Pair {
  fixture::SmallInstance s;
  fixture::SmallInstance t;
};

Pair random_pair(Rng& rng, int max_items) {
  const int items = 1 + int(rng.index(std::uint64_t(max_items)));
  Pair p{fixture::random_instance(rng, "src", 1 + int(rng.index(3)), 1 + int(rng.index(3)), items, 2 + rng.index(6)),
         fixture::random_instance(rng, "tgt", 1 + int(rng.index(3)), 1 + int(rng.index(3)), items, 2 + rng.index(6))};
  // Drop a few items from the target so the universes only partly overlap.
  for (auto it = p.t.projection.items.begin(); it != p.t.projection.items.end();) {
    it = rng.uniform() < 0.15 ? p.t.projection.items.erase(it) : std::next(it);
  }
  return p;
}

}  // namespace

TEST(Activation, NormalisesAndValidates) {
  const SomMap map = blank_map("m", 3, 3);
  const std::vector<NodeIndex> nodes = {4, 1, 4};
  const Activation a = activate(map, nodes, "ev");
  EXPECT_EQ(a.nodes, (std::vector<NodeIndex>{1, 4}));
  EXPECT_EQ(a.source_map_id, "m");
  EXPECT_EQ(a.modality, Modality::active);
  EXPECT_EQ(a.evidence_id, "ev");
  EXPECT_THROW(activate(map, std::vector<NodeIndex>{}), Error);
  EXPECT_THROW(activate(map, std::vector<NodeIndex>{9}), Error);
  EXPECT_THROW(activate(map, std::vector<NodeIndex>{-1}), Error);
  InformationArea area;
  area.nodes = {0, 3};
  EXPECT_EQ(activate(map, area).nodes, area.nodes);
  EXPECT_EQ(modality_from_string(to_string(Modality::inactive)), Modality::inactive);
  EXPECT_THROW(modality_from_string("maybe"), Error);
}

TEST(Posterior, HandExample) {
  const Projection src = manual("s", 2, {{"a", {0, 0.5}}, {"b", {0, 1.0}}, {"c", {1, 0.5}}, {"x", {1, 1.0}}});
  const Projection tgt = manual("t", 2, {{"a", {0, 0.9}}, {"b", {1, 0.9}}, {"c", {0, 0.9}}, {"y", {0, 0.2}}});
  const Activation act{"s", {0}, Modality::active, {}};
  // target node 0 holds a (activated, 0.5) and c (not, 0.5); y is absent from the source
  EXPECT_DOUBLE_EQ(node_posterior(0, act, src, tgt), 0.5);
  EXPECT_DOUBLE_EQ(node_posterior(1, act, src, tgt), 1.0);
  Activation inactive = act;
  inactive.modality = Modality::inactive;
  EXPECT_DOUBLE_EQ(node_posterior(0, inactive, src, tgt), 0.5);
  EXPECT_THROW(node_posterior(2, act, src, tgt), Error);

  const PropagationResult r = propagate(act, src, tgt);
  EXPECT_EQ(r.carriers, (std::vector<std::string>{"a", "b"}));
  EXPECT_DOUBLE_EQ(r.node_activity.at(0), 0.5 / 1.5);
  EXPECT_DOUBLE_EQ(r.node_activity.at(1), 1.0 / 1.5);
  EXPECT_EQ(r.activated_targets, (std::vector<NodeIndex>{0, 1}));
  EXPECT_DOUBLE_EQ(r.posterior.at(0), 0.5);
  EXPECT_FALSE(r.no_carriers);
  EXPECT_FALSE(r.count_weighted);
}

TEST(Posterior, ZeroMassNodeReportsZero) {
  const Projection src = manual("s", 2, {{"a", {0, 0.0}}, {"b", {1, 1.0}}});
  const Projection tgt = manual("t", 2, {{"a", {1, 1.0}}, {"b", {0, 1.0}}});
  const Activation act{"s", {0}, Modality::active, {}};
  bool zero = false;
  EXPECT_EQ(node_posterior(1, act, src, tgt, &zero), 0.0);
  EXPECT_TRUE(zero);
  const PropagationResult r = propagate(act, src, tgt);
  EXPECT_EQ(r.zero_mass_nodes, std::vector<NodeIndex>{1});
  // the only carrier has similarity 0: activity falls back to counts
  EXPECT_TRUE(r.count_weighted);
  EXPECT_DOUBLE_EQ(r.node_activity.at(1), 1.0);
}

// Every subset of source nodes, both modalities, every target node.
TEST(PosteriorProperty, ExhaustiveOracle) {
  Rng rng(2024);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const Pair p = random_pair(rng, 20);
    const int n = p.s.map.node_count();
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
      std::vector<NodeIndex> nodes;
      for (int k = 0; k < n; ++k) {
        if (mask & (1u << k)) nodes.push_back(k);
      }
      for (Modality mod : {Modality::active, Modality::inactive}) {
        Activation act = activate(p.s.map, nodes);
        act.modality = mod;
        for (NodeIndex t = 0; t < p.t.map.node_count(); ++t) {
          const double got = node_posterior(t, act, p.s.projection, p.t.projection);
          EXPECT_NEAR(got, oracle::posterior(t, act, p.s.projection, p.t.projection), 1e-12);
          ++checked;
        }
      }
    }
  }
  EXPECT_GT(checked, 1000);
}

TEST(ActivityProperty, SumsToOneAndIgnoresScaling) {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const Pair p = random_pair(rng, 30);
    std::vector<NodeIndex> nodes;
    for (NodeIndex k = 0; k < p.s.map.node_count(); ++k) {
      if (rng.uniform() < 0.5) nodes.push_back(k);
    }
    if (nodes.empty()) nodes.push_back(0);
    const Activation act = activate(p.s.map, nodes);
    const PropagationResult r = propagate(act, p.s.projection, p.t.projection);
    if (r.no_carriers) {
      EXPECT_TRUE(r.node_activity.empty());
      continue;
    }
    double sum = 0.0;
    for (const auto& [k, a] : r.node_activity) sum += a;
    EXPECT_NEAR(sum, 1.0, 1e-9);
    const auto ref = oracle::activity(act.nodes, p.s.projection, p.t.projection);
    ASSERT_EQ(r.node_activity.size(), ref.size());
    for (const auto& [k, a] : ref) EXPECT_NEAR(r.node_activity.at(k), a, 1e-12);
    for (double c : {0.5, 2.0, 10.0}) {
      const PropagationResult rs = propagate(act, scaled(p.s.projection, c), p.t.projection);
      for (const auto& [k, a] : r.node_activity) EXPECT_NEAR(rs.node_activity.at(k), a, 1e-12);
      EXPECT_EQ(rs.activated_targets, r.activated_targets);
    }
  }
}

TEST(Propagate, RejectsForeignActivationAndDisjointUniverse) {
  const Projection src = manual("s", 2, {{"a", {0, 1.0}}});
  const Projection other = manual("t", 2, {{"z", {0, 1.0}}});
  EXPECT_THROW(propagate({"s", {0}, Modality::active, {}}, src, other), Error);
  EXPECT_THROW(propagate({"q", {0}, Modality::active, {}}, src, src), Error);
  EXPECT_THROW(propagate({"s", {5}, Modality::active, {}}, src, src), Error);
  const PropagationResult empty = propagate({"s", {1}, Modality::active, {}}, src, src);
  EXPECT_TRUE(empty.no_carriers);
  EXPECT_TRUE(empty.activated_targets.empty());
}

TEST(Dispersion, HandValues) {
  const std::vector<GridCoord> two = {{0, 0}, {3, 4}};
  EXPECT_DOUBLE_EQ(dispersion(two), 5.0);
  const std::vector<GridCoord> tri = {{0, 0}, {1, 0}, {0, 1}};
  EXPECT_NEAR(dispersion(tri), 1.13807, 1e-5);
  EXPECT_NEAR(dispersion(tri), (2.0 + std::sqrt(2.0)) / 3.0, 1e-15);
  EXPECT_EQ(dispersion(std::vector<GridCoord>{{4, 2}}), 0.0);
  EXPECT_THROW(dispersion(std::vector<GridCoord>{}), Error);
}

TEST(DispersionProperty, OraclePermutationTranslation) {
  Rng rng(8);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<GridCoord> pts(1 + rng.index(15));
    for (auto& c : pts) c = {int(rng.index(20)), int(rng.index(20))};
    const double d = dispersion(pts);
    EXPECT_NEAR(d, oracle::dispersion(pts), 1e-12);
    EXPECT_GE(d, 0.0);
    auto shuffled = pts;
    rng.shuffle(shuffled);
    EXPECT_NEAR(dispersion(shuffled), d, 1e-12);
    const int da = int(rng.index(50)) - 25, db = int(rng.index(50)) - 25;
    for (auto& c : shuffled) c = {c.a + da, c.b + db};
    EXPECT_NEAR(dispersion(shuffled), d, 1e-12);
  }
}

TEST(Consistency, HandExample) {
  const SomMap s = blank_map("s", 3, 1);
  const SomMap t = blank_map("t", 3, 1);
  // source node 0 lands on one target node; node 1 splits evenly over two nodes 2 apart;
  // node 2 has a member the target does not know.
  const Projection sp = manual("s", 3, {{"a", {0, 1.0}}, {"b", {0, 1.0}}, {"c", {1, 0.5}}, {"d", {1, 0.5}}, {"e", {2, 1.0}}});
  const Projection tp = manual("t", 3, {{"a", {1, 1.0}}, {"b", {1, 1.0}}, {"c", {0, 1.0}}, {"d", {2, 1.0}}});
  const ConsistencyReport r = propagation_consistency(s, sp, t, tp);
  EXPECT_EQ(r.counted_sources, (std::vector<NodeIndex>{0, 1}));
  EXPECT_EQ(r.excluded_sources, std::vector<NodeIndex>{2});
  EXPECT_DOUBLE_EQ(r.per_source.at(0).term, 1.0);
  EXPECT_DOUBLE_EQ(r.per_source.at(1).dispersion, 2.0);
  EXPECT_DOUBLE_EQ(r.per_source.at(1).term, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.pc, 2.0 / 3.0);
  EXPECT_THROW(propagation_consistency(s, sp, t, manual("t", 3, {{"q", {0, 1.0}}})), Error);
  EXPECT_THROW(propagation_consistency(s, tp, t, tp), Error);
}

TEST(ConsistencyProperty, DiagonalRangeAndOracle) {
  Rng rng(404);
  for (int trial = 0; trial < 150; ++trial) {
    const Pair p = random_pair(rng, 25);
    const double self = propagation_consistency(p.s.map, p.s.projection, p.s.map, p.s.projection).pc;
    EXPECT_NEAR(self, 1.0, 1e-9);
    ConsistencyReport r;
    try {
      r = propagation_consistency(p.s.map, p.s.projection, p.t.map, p.t.projection);
    } catch (const Error&) {
      continue;  // every shared item was dropped
    }
    EXPECT_GT(r.pc, 0.0);
    EXPECT_LE(r.pc, 1.0);
    EXPECT_NEAR(r.pc, oracle::pc(p.s.map, p.s.projection, p.t.map, p.t.projection), 1e-12);
    for (const auto& [k, d] : r.per_source) {
      EXPECT_NEAR(d.activity_sum, 1.0, 1e-9);
      EXPECT_GE(d.dispersion, 0.0);
    }
  }
}

TEST(ConsistencyMatrix, DiagonalOneAndThreadIndependent) {
  const Dataset ds = fixture::desk(12, 0.6);
  std::vector<SomMap> maps;
  std::vector<Projection> projs;
  for (const auto& vp : ds.viewpoints) {
    maps.push_back(train_som(vp, 4, 4, ScheduleSpec{}.for_grid(4, 4), 1));
    projs.push_back(project_data(maps.back(), vp));
  }
  std::vector<MapView> views;
  for (std::size_t i = 0; i < maps.size(); ++i) views.push_back({&maps[i], &projs[i]});
  const ConsistencyMatrix a = consistency_matrix(views, 1);
  const ConsistencyMatrix b = consistency_matrix(views, 3);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.viewpoint_ids, (std::vector<std::string>{"alpha", "beta"}));
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_NEAR(a.values[i][i], 1.0, 1e-9);
    for (std::size_t j = 0; j < 2; ++j) {
      EXPECT_GT(a.values[i][j], 0.0);
      EXPECT_LE(a.values[i][j], 1.0);
    }
  }
  EXPECT_THROW(consistency_matrix(std::span<const MapView>(views.data(), 1)), Error);
  const std::string table = consistency_to_table(a);
  EXPECT_EQ(table.substr(0, table.find('\n')), "source\\target,alpha,beta");
}

class ChainTest : public ::testing::Test {
 protected:
  void SetUp() override {
    s = blank_map("s", 2, 2);
    t = blank_map("t", 3, 1);
    sp = manual("s", 4, {{"a", {0, 1.0}}, {"b", {0, 1.0}}, {"c", {3, 1.0}}, {"d", {1, 1.0}}});
    tp = manual("t", 3, {{"a", {2, 1.0}}, {"b", {2, 1.0}}, {"c", {0, 1.0}}, {"d", {1, 1.0}}});
    lookup = [this](const std::string& id) -> std::optional<MapView> {
      if (id == "s") return MapView{&s, &sp};
      if (id == "t") return MapView{&t, &tp};
      return std::nullopt;
    };
  }
  SomMap s, t;
  Projection sp, tp;
  MapLookup lookup;
};

TEST_F(ChainTest, BackwardStepReturnsToSource) {
  const std::vector<ChainStep> steps = {{"s", {0}, "t"}, {"t", {}, "s"}};
  const auto r = chain_propagation(steps, lookup);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(focus_nodes(r[0], kDefaultFocusThreshold), std::vector<NodeIndex>{2});
  EXPECT_EQ(r[1].activated_targets, std::vector<NodeIndex>{0});
  EXPECT_DOUBLE_EQ(r[1].node_activity.at(0), 1.0);
}

TEST_F(ChainTest, FocusThreshold) {
  const std::vector<ChainStep> steps = {{"s", {0, 1, 3}, "t"}};
  const auto r = chain_propagation(steps, lookup);
  EXPECT_EQ(focus_nodes(r[0], 0.25), (std::vector<NodeIndex>{0, 1, 2}));
  EXPECT_EQ(focus_nodes(r[0], 0.3), std::vector<NodeIndex>{2});
  EXPECT_TRUE(focus_nodes(r[0], 0.9).empty());
}

TEST_F(ChainTest, ErrorsNameTheStep) {
  auto message = [&](std::vector<ChainStep> steps, double theta = kDefaultFocusThreshold) -> std::string {
    try {
      chain_propagation(steps, lookup, theta);
    } catch (const Error& e) {
      return e.what();
    }
    return "";
  };
  EXPECT_NE(message({{"s", {}, "t"}}).find("chain step 1"), std::string::npos);
  EXPECT_NE(message({{"s", {0}, "nope"}}).find("unknown map"), std::string::npos);
  EXPECT_NE(message({{"s", {0}, "t"}, {"s", {}, "t"}}).find("chain step 2"), std::string::npos);
  EXPECT_NE(message({{"s", {0, 1, 3}, "t"}, {"t", {}, "s"}}, 0.9).find("empty focus"), std::string::npos);
  EXPECT_FALSE(message({{"s", {0}, "t"}}, 0.0).empty());
  EXPECT_FALSE(message({{"s", {0}, "t"}}, 1.5).empty());
  EXPECT_FALSE(message({}).empty());
}
