#include <gtest/gtest.h>

#include "multisom/error.hpp"
#include "multisom/topology.hpp"
#include "oracles.hpp"

using namespace multisom;

namespace {

NodeLabels random_labels(Rng& rng, const GridShape& g, int alphabet, double empty_rate) {
  NodeLabels labels(static_cast<std::size_t>(g.node_count()));
  for (auto& l : labels) {
    if (rng.uniform() >= empty_rate) l = std::string(1, static_cast<char>('a' + rng.index(alphabet)));
  }
  return labels;
}

bool connected(const InformationArea& area, const GridShape& g) {
  std::set<NodeIndex> inside(area.nodes.begin(), area.nodes.end());
  std::set<NodeIndex> reached{area.nodes.front()};
  std::vector<NodeIndex> stack{area.nodes.front()};
  while (!stack.empty()) {
    const GridCoord c = g.coord(stack.back());
    stack.pop_back();
    for (GridCoord n : {GridCoord{c.a + 1, c.b}, GridCoord{c.a - 1, c.b}, GridCoord{c.a, c.b + 1},
                        GridCoord{c.a, c.b - 1}}) {
      if (n.a < 0 || n.b < 0 || n.a >= g.width || n.b >= g.height) continue;
      const NodeIndex k = g.index(n);
      if (inside.count(k) && reached.insert(k).second) stack.push_back(k);
    }
  }
  return reached == inside;
}

}  // namespace

TEST(Labels, DominantFeatureTiesToSmallestName) {
  const ViewpointMatrix m = build_viewpoint_matrix(
      "v", std::vector<RawEntry>{{"a", "zeta", 2}, {"a", "beta", 1}, {"b", "beta", 1}, {"c", "gamma", 5}});
  const SomMap map("v", {3, 1}, 3, ScheduleSpec{}.for_grid(3, 1), 0, std::vector<double>(9, 0.0));
  Projection p;
  p.map_id = "v";
  p.node_count = 3;
  p.items = {{"a", {0, 1.0}}, {"b", {0, 1.0}}, {"c", {2, 1.0}}};
  EXPECT_EQ(dominant_label(map, p, m, 0), "beta");  // beta 2, zeta 2
  EXPECT_EQ(dominant_label(map, p, m, 1), std::nullopt);
  EXPECT_EQ(dominant_label(map, p, m, 2), "gamma");
  EXPECT_THROW(dominant_label(map, p, m, 3), Error);
  const auto ranking = node_feature_ranking(p, m, 0);
  ASSERT_EQ(ranking.size(), 2u);
  EXPECT_EQ(ranking[0].feature, "beta");
  EXPECT_EQ(ranking[1].feature, "zeta");
  EXPECT_DOUBLE_EQ(ranking[0].weight, 2.0);
  const NodeLabels all = label_nodes(map, p, m);
  EXPECT_EQ(all, (NodeLabels{"beta", std::nullopt, "gamma"}));
}

TEST(Zoning, CheckerboardGivesSingletons) {
  for (int w = 1; w <= 6; ++w) {
    for (int h = 1; h <= 6; ++h) {
      const GridShape g{w, h};
      NodeLabels labels;
      for (NodeIndex k = 0; k < g.node_count(); ++k) {
        const GridCoord c = g.coord(k);
        labels.push_back((c.a + c.b) % 2 ? "x" : "y");
      }
      EXPECT_EQ(zone_map(g, labels).size(), static_cast<std::size_t>(w * h));
    }
  }
}

TEST(Zoning, UniformLabelGivesOneArea) {
  const GridShape g{5, 3};
  const auto areas = zone_map(g, NodeLabels(15, std::string("x")));
  ASSERT_EQ(areas.size(), 1u);
  EXPECT_EQ(areas[0].nodes.size(), 15u);
  EXPECT_EQ(areas[0].label, "x");
  EXPECT_TRUE(zone_map(g, NodeLabels(15)).empty());
  EXPECT_THROW(zone_map(g, NodeLabels(14)), Error);
}

TEST(Zoning, DiagonalsDoNotConnect) {
  const GridShape g{2, 2};
  const auto areas = zone_map(g, NodeLabels{"x", "y", "y", "x"});
  EXPECT_EQ(areas.size(), 4u);
}

TEST(ZoningProperty, MatchesFloodFillOracle) {
  Rng rng(77);
  for (int trial = 0; trial < 300; ++trial) {
    const GridShape g{1 + int(rng.index(12)), 1 + int(rng.index(12))};
    const NodeLabels labels = random_labels(rng, g, 1 + int(rng.index(4)), 0.2 * rng.uniform());
    const auto areas = zone_map(g, labels);
    EXPECT_EQ(oracle::as_sets(areas), oracle::zones(g, labels));

    std::set<NodeIndex> covered;
    int previous_first = -1;
    for (std::size_t i = 0; i < areas.size(); ++i) {
      const auto& a = areas[i];
      EXPECT_EQ(a.area_id, static_cast<int>(i));
      EXPECT_GT(a.nodes.front(), previous_first);  // ids follow the smallest node
      previous_first = a.nodes.front();
      EXPECT_TRUE(std::is_sorted(a.nodes.begin(), a.nodes.end()));
      EXPECT_TRUE(connected(a, g));
      for (NodeIndex k : a.nodes) {
        EXPECT_EQ(labels[k], a.label);
        EXPECT_TRUE(covered.insert(k).second);
      }
    }
    std::size_t labelled = 0;
    for (const auto& l : labels) labelled += l.has_value();
    EXPECT_EQ(covered.size(), labelled);
  }
}

TEST(Zoning, MembersComeFromProjection) {
  const Dataset ds = fixture::desk(8);
  const auto& m = ds.viewpoints[0];
  const SomMap map = train_som(m, 4, 4, ScheduleSpec{}.for_grid(4, 4), 0);
  const Projection p = project_data(map, m);
  const auto areas = zone_map(map, label_nodes(map, p, m), p);
  std::size_t members = 0;
  for (const auto& a : areas) {
    members += a.members.size();
    EXPECT_TRUE(std::is_sorted(a.members.begin(), a.members.end()));
    for (const auto& id : a.members) {
      EXPECT_TRUE(std::binary_search(a.nodes.begin(), a.nodes.end(), p.items.at(id).node));
    }
  }
  EXPECT_EQ(members, m.row_count());
}
