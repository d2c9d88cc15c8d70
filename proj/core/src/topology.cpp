#include "multisom/topology.hpp"

#include <algorithm>
#include <deque>

#include "multisom/error.hpp"

namespace multisom {

namespace {

std::map<FeatureIndex, double> node_mass(const Projection& proj, const ViewpointMatrix& matrix,
                                         NodeIndex node) {
  std::map<FeatureIndex, double> mass;
  for (const auto& [id, a] : proj.items) {
    if (a.node != node) continue;
    auto it = matrix.rows.find(id);
    if (it == matrix.rows.end()) throw Error("projected item '" + id + "' is not a row of the viewpoint");
    for (const auto& e : it->second.entries()) mass[e.index] += e.weight;
  }
  return mass;
}

}  // namespace

std::vector<FeatureScore> node_feature_ranking(const Projection& proj, const ViewpointMatrix& matrix,
                                               NodeIndex node) {
  std::vector<FeatureScore> ranking;
  for (const auto& [f, w] : node_mass(proj, matrix, node)) {
    if (w > 0.0) ranking.push_back({matrix.feature_names.at(f), w});
  }
  std::stable_sort(ranking.begin(), ranking.end(),
                   [](const FeatureScore& x, const FeatureScore& y) { return x.weight > y.weight; });
  return ranking;
}

std::optional<std::string> dominant_label(const SomMap& map, const Projection& proj,
                                          const ViewpointMatrix& matrix, NodeIndex node) {
  if (!map.grid().contains(node)) throw Error("node index out of range");
  std::optional<FeatureIndex> best;
  double best_w = 0.0;
  // Feature names are sorted, so the first maximum is the smallest name.
  for (const auto& [f, w] : node_mass(proj, matrix, node)) {
    if (w > best_w) {
      best_w = w;
      best = f;
    }
  }
  if (!best) return std::nullopt;
  return matrix.feature_names.at(*best);
}

NodeLabels label_nodes(const SomMap& map, const Projection& proj, const ViewpointMatrix& matrix) {
  // One pass over the projection instead of one per node.
  std::vector<std::map<FeatureIndex, double>> mass(static_cast<std::size_t>(map.node_count()));
  for (const auto& [id, a] : proj.items) {
    if (!map.grid().contains(a.node)) throw Error("projection node out of range");
    auto it = matrix.rows.find(id);
    if (it == matrix.rows.end()) throw Error("projected item '" + id + "' is not a row of the viewpoint");
    for (const auto& e : it->second.entries()) mass[static_cast<std::size_t>(a.node)][e.index] += e.weight;
  }
  NodeLabels labels(mass.size());
  for (std::size_t k = 0; k < mass.size(); ++k) {
    double best_w = 0.0;
    for (const auto& [f, w] : mass[k]) {
      if (w > best_w) {
        best_w = w;
        labels[k] = matrix.feature_names.at(f);
      }
    }
  }
  return labels;
}

std::vector<InformationArea> zone_map(const GridShape& grid, const NodeLabels& labels) {
  if (labels.size() != static_cast<std::size_t>(grid.node_count())) {
    throw Error("label count does not match grid size");
  }
  std::vector<int> area_of(labels.size(), -1);
  std::vector<InformationArea> areas;

  for (NodeIndex start = 0; start < grid.node_count(); ++start) {
    if (!labels[static_cast<std::size_t>(start)] || area_of[static_cast<std::size_t>(start)] >= 0) continue;
    InformationArea area;
    area.area_id = static_cast<int>(areas.size());
    area.label = *labels[static_cast<std::size_t>(start)];

    std::deque<NodeIndex> frontier{start};
    area_of[static_cast<std::size_t>(start)] = area.area_id;
    while (!frontier.empty()) {
      const NodeIndex k = frontier.front();
      frontier.pop_front();
      area.nodes.push_back(k);
      const GridCoord c = grid.coord(k);
      const GridCoord neighbours[] = {{c.a - 1, c.b}, {c.a + 1, c.b}, {c.a, c.b - 1}, {c.a, c.b + 1}};
      for (const GridCoord n : neighbours) {
        if (n.a < 0 || n.b < 0 || n.a >= grid.width || n.b >= grid.height) continue;
        const auto idx = static_cast<std::size_t>(grid.index(n));
        if (area_of[idx] >= 0 || labels[idx] != area.label) continue;
        area_of[idx] = area.area_id;
        frontier.push_back(grid.index(n));
      }
    }
    std::sort(area.nodes.begin(), area.nodes.end());
    areas.push_back(std::move(area));
  }
  return areas;
}

std::vector<InformationArea> zone_map(const SomMap& map, const NodeLabels& labels, const Projection& proj) {
  auto areas = zone_map(map.grid(), labels);
  std::vector<int> area_of(static_cast<std::size_t>(map.node_count()), -1);
  for (const auto& area : areas) {
    for (NodeIndex k : area.nodes) area_of[static_cast<std::size_t>(k)] = area.area_id;
  }
  for (const auto& [id, a] : proj.items) {
    if (!map.grid().contains(a.node)) throw Error("projection node out of range");
    const int area = area_of[static_cast<std::size_t>(a.node)];
    if (area >= 0) areas[static_cast<std::size_t>(area)].members.push_back(id);
  }
  return areas;
}

}  // namespace multisom
