#pragma once

#include <optional>
#include <string>
#include <vector>

#include "multisom/som.hpp"
#include "multisom/viewpoint.hpp"

namespace multisom {

/// Per-node label; nullopt marks an empty node.
using NodeLabels = std::vector<std::optional<std::string>>;

/// Connected group of same-labelled nodes (4-neighbourhood).
struct InformationArea {
  int area_id = 0;
  std::vector<NodeIndex> nodes;  // ascending
  std::string label;
  std::vector<std::string> members;  // ascending item ids

  bool operator==(const InformationArea&) const = default;
};

struct FeatureScore {
  std::string feature;
  double weight = 0.0;
  bool operator==(const FeatureScore&) const = default;
};

/// Features of a node ranked by summed member weight (descending, then by name).
std::vector<FeatureScore> node_feature_ranking(const Projection& proj, const ViewpointMatrix& matrix,
                                               NodeIndex node);

/// Feature with the largest summed member weight; ties go to the smallest name.
std::optional<std::string> dominant_label(const SomMap& map, const Projection& proj,
                                          const ViewpointMatrix& matrix, NodeIndex node);

/// dominant_label for every node of the map.
NodeLabels label_nodes(const SomMap& map, const Projection& proj, const ViewpointMatrix& matrix);

/// Connected components of same-labelled nodes. Area ids follow the smallest
/// node index in each area. Unlabelled nodes belong to no area.
std::vector<InformationArea> zone_map(const GridShape& grid, const NodeLabels& labels);

/// As above, with member item ids filled in from the projection.
std::vector<InformationArea> zone_map(const SomMap& map, const NodeLabels& labels,
                                      const Projection& proj);

}  // namespace multisom
