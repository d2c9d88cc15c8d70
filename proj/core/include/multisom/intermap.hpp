#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "multisom/som.hpp"
#include "multisom/topology.hpp"

namespace multisom {

// Inter-map communication. Data items projected on two maps act as activity
// transmitters: activating nodes of a source map marks their member items, and
// each target node inherits activity from the marked items it holds, weighted by
// Sim(d, S_d), the cosine between the item and its source-node codebook.

enum class Modality { active, inactive };

std::string to_string(Modality m);
Modality modality_from_string(const std::string& s);

struct Activation {
  std::string source_map_id;
  std::vector<NodeIndex> nodes;  // ascending, unique, non-empty
  Modality modality = Modality::active;
  std::string evidence_id;

  bool operator==(const Activation&) const = default;
};

/// Activation of explicit source nodes. Throws on an empty or out-of-range selection.
Activation activate(const SomMap& source, std::span<const NodeIndex> nodes, std::string evidence_id = {});

/// Activation of every node of an information area.
Activation activate(const SomMap& source, const InformationArea& area, std::string evidence_id = {});

struct PropagationResult {
  std::string source_map_id;
  std::string target_map_id;
  /// Carrier similarity mass per target node over total carrier mass.
  std::map<NodeIndex, double> node_activity;
  /// P(act_m | T_k, Q) for every target node holding at least one source-projected item.
  std::map<NodeIndex, double> posterior;
  /// Target nodes whose posterior denominator was zero (posterior reported as 0).
  std::vector<NodeIndex> zero_mass_nodes;
  std::vector<NodeIndex> activated_targets;  // node_activity > 0, ascending
  std::vector<std::string> carriers;          // ascending item ids
  bool no_carriers = false;
  /// True when every carrier had zero similarity and activity fell back to carrier counts.
  bool count_weighted = false;

  bool operator==(const PropagationResult&) const = default;
};

/// Transmits an activation from the source projection to the target projection.
/// Throws when the activation does not belong to the source projection or the
/// two projections share no item.
PropagationResult propagate(const Activation& act, const Projection& source, const Projection& target);

/// Similarity-weighted share of the target node's members carrying the
/// activation's modality:
///   sum_{d in act_m, T_k} Sim(d, S_d) / sum_{d in T_k} Sim(d, S_d)
/// Only items present in both projections take part. An empty denominator gives
/// 0 and sets *zero_mass when provided.
double node_posterior(NodeIndex target_node, const Activation& act, const Projection& source,
                      const Projection& target, bool* zero_mass = nullptr);

/// Mean pairwise Euclidean distance between grid coordinates; 0 for a singleton.
double dispersion(std::span<const GridCoord> targets);

struct SourceNodeDetail {
  std::vector<NodeIndex> targets;  // T^k
  std::vector<GridCoord> coords;
  double activity_sum = 0.0;
  double dispersion = 0.0;  // D_k
  double term = 0.0;        // activity_sum / (D_k + 1)

  bool operator==(const SourceNodeDetail&) const = default;
};

struct ConsistencyReport {
  std::string source_map_id;
  std::string target_map_id;
  double pc = 0.0;
  std::map<NodeIndex, SourceNodeDetail> per_source;
  std::vector<NodeIndex> counted_sources;   // S-bar
  std::vector<NodeIndex> excluded_sources;  // non-empty, but no member present in the target

  bool operator==(const ConsistencyReport&) const = default;
};

/// Propagation consistency of `source` towards `target`: the mean over non-empty
/// source nodes of activity focalisation 1 / (D_k + 1). Throws
/// Error("disjoint universes") when no source node reaches the target.
ConsistencyReport propagation_consistency(const SomMap& source, const Projection& source_proj,
                                          const SomMap& target, const Projection& target_proj);

/// A trained map together with its projection.
struct MapView {
  const SomMap* map = nullptr;
  const Projection* projection = nullptr;
};

struct ConsistencyMatrix {
  std::vector<std::string> viewpoint_ids;
  std::vector<std::vector<double>> values;  // values[i][j] = PC(i -> j)

  bool operator==(const ConsistencyMatrix&) const = default;
};

/// PC for every ordered pair, read row towards column. Pairs are evaluated
/// concurrently when `threads` > 1.
ConsistencyMatrix consistency_matrix(std::span<const MapView> maps, unsigned threads = 0);

/// Delimited export with a header row of target ids and one row per source id.
std::string consistency_to_table(const ConsistencyMatrix& m, char delimiter = ',');

struct ChainStep {
  std::string source_map_id;
  /// Explicit source nodes; empty means "focus of the previous step".
  std::vector<NodeIndex> nodes;
  std::string target_map_id;
};

constexpr double kDefaultFocusThreshold = 0.1;

/// Target nodes with activity >= theta, ascending.
std::vector<NodeIndex> focus_nodes(const PropagationResult& r, double theta);

/// Resolves map ids to trained maps; nullopt for unknown ids.
using MapLookup = std::function<std::optional<MapView>(const std::string&)>;

/// Runs the steps in order; a step without explicit nodes activates the focus of
/// the previous step (which must target the same map). Throws naming the step on
/// an empty focus.
std::vector<PropagationResult> chain_propagation(std::span<const ChainStep> steps, const MapLookup& lookup,
                                                 double theta = kDefaultFocusThreshold);

}  // namespace multisom
