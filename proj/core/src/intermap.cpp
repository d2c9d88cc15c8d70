#include "multisom/intermap.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "multisom/error.hpp"
#include "parallel.hpp"

namespace multisom {

std::string to_string(Modality m) { return m == Modality::active ? "active" : "inactive"; }

Modality modality_from_string(const std::string& s) {
  if (s == "active") return Modality::active;
  if (s == "inactive") return Modality::inactive;
  throw Error("unknown modality '" + s + "'");
}

Activation activate(const SomMap& source, std::span<const NodeIndex> nodes, std::string evidence_id) {
  if (nodes.empty()) throw Error("empty selection");
  std::set<NodeIndex> unique;
  for (NodeIndex k : nodes) {
    if (!source.grid().contains(k)) {
      throw Error("node " + std::to_string(k) + " is outside map '" + source.viewpoint_id() + "' (" +
                  std::to_string(source.node_count()) + " nodes)");
    }
    unique.insert(k);
  }
  return Activation{source.viewpoint_id(), {unique.begin(), unique.end()}, Modality::active,
                    std::move(evidence_id)};
}

Activation activate(const SomMap& source, const InformationArea& area, std::string evidence_id) {
  return activate(source, std::span<const NodeIndex>(area.nodes), std::move(evidence_id));
}

namespace {

void check_activation(const Activation& act, const Projection& source) {
  if (act.source_map_id != source.map_id) {
    throw Error("activation belongs to map '" + act.source_map_id + "', not '" + source.map_id + "'");
  }
  if (act.nodes.empty()) throw Error("empty selection");
  for (NodeIndex k : act.nodes) {
    if (k < 0 || k >= source.node_count) throw Error("activated node " + std::to_string(k) + " out of range");
  }
}

bool shares_items(const Projection& a, const Projection& b) {
  const auto& small = a.items.size() <= b.items.size() ? a : b;
  const auto& large = &small == &a ? b : a;
  return std::any_of(small.items.begin(), small.items.end(),
                     [&](const auto& kv) { return large.items.contains(kv.first); });
}

bool is_activated(const Activation& act, NodeIndex source_node) {
  return std::binary_search(act.nodes.begin(), act.nodes.end(), source_node);
}

}  // namespace

PropagationResult propagate(const Activation& act, const Projection& source, const Projection& target) {
  check_activation(act, source);
  if (!shares_items(source, target)) {
    throw Error("projection universe mismatch: '" + source.map_id + "' and '" + target.map_id +
                "' share no item");
  }

  PropagationResult r;
  r.source_map_id = source.map_id;
  r.target_map_id = target.map_id;

  std::map<NodeIndex, double> carrier_mass;
  std::map<NodeIndex, std::size_t> carrier_count;
  std::map<NodeIndex, double> numerator;
  std::map<NodeIndex, double> denominator;
  double total_mass = 0.0;

  for (const auto& [id, src] : source.items) {
    const Assignment* tgt = target.find(id);
    if (tgt == nullptr) continue;
    if (tgt->node < 0 || tgt->node >= target.node_count) throw Error("target projection node out of range");
    // Items on activated nodes carry the activation's modality, whichever it is.
    const bool activated = is_activated(act, src.node);

    denominator[tgt->node] += src.similarity;
    numerator[tgt->node] += activated ? src.similarity : 0.0;

    if (activated) {
      r.carriers.push_back(id);
      carrier_mass[tgt->node] += src.similarity;
      carrier_count[tgt->node] += 1;
      total_mass += src.similarity;
    }
  }

  for (const auto& [node, den] : denominator) {
    if (den > 0.0) {
      r.posterior[node] = numerator[node] / den;
    } else {
      r.posterior[node] = 0.0;
      r.zero_mass_nodes.push_back(node);
    }
  }

  if (r.carriers.empty()) {
    r.no_carriers = true;
    return r;
  }
  if (total_mass > 0.0) {
    for (const auto& [node, mass] : carrier_mass) r.node_activity[node] = mass / total_mass;
  } else {
    r.count_weighted = true;
    const auto n = static_cast<double>(r.carriers.size());
    for (const auto& [node, count] : carrier_count) r.node_activity[node] = static_cast<double>(count) / n;
  }
  for (const auto& [node, a] : r.node_activity) {
    if (a > 0.0) r.activated_targets.push_back(node);
  }
  return r;
}

double node_posterior(NodeIndex target_node, const Activation& act, const Projection& source,
                      const Projection& target, bool* zero_mass) {
  check_activation(act, source);
  if (target_node < 0 || target_node >= target.node_count) throw Error("target node out of range");
  double num = 0.0;
  double den = 0.0;
  for (const auto& [id, tgt] : target.items) {
    if (tgt.node != target_node) continue;
    const Assignment* src = source.find(id);
    if (src == nullptr) continue;
    den += src->similarity;
    if (is_activated(act, src->node)) num += src->similarity;
  }
  if (zero_mass != nullptr) *zero_mass = !(den > 0.0);
  return den > 0.0 ? num / den : 0.0;
}

double dispersion(std::span<const GridCoord> targets) {
  if (targets.empty()) throw Error("dispersion of an empty target set");
  const std::size_t n = targets.size();
  if (n == 1) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double da = targets[i].a - targets[j].a;
      const double db = targets[i].b - targets[j].b;
      sum += std::sqrt(da * da + db * db);
    }
  }
  return 2.0 * sum / (static_cast<double>(n) * static_cast<double>(n - 1));
}

ConsistencyReport propagation_consistency(const SomMap& source, const Projection& source_proj,
                                          const SomMap& target, const Projection& target_proj) {
  if (source_proj.map_id != source.viewpoint_id() || source_proj.node_count != source.node_count()) {
    throw Error("source projection does not belong to map '" + source.viewpoint_id() + "'");
  }
  if (target_proj.map_id != target.viewpoint_id() || target_proj.node_count != target.node_count()) {
    throw Error("target projection does not belong to map '" + target.viewpoint_id() + "'");
  }
  if (!shares_items(source_proj, target_proj)) throw Error("disjoint universes");

  ConsistencyReport report;
  report.source_map_id = source.viewpoint_id();
  report.target_map_id = target.viewpoint_id();

  const auto members = source_proj.members();
  double term_sum = 0.0;
  for (NodeIndex k = 0; k < source.node_count(); ++k) {
    if (members[static_cast<std::size_t>(k)].empty()) continue;
    const Activation act{source.viewpoint_id(), {k}, Modality::active, {}};
    const PropagationResult r = propagate(act, source_proj, target_proj);
    if (r.no_carriers) {
      report.excluded_sources.push_back(k);
      continue;
    }
    SourceNodeDetail d;
    d.targets = r.activated_targets;
    for (NodeIndex t : d.targets) {
      d.coords.push_back(target.grid().coord(t));
      d.activity_sum += r.node_activity.at(t);
    }
    d.dispersion = dispersion(d.coords);
    d.term = d.activity_sum / (d.dispersion + 1.0);
    term_sum += d.term;
    report.counted_sources.push_back(k);
    report.per_source.emplace(k, std::move(d));
  }
  if (report.counted_sources.empty()) throw Error("disjoint universes");
  report.pc = std::min(1.0, term_sum / static_cast<double>(report.counted_sources.size()));
  return report;
}

ConsistencyMatrix consistency_matrix(std::span<const MapView> maps, unsigned threads) {
  if (maps.size() < 2) throw Error("consistency matrix needs at least two maps");
  ConsistencyMatrix m;
  const std::size_t n = maps.size();
  for (const auto& v : maps) {
    if (v.map == nullptr || v.projection == nullptr) throw Error("incomplete map view");
    m.viewpoint_ids.push_back(v.map->viewpoint_id());
  }
  m.values.assign(n, std::vector<double>(n, 0.0));
  detail::parallel_for(n * n, threads, [&](std::size_t slot) {
    const std::size_t i = slot / n;
    const std::size_t j = slot % n;
    m.values[i][j] =
        propagation_consistency(*maps[i].map, *maps[i].projection, *maps[j].map, *maps[j].projection).pc;
  });
  return m;
}

std::string consistency_to_table(const ConsistencyMatrix& m, char delimiter) {
  std::ostringstream out;
  out.precision(17);
  out << "source\\target";
  for (const auto& id : m.viewpoint_ids) out << delimiter << id;
  out << '\n';
  for (std::size_t i = 0; i < m.viewpoint_ids.size(); ++i) {
    out << m.viewpoint_ids[i];
    for (double v : m.values[i]) out << delimiter << v;
    out << '\n';
  }
  return out.str();
}

std::vector<NodeIndex> focus_nodes(const PropagationResult& r, double theta) {
  std::vector<NodeIndex> focus;
  for (const auto& [node, a] : r.node_activity) {
    if (a >= theta) focus.push_back(node);
  }
  return focus;
}

std::vector<PropagationResult> chain_propagation(std::span<const ChainStep> steps, const MapLookup& lookup,
                                                 double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) throw Error("focus threshold must lie in (0, 1]");
  if (steps.empty()) throw Error("chain has no steps");

  std::vector<PropagationResult> results;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const ChainStep& step = steps[i];
    const std::string where = "chain step " + std::to_string(i + 1);
    const auto source = lookup(step.source_map_id);
    if (!source) throw Error(where + ": unknown map '" + step.source_map_id + "'");
    const auto target = lookup(step.target_map_id);
    if (!target) throw Error(where + ": unknown map '" + step.target_map_id + "'");

    std::vector<NodeIndex> nodes = step.nodes;
    if (nodes.empty()) {
      if (results.empty()) throw Error(where + ": first step needs an explicit selection");
      if (results.back().target_map_id != step.source_map_id) {
        throw Error(where + ": focus comes from map '" + results.back().target_map_id + "', not '" +
                    step.source_map_id + "'");
      }
      nodes = focus_nodes(results.back(), theta);
      if (nodes.empty()) {
        throw Error(where + ": empty focus (no node of '" + step.source_map_id + "' reached activity " +
                    std::to_string(theta) + ")");
      }
    }
    const Activation act = activate(*source->map, nodes);
    results.push_back(propagate(act, *source->projection, *target->projection));
  }
  return results;
}

}  // namespace multisom
