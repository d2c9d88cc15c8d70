#include "multisom/quality.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "multisom/error.hpp"
#include "parallel.hpp"

namespace multisom {

namespace {

// Feature mass per cluster, dense: mass[node * dim + f].
struct FeatureMass {
  std::size_t dim = 0;
  std::vector<double> mass;
  std::vector<double> cluster_total;  // sum over features, per node
  std::vector<double> feature_total;  // sum over clusters, per feature
  std::vector<bool> non_empty;

  double at(NodeIndex c, FeatureIndex f) const { return mass[static_cast<std::size_t>(c) * dim + f]; }
};

FeatureMass feature_mass(const SomMap& map, const ViewpointMatrix& matrix, const Projection& proj) {
  if (proj.node_count != map.node_count()) throw Error("projection does not belong to this map");
  FeatureMass fm;
  fm.dim = matrix.dimension();
  const auto nodes = static_cast<std::size_t>(map.node_count());
  fm.mass.assign(nodes * fm.dim, 0.0);
  fm.non_empty.assign(nodes, false);
  for (const auto& [id, a] : proj.items) {
    auto it = matrix.rows.find(id);
    if (it == matrix.rows.end()) throw Error("projected item '" + id + "' is not a row of the viewpoint");
    if (!map.grid().contains(a.node)) throw Error("projection node out of range");
    fm.non_empty[static_cast<std::size_t>(a.node)] = true;
    for (const auto& e : it->second.entries()) {
      fm.mass[static_cast<std::size_t>(a.node) * fm.dim + e.index] += e.weight;
    }
  }
  fm.cluster_total.assign(nodes, 0.0);
  fm.feature_total.assign(fm.dim, 0.0);
  for (std::size_t c = 0; c < nodes; ++c) {
    for (std::size_t f = 0; f < fm.dim; ++f) {
      fm.cluster_total[c] += fm.mass[c * fm.dim + f];
      fm.feature_total[f] += fm.mass[c * fm.dim + f];
    }
  }
  return fm;
}

std::map<NodeIndex, std::vector<FeatureIndex>> peculiar_from_mass(const FeatureMass& fm) {
  std::map<NodeIndex, std::vector<FeatureIndex>> out;
  const auto nodes = static_cast<NodeIndex>(fm.non_empty.size());
  for (NodeIndex c = 0; c < nodes; ++c) {
    if (fm.non_empty[static_cast<std::size_t>(c)]) out[c];
  }
  for (FeatureIndex f = 0; f < fm.dim; ++f) {
    if (!(fm.feature_total[f] > 0.0)) continue;
    double best = 0.0;
    for (NodeIndex c = 0; c < nodes; ++c) best = std::max(best, fm.at(c, f));
    // Recall shares the denominator across clusters, so comparing mass is exact.
    for (NodeIndex c = 0; c < nodes; ++c) {
      if (fm.non_empty[static_cast<std::size_t>(c)] && fm.at(c, f) == best) out[c].push_back(f);
    }
  }
  return out;
}

}  // namespace

double f_measure(double recall, double precision) {
  if (!(recall >= 0.0 && recall <= 1.0) || !(precision >= 0.0 && precision <= 1.0)) {
    throw Error("f_measure inputs must lie in [0, 1]");
  }
  const double sum = recall + precision;
  if (sum == 0.0) return 0.0;
  if (recall == precision) return recall;
  return 2.0 * (recall * precision) / sum;
}

std::map<NodeIndex, std::vector<FeatureIndex>> peculiar_features(const SomMap& map,
                                                                 const ViewpointMatrix& matrix,
                                                                 const Projection& proj) {
  return peculiar_from_mass(feature_mass(map, matrix, proj));
}

QualityReport map_recall_precision(const SomMap& map, const ViewpointMatrix& matrix,
                                   const Projection& proj) {
  const FeatureMass fm = feature_mass(map, matrix, proj);
  const auto peculiar = peculiar_from_mass(fm);

  QualityReport report;
  double recall_sum = 0.0;
  double precision_sum = 0.0;
  for (const auto& [c, features] : peculiar) {
    if (features.empty()) continue;
    ClusterQuality q;
    q.peculiar = features;
    for (FeatureIndex f : features) {
      q.recall += fm.at(c, f) / fm.feature_total[f];
      q.precision += fm.at(c, f) / fm.cluster_total[static_cast<std::size_t>(c)];
    }
    q.recall = std::min(1.0, q.recall / static_cast<double>(features.size()));
    q.precision = std::min(1.0, q.precision / static_cast<double>(features.size()));
    recall_sum += q.recall;
    precision_sum += q.precision;
    report.clusters.emplace(c, std::move(q));
  }
  if (report.clusters.empty()) throw Error("degenerate map");
  const auto n = static_cast<double>(report.clusters.size());
  report.recall = std::min(1.0, recall_sum / n);
  report.precision = std::min(1.0, precision_sum / n);
  report.f_measure = f_measure(report.recall, report.precision);
  return report;
}

int choose_side(const std::vector<ScanEntry>& entries) {
  const ScanEntry* best = nullptr;
  for (const auto& e : entries) {
    if (e.degenerate) continue;
    if (best == nullptr || e.quality.f_measure > best->quality.f_measure ||
        (e.quality.f_measure == best->quality.f_measure && e.side < best->side)) {
      best = &e;
    }
  }
  if (best == nullptr) throw Error("all scanned map sizes are degenerate");
  return best->side;
}

ScanResult scan_map_sizes(const ViewpointMatrix& matrix, int min_side, int max_side,
                          const ScheduleSpec& schedule, std::uint64_t seed, unsigned threads) {
  if (min_side < 1 || min_side > max_side) throw Error("scan range must satisfy 1 <= min <= max");

  ScanResult result;
  result.entries.resize(static_cast<std::size_t>(max_side - min_side + 1));

  auto evaluate = [&](std::size_t slot) {
    const int side = min_side + static_cast<int>(slot);
    const SomMap map = train_som(matrix, side, side, schedule.for_grid(side, side), seed);
    const Projection proj = project_data(map, matrix);
    ScanEntry entry;
    entry.side = side;
    for (const auto& m : proj.members()) entry.cluster_count += m.empty() ? 0 : 1;
    entry.quantization_error = quantization_error(map, matrix);
    try {
      entry.quality = map_recall_precision(map, matrix, proj);
      entry.quality.clusters.clear();  // scan rows keep the map-level summary only
    } catch (const Error&) {
      entry.degenerate = true;
    }
    result.entries[slot] = std::move(entry);
  };

  detail::parallel_for(result.entries.size(), threads, evaluate);

  result.chosen_side = choose_side(result.entries);
  return result;
}

std::string scan_to_table(const ScanResult& scan, char delimiter) {
  std::ostringstream out;
  out.precision(17);
  const char d = delimiter;
  out << "side" << d << "nodes" << d << "clusters" << d << "recall" << d << "precision" << d
      << "f_measure" << d << "quantization_error" << d << "chosen\n";
  for (const auto& e : scan.entries) {
    out << e.side << d << e.side * e.side << d << e.cluster_count << d;
    if (e.degenerate) {
      out << "" << d << "" << d << "";
    } else {
      out << e.quality.recall << d << e.quality.precision << d << e.quality.f_measure;
    }
    out << d << e.quantization_error << d << (e.side == scan.chosen_side ? 1 : 0) << '\n';
  }
  return out.str();
}

}  // namespace multisom
