#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "multisom/som.hpp"
#include "multisom/viewpoint.hpp"

namespace multisom {

// Cluster quality is computed from feature mass. With W(f, c) the summed weight
// of feature f over the members of cluster c (a non-empty node):
//
//   feature recall    FR(c, f) = W(f, c) / sum_c' W(f, c')
//   feature precision FP(c, f) = W(f, c) / sum_f' W(f', c)
//
// A feature is peculiar to every cluster that maximises FR(., f). Local recall
// and precision of a cluster average FR and FP over its peculiar features; the
// map values average the local ones over clusters that own a peculiar feature.

struct ClusterQuality {
  std::vector<FeatureIndex> peculiar;
  double recall = 0.0;
  double precision = 0.0;
  bool operator==(const ClusterQuality&) const = default;
};

struct QualityReport {
  double recall = 0.0;
  double precision = 0.0;
  double f_measure = 0.0;
  std::map<NodeIndex, ClusterQuality> clusters;
  bool operator==(const QualityReport&) const = default;
};

/// Harmonic mean 2rp/(r+p), 0 when r + p = 0. Inputs must lie in [0, 1].
double f_measure(double recall, double precision);

/// Peculiar features of each non-empty cluster. Exact ties put the feature in
/// every maximising cluster.
std::map<NodeIndex, std::vector<FeatureIndex>> peculiar_features(const SomMap& map,
                                                                 const ViewpointMatrix& matrix,
                                                                 const Projection& proj);

/// Throws Error("degenerate map") when no cluster owns a peculiar feature.
QualityReport map_recall_precision(const SomMap& map, const ViewpointMatrix& matrix,
                                   const Projection& proj);

struct ScanEntry {
  int side = 0;
  int cluster_count = 0;
  bool degenerate = false;
  QualityReport quality;  // map-level figures; per-cluster detail is not kept
  double quantization_error = 0.0;
  bool operator==(const ScanEntry&) const = default;
};

struct ScanResult {
  std::vector<ScanEntry> entries;  // ascending side
  int chosen_side = 0;
  bool operator==(const ScanResult&) const = default;
};

/// Trains a square map for every side in [min_side, max_side] with the same seed
/// and picks the side with the highest F-measure (ties go to the smaller side).
/// Sizes are trained concurrently when `threads` > 1.
ScanResult scan_map_sizes(const ViewpointMatrix& matrix, int min_side, int max_side,
                          const ScheduleSpec& schedule, std::uint64_t seed, unsigned threads = 0);

/// Chooses the side from scan entries; exposed so callers can re-assert the choice.
int choose_side(const std::vector<ScanEntry>& entries);

/// Delimited table: side,nodes,clusters,recall,precision,f_measure,quantization_error,chosen
std::string scan_to_table(const ScanResult& scan, char delimiter = ',');

}  // namespace multisom
