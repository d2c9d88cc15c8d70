#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "multisom/viewpoint.hpp"

namespace multisom {

using NodeIndex = int;

/// Grid coordinate (a, b): a is the column, b the row.
struct GridCoord {
  int a = 0;
  int b = 0;
  bool operator==(const GridCoord&) const = default;
};

/// Rectangular lattice. Node k sits at (k mod width, k div width).
struct GridShape {
  int width = 0;
  int height = 0;

  int node_count() const noexcept { return width * height; }
  bool contains(NodeIndex k) const noexcept { return k >= 0 && k < node_count(); }
  GridCoord coord(NodeIndex k) const noexcept { return {k % width, k / width}; }
  NodeIndex index(GridCoord c) const noexcept { return c.b * width + c.a; }
  double squared_distance(NodeIndex i, NodeIndex j) const noexcept;

  bool operator==(const GridShape&) const = default;
};

/// One phase of the training schedule. Learning rate and neighbourhood radius
/// decay linearly from start to end over `iterations` steps.
struct TrainingPhase {
  std::int64_t iterations = 0;
  double alpha_start = 0.0;
  double alpha_end = 0.0;
  double radius_start = 0.0;
  double radius_end = 0.0;

  bool operator==(const TrainingPhase&) const = default;
};

struct TrainingParams {
  TrainingPhase ordering;
  TrainingPhase tuning;
  bool unit_norm_rows = false;

  void validate() const;  // throws Error
  bool operator==(const TrainingParams&) const = default;
};

/// Grid-size independent schedule; `for_grid` expands it into concrete params.
/// Defaults: ordering 20 x nodes iterations, alpha 0.5 -> 0.05, radius
/// max(w,h)/2 -> 1; tuning 50 x nodes iterations, alpha 0.05 -> 0.01, radius 1 -> 0.
struct ScheduleSpec {
  double ordering_per_node = 20.0;
  double tuning_per_node = 50.0;
  double ordering_alpha_start = 0.5;
  double ordering_alpha_end = 0.05;
  double tuning_alpha_start = 0.05;
  double tuning_alpha_end = 0.01;
  double ordering_radius_end = 1.0;
  double tuning_radius_start = 1.0;
  double tuning_radius_end = 0.0;
  bool unit_norm_rows = false;

  TrainingParams for_grid(int width, int height) const;
  bool operator==(const ScheduleSpec&) const = default;
};

/// Trained map: dense codebooks stored row-major, one row per node.
class SomMap {
 public:
  SomMap() = default;
  SomMap(std::string viewpoint_id, GridShape grid, std::size_t dimension, TrainingParams params,
         std::uint64_t seed, std::vector<double> codebooks);

  const std::string& viewpoint_id() const noexcept { return viewpoint_id_; }
  const GridShape& grid() const noexcept { return grid_; }
  int node_count() const noexcept { return grid_.node_count(); }
  std::size_t dimension() const noexcept { return dimension_; }
  const TrainingParams& params() const noexcept { return params_; }
  std::uint64_t seed() const noexcept { return seed_; }

  std::span<const double> codebook(NodeIndex k) const;
  std::span<double> codebook(NodeIndex k);
  const std::vector<double>& codebooks() const noexcept { return codebooks_; }

  bool operator==(const SomMap&) const = default;

 private:
  std::string viewpoint_id_;
  GridShape grid_;
  std::size_t dimension_ = 0;
  TrainingParams params_;
  std::uint64_t seed_ = 0;
  std::vector<double> codebooks_;
};

struct Assignment {
  NodeIndex node = 0;
  double similarity = 0.0;  // cosine(item, codebook of node)
  bool operator==(const Assignment&) const = default;
};

/// Per-item node assignment for one map.
struct Projection {
  std::string map_id;
  int node_count = 0;
  std::map<std::string, Assignment> items;

  const Assignment* find(const std::string& item) const;
  /// Item ids grouped by node, each list sorted.
  std::vector<std::vector<std::string>> members() const;

  bool operator==(const Projection&) const = default;
};

/// Codebooks seeded from a shuffled sample of data rows, no training applied.
SomMap initialize_som(const ViewpointMatrix& matrix, int width, int height,
                      const TrainingParams& params, std::uint64_t seed);

/// Two-phase online training with a Gaussian neighbourhood. Deterministic for
/// fixed inputs and seed.
SomMap train_som(const ViewpointMatrix& matrix, int width, int height,
                 const TrainingParams& params, std::uint64_t seed);

/// Squared Euclidean distance between a sparse vector and a dense codebook,
/// accumulated in ascending feature order.
double squared_distance(const SparseVector& v, std::span<const double> codebook);

/// Node whose codebook is nearest in Euclidean distance; ties go to the lowest index.
NodeIndex best_matching_unit(const SomMap& map, const SparseVector& v);

Projection project_data(const SomMap& map, const ViewpointMatrix& matrix);

/// Mean Euclidean distance from each row to its best-matching codebook.
double quantization_error(const SomMap& map, const ViewpointMatrix& matrix);

/// Model file (JSON text, format "multisom-model").
std::string model_to_text(const SomMap& map);
SomMap model_from_text(const std::string& text);

}  // namespace multisom
