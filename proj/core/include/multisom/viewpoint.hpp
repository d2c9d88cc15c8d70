#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace multisom {

using FeatureIndex = std::uint32_t;

struct DataItem {
  std::string id;
  std::string label;

  bool operator==(const DataItem&) const = default;
};

/// Sparse non-negative weight vector. Entries are kept sorted by feature index.
class SparseVector {
 public:
  struct Entry {
    FeatureIndex index = 0;
    double weight = 0.0;
    bool operator==(const Entry&) const = default;
  };

  SparseVector() = default;

  /// Validating constructor: indices strictly increasing, weights > 0 and finite.
  explicit SparseVector(std::vector<Entry> entries);

  /// Builds from a dense vector, dropping zeros. Negative values are rejected.
  static SparseVector from_dense(std::span<const double> dense);

  const std::vector<Entry>& entries() const noexcept { return entries_; }
  bool empty() const noexcept { return entries_.empty(); }
  std::size_t size() const noexcept { return entries_.size(); }

  /// One past the largest feature index (0 when empty).
  FeatureIndex extent() const noexcept { return entries_.empty() ? 0 : entries_.back().index + 1; }

  double norm() const noexcept;
  double weight_sum() const noexcept;
  SparseVector scaled(double factor) const;
  std::vector<double> to_dense(std::size_t dimension) const;

  bool operator==(const SparseVector&) const = default;

 private:
  std::vector<Entry> entries_;
};

/// Cosine of the angle between two sparse vectors, clamped to [0, 1].
/// Throws Error("degenerate vector") when either vector has zero norm.
double cosine_similarity(const SparseVector& a, const SparseVector& b);

/// Cosine between a sparse vector and a dense one. Zero-norm dense input gives 0.
double cosine_similarity(const SparseVector& a, std::span<const double> dense);

/// One viewpoint: a sparse item x feature weight matrix.
struct ViewpointMatrix {
  std::string viewpoint_id;
  std::vector<std::string> feature_names;  // lexicographic, frozen at build time
  std::map<std::string, SparseVector> rows;

  std::size_t dimension() const noexcept { return feature_names.size(); }
  std::size_t row_count() const noexcept { return rows.size(); }
  std::optional<FeatureIndex> feature_index(const std::string& name) const;
  double total_weight() const noexcept;

  bool operator==(const ViewpointMatrix&) const = default;
};

struct Dataset {
  std::vector<DataItem> items;
  std::vector<ViewpointMatrix> viewpoints;

  const ViewpointMatrix* find_viewpoint(const std::string& id) const;
  const ViewpointMatrix& viewpoint(const std::string& id) const;  // throws when absent

  bool operator==(const Dataset&) const = default;
};

struct RawEntry {
  std::string item;
  std::string feature;
  double weight = 0.0;
};

/// Groups raw (item, feature, weight) triples into a matrix. Duplicate pairs are
/// summed, zero weights dropped, features sorted. The result does not depend on
/// the order of `raw`.
ViewpointMatrix build_viewpoint_matrix(std::string viewpoint_id, std::span<const RawEntry> raw);

struct ValidationIssue {
  std::string kind;       // e.g. "unknown row id", "duplicate item id"
  std::string viewpoint;  // empty for dataset-level issues
  std::string subject;    // offending item or feature
  bool operator==(const ValidationIssue&) const = default;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  std::map<std::string, std::size_t> coverage;  // viewpoint id -> rows present

  bool ok() const noexcept { return issues.empty(); }
};

ValidationReport validate_dataset(const Dataset& ds);

}  // namespace multisom
