#include "multisom/viewpoint.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "multisom/error.hpp"

namespace multisom {

SparseVector::SparseVector(std::vector<Entry> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
      throw Error("sparse vector weight must be positive and finite");
    }
    if (i > 0 && entries_[i - 1].index >= e.index) {
      throw Error("sparse vector indices must be strictly increasing");
    }
  }
}

SparseVector SparseVector::from_dense(std::span<const double> dense) {
  std::vector<Entry> entries;
  for (std::size_t j = 0; j < dense.size(); ++j) {
    if (dense[j] < 0.0) throw Error("negative weight");
    if (dense[j] > 0.0) entries.push_back({static_cast<FeatureIndex>(j), dense[j]});
  }
  return SparseVector(std::move(entries));
}

double SparseVector::norm() const noexcept {
  double s = 0.0;
  for (const auto& e : entries_) s += e.weight * e.weight;
  return std::sqrt(s);
}

double SparseVector::weight_sum() const noexcept {
  double s = 0.0;
  for (const auto& e : entries_) s += e.weight;
  return s;
}

SparseVector SparseVector::scaled(double factor) const {
  if (!(factor > 0.0)) throw Error("scale factor must be positive");
  auto copy = entries_;
  for (auto& e : copy) e.weight *= factor;
  return SparseVector(std::move(copy));
}

std::vector<double> SparseVector::to_dense(std::size_t dimension) const {
  std::vector<double> out(dimension, 0.0);
  for (const auto& e : entries_) {
    if (e.index >= dimension) throw Error("sparse vector exceeds dimension");
    out[e.index] = e.weight;
  }
  return out;
}

double cosine_similarity(const SparseVector& a, const SparseVector& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw Error("degenerate vector");

  double dot = 0.0;
  auto ia = a.entries().begin();
  auto ib = b.entries().begin();
  while (ia != a.entries().end() && ib != b.entries().end()) {
    if (ia->index < ib->index) {
      ++ia;
    } else if (ib->index < ia->index) {
      ++ib;
    } else {
      dot += ia->weight * ib->weight;
      ++ia;
      ++ib;
    }
  }
  return std::clamp(dot / (na * nb), 0.0, 1.0);
}

double cosine_similarity(const SparseVector& a, std::span<const double> dense) {
  const double na = a.norm();
  if (na == 0.0) throw Error("degenerate vector");
  double nd = 0.0;
  for (double x : dense) nd += x * x;
  if (nd == 0.0) return 0.0;
  double dot = 0.0;
  for (const auto& e : a.entries()) {
    if (e.index < dense.size()) dot += e.weight * dense[e.index];
  }
  return std::clamp(dot / (na * std::sqrt(nd)), 0.0, 1.0);
}

std::optional<FeatureIndex> ViewpointMatrix::feature_index(const std::string& name) const {
  auto it = std::lower_bound(feature_names.begin(), feature_names.end(), name);
  if (it == feature_names.end() || *it != name) return std::nullopt;
  return static_cast<FeatureIndex>(it - feature_names.begin());
}

double ViewpointMatrix::total_weight() const noexcept {
  double s = 0.0;
  for (const auto& [id, row] : rows) s += row.weight_sum();
  return s;
}

const ViewpointMatrix* Dataset::find_viewpoint(const std::string& id) const {
  for (const auto& vp : viewpoints) {
    if (vp.viewpoint_id == id) return &vp;
  }
  return nullptr;
}

const ViewpointMatrix& Dataset::viewpoint(const std::string& id) const {
  if (const auto* vp = find_viewpoint(id)) return *vp;
  throw Error("unknown viewpoint '" + id + "'");
}

ViewpointMatrix build_viewpoint_matrix(std::string viewpoint_id, std::span<const RawEntry> raw) {
  if (raw.empty()) throw Error("empty viewpoint");

  std::vector<const RawEntry*> sorted;
  sorted.reserve(raw.size());
  for (const auto& r : raw) {
    if (r.item.empty()) throw Error("empty item id in viewpoint '" + viewpoint_id + "'");
    if (r.feature.empty()) throw Error("empty feature name in viewpoint '" + viewpoint_id + "'");
    if (!std::isfinite(r.weight) || r.weight < 0.0) {
      throw Error("negative or non-finite weight for (" + r.item + ", " + r.feature + ")");
    }
    sorted.push_back(&r);
  }
  // Summing duplicates in a canonical order keeps the result permutation-invariant.
  std::sort(sorted.begin(), sorted.end(), [](const RawEntry* x, const RawEntry* y) {
    return std::tie(x->item, x->feature, x->weight) < std::tie(y->item, y->feature, y->weight);
  });

  std::map<std::string, std::map<std::string, double>> merged;
  for (const auto* r : sorted) merged[r->item][r->feature] += r->weight;

  std::set<std::string> features;
  for (const auto& [item, cells] : merged) {
    for (const auto& [feature, w] : cells) {
      if (w > 0.0) features.insert(feature);
    }
  }
  if (features.empty()) throw Error("empty viewpoint");

  ViewpointMatrix m;
  m.viewpoint_id = std::move(viewpoint_id);
  m.feature_names.assign(features.begin(), features.end());
  for (const auto& [item, cells] : merged) {
    std::vector<SparseVector::Entry> entries;
    for (const auto& [feature, w] : cells) {
      if (w > 0.0) entries.push_back({*m.feature_index(feature), w});
    }
    if (!entries.empty()) m.rows.emplace(item, SparseVector(std::move(entries)));
  }
  return m;
}

ValidationReport validate_dataset(const Dataset& ds) {
  ValidationReport report;
  auto issue = [&](std::string kind, std::string vp, std::string subject) {
    report.issues.push_back({std::move(kind), std::move(vp), std::move(subject)});
  };

  std::set<std::string> ids;
  for (const auto& item : ds.items) {
    if (item.id.empty()) {
      issue("empty item id", "", "");
    } else if (!ids.insert(item.id).second) {
      issue("duplicate item id", "", item.id);
    }
  }

  std::set<std::string> vp_ids;
  for (const auto& vp : ds.viewpoints) {
    if (!vp_ids.insert(vp.viewpoint_id).second) issue("duplicate viewpoint id", vp.viewpoint_id, "");
    report.coverage[vp.viewpoint_id] = vp.rows.size();

    if (vp.rows.empty()) issue("empty viewpoint", vp.viewpoint_id, "");
    std::set<std::string> names;
    for (const auto& name : vp.feature_names) {
      if (!names.insert(name).second) issue("duplicate feature name", vp.viewpoint_id, name);
    }
    for (const auto& [id, row] : vp.rows) {
      if (!ids.contains(id)) issue("unknown row id", vp.viewpoint_id, id);
      if (row.empty()) issue("empty row", vp.viewpoint_id, id);
      FeatureIndex prev = 0;
      bool first = true;
      for (const auto& e : row.entries()) {
        if (e.index >= vp.feature_names.size()) issue("feature index out of range", vp.viewpoint_id, id);
        if (!(e.weight > 0.0)) issue("non-positive weight", vp.viewpoint_id, id);
        if (!first && e.index <= prev) issue("unsorted row", vp.viewpoint_id, id);
        prev = e.index;
        first = false;
      }
    }
  }
  return report;
}

}  // namespace multisom
