#include "multisom/som.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "multisom/error.hpp"
#include "multisom/random.hpp"

namespace multisom {

namespace {

constexpr double kNeighbourhoodCutoff = 1e-9;

std::vector<SparseVector> training_rows(const ViewpointMatrix& matrix, bool unit_norm) {
  std::vector<SparseVector> rows;
  rows.reserve(matrix.rows.size());
  for (const auto& [id, row] : matrix.rows) {
    if (row.empty()) throw Error("empty row '" + id + "' in viewpoint '" + matrix.viewpoint_id + "'");
    if (row.extent() > matrix.dimension()) throw Error("row '" + id + "' exceeds viewpoint dimension");
    rows.push_back(unit_norm ? row.scaled(1.0 / row.norm()) : row);
  }
  return rows;
}

void check_grid(int width, int height, std::size_t dimension) {
  if (width < 1 || height < 1) throw Error("grid dimensions must be >= 1");
  const auto nodes = static_cast<std::uint64_t>(width) * static_cast<std::uint64_t>(height);
  if (nodes > static_cast<std::uint64_t>(std::numeric_limits<int>::max())) {
    throw Error("grid too large: node count overflows");
  }
  const std::uint64_t cap = std::numeric_limits<std::uint64_t>::max() / sizeof(double);
  if (dimension != 0 && nodes > cap / dimension) throw Error("grid too large: codebook storage overflows");
}

double lerp(double from, double to, double t) { return from + (to - from) * t; }

// Squared distance from a dense row to codebook k, accumulated in ascending
// feature order. Every term is non-negative, so once the partial sum reaches
// `bound` the node cannot win and the scan stops early.
double bounded_distance(const double* x, const double* w, std::size_t dim, double bound) {
  constexpr std::size_t kBlock = 16;
  double s = 0.0;
  std::size_t j = 0;
  while (j < dim) {
    const std::size_t stop = std::min(dim, j + kBlock);
    for (; j < stop; ++j) {
      const double d = w[j] - x[j];
      s += d * d;
    }
    if (s >= bound) return s;
  }
  return s;
}

NodeIndex nearest_node(const SomMap& map, const double* x) {
  const std::size_t dim = map.dimension();
  const double* cb = map.codebooks().data();
  NodeIndex best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (NodeIndex k = 0; k < map.node_count(); ++k) {
    const double d = bounded_distance(x, cb + static_cast<std::size_t>(k) * dim, dim, best_d);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

// Largest grid offset at which the Gaussian can still reach the cutoff, padded by one.
int neighbourhood_reach(double sigma, int limit) {
  const double r = std::sqrt(2.0 * sigma * sigma * std::log(1.0 / kNeighbourhoodCutoff));
  if (!(r < static_cast<double>(limit))) return limit;
  return static_cast<int>(std::ceil(r)) + 1;
}

void run_phase(SomMap& map, const std::vector<SparseVector>& rows, const TrainingPhase& phase,
               Rng& rng) {
  const GridShape& grid = map.grid();
  std::vector<double> x(map.dimension(), 0.0);
  for (std::int64_t t = 0; t < phase.iterations; ++t) {
    const double frac = phase.iterations > 1 ? static_cast<double>(t) / static_cast<double>(phase.iterations - 1) : 0.0;
    const double alpha = lerp(phase.alpha_start, phase.alpha_end, frac);
    const double sigma = lerp(phase.radius_start, phase.radius_end, frac);

    const SparseVector& v = rows[rng.index(rows.size())];
    for (const auto& e : v.entries()) x[e.index] = e.weight;
    const NodeIndex winner = nearest_node(map, x.data());
    for (const auto& e : v.entries()) x[e.index] = 0.0;

    auto update = [&](NodeIndex k, double h) {
      const double step = alpha * h;
      auto cb = map.codebook(k);
      for (double& c : cb) c *= (1.0 - step);
      for (const auto& e : v.entries()) cb[e.index] += step * e.weight;
    };

    if (!(sigma > 0.0)) {
      update(winner, 1.0);
      continue;
    }
    const GridCoord w = grid.coord(winner);
    const int reach = neighbourhood_reach(sigma, std::max(grid.width, grid.height));
    const int b0 = std::max(0, w.b - reach), b1 = std::min(grid.height - 1, w.b + reach);
    const int a0 = std::max(0, w.a - reach), a1 = std::min(grid.width - 1, w.a + reach);
    for (int b = b0; b <= b1; ++b) {
      for (int a = a0; a <= a1; ++a) {
        const NodeIndex k = grid.index({a, b});
        const double h = std::exp(-grid.squared_distance(winner, k) / (2.0 * sigma * sigma));
        if (h < kNeighbourhoodCutoff) continue;
        update(k, h);
      }
    }
  }
}

}  // namespace

double GridShape::squared_distance(NodeIndex i, NodeIndex j) const noexcept {
  const GridCoord ci = coord(i);
  const GridCoord cj = coord(j);
  const double da = ci.a - cj.a;
  const double db = ci.b - cj.b;
  return da * da + db * db;
}

void TrainingParams::validate() const {
  for (const TrainingPhase* p : {&ordering, &tuning}) {
    const char* name = p == &ordering ? "ordering" : "tuning";
    if (p->iterations < 1) throw Error(std::string(name) + " iterations must be positive");
    const bool alpha_ok = p->alpha_start > 0.0 && p->alpha_start < 1.0 && p->alpha_end > 0.0 &&
                          p->alpha_end < 1.0 && p->alpha_start > p->alpha_end;
    if (!alpha_ok) throw Error(std::string(name) + " learning rate must satisfy 1 > start > end > 0");
    if (!(p->radius_end >= 0.0) || !(p->radius_start >= p->radius_end)) {
      throw Error(std::string(name) + " radius must satisfy start >= end >= 0");
    }
  }
}

TrainingParams ScheduleSpec::for_grid(int width, int height) const {
  if (width < 1 || height < 1) throw Error("grid dimensions must be >= 1");
  const double nodes = static_cast<double>(width) * static_cast<double>(height);
  TrainingParams p;
  p.ordering.iterations = std::max<std::int64_t>(1, std::llround(ordering_per_node * nodes));
  p.ordering.alpha_start = ordering_alpha_start;
  p.ordering.alpha_end = ordering_alpha_end;
  p.ordering.radius_start = std::max(std::max(width, height) / 2.0, ordering_radius_end);
  p.ordering.radius_end = ordering_radius_end;
  p.tuning.iterations = std::max<std::int64_t>(1, std::llround(tuning_per_node * nodes));
  p.tuning.alpha_start = tuning_alpha_start;
  p.tuning.alpha_end = tuning_alpha_end;
  p.tuning.radius_start = tuning_radius_start;
  p.tuning.radius_end = tuning_radius_end;
  p.unit_norm_rows = unit_norm_rows;
  return p;
}

SomMap::SomMap(std::string viewpoint_id, GridShape grid, std::size_t dimension, TrainingParams params,
               std::uint64_t seed, std::vector<double> codebooks)
    : viewpoint_id_(std::move(viewpoint_id)),
      grid_(grid),
      dimension_(dimension),
      params_(params),
      seed_(seed),
      codebooks_(std::move(codebooks)) {
  check_grid(grid_.width, grid_.height, dimension_);
  if (codebooks_.size() != static_cast<std::size_t>(grid_.node_count()) * dimension_) {
    throw Error("codebook storage does not match grid and dimension");
  }
  for (double c : codebooks_) {
    if (!std::isfinite(c)) throw Error("non-finite codebook value");
  }
}

std::span<const double> SomMap::codebook(NodeIndex k) const {
  return {codebooks_.data() + static_cast<std::size_t>(k) * dimension_, dimension_};
}

std::span<double> SomMap::codebook(NodeIndex k) {
  return {codebooks_.data() + static_cast<std::size_t>(k) * dimension_, dimension_};
}

const Assignment* Projection::find(const std::string& item) const {
  auto it = items.find(item);
  return it == items.end() ? nullptr : &it->second;
}

std::vector<std::vector<std::string>> Projection::members() const {
  std::vector<std::vector<std::string>> out(static_cast<std::size_t>(node_count));
  for (const auto& [id, a] : items) out.at(static_cast<std::size_t>(a.node)).push_back(id);
  return out;
}

namespace {

SomMap initialize_with(const ViewpointMatrix& matrix, const std::vector<SparseVector>& rows, int width,
                       int height, const TrainingParams& params, std::uint64_t seed, Rng& rng) {
  const GridShape grid{width, height};
  const std::size_t dim = matrix.dimension();
  std::vector<std::size_t> order(rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);

  std::vector<double> codebooks(static_cast<std::size_t>(grid.node_count()) * dim, 0.0);
  for (NodeIndex k = 0; k < grid.node_count(); ++k) {
    const auto& row = rows[order[static_cast<std::size_t>(k) % order.size()]];
    double* cb = codebooks.data() + static_cast<std::size_t>(k) * dim;
    for (const auto& e : row.entries()) cb[e.index] = e.weight;
  }
  return SomMap(matrix.viewpoint_id, grid, dim, params, seed, std::move(codebooks));
}

}  // namespace

SomMap initialize_som(const ViewpointMatrix& matrix, int width, int height, const TrainingParams& params,
                      std::uint64_t seed) {
  check_grid(width, height, matrix.dimension());
  params.validate();
  if (matrix.rows.empty()) throw Error("empty viewpoint");
  const auto rows = training_rows(matrix, params.unit_norm_rows);
  Rng rng(seed);
  return initialize_with(matrix, rows, width, height, params, seed, rng);
}

SomMap train_som(const ViewpointMatrix& matrix, int width, int height, const TrainingParams& params,
                 std::uint64_t seed) {
  check_grid(width, height, matrix.dimension());
  params.validate();
  if (matrix.rows.empty()) throw Error("empty viewpoint");
  const auto rows = training_rows(matrix, params.unit_norm_rows);
  Rng rng(seed);
  SomMap map = initialize_with(matrix, rows, width, height, params, seed, rng);
  run_phase(map, rows, params.ordering, rng);
  run_phase(map, rows, params.tuning, rng);
  for (double c : map.codebooks()) {
    if (!std::isfinite(c)) throw Error("training diverged");
  }
  return map;
}

double squared_distance(const SparseVector& v, std::span<const double> codebook) {
  double s = 0.0;
  auto it = v.entries().begin();
  const auto end = v.entries().end();
  for (std::size_t j = 0; j < codebook.size(); ++j) {
    double x = 0.0;
    if (it != end && it->index == j) {
      x = it->weight;
      ++it;
    }
    const double d = codebook[j] - x;
    s += d * d;
  }
  return s;
}

NodeIndex best_matching_unit(const SomMap& map, const SparseVector& v) {
  if (v.extent() > map.dimension()) throw Error("vector dimension exceeds map dimension");
  const std::vector<double> x = v.to_dense(map.dimension());
  return nearest_node(map, x.data());
}

namespace {

void check_feature_space(const SomMap& map, const ViewpointMatrix& matrix) {
  if (map.viewpoint_id() != matrix.viewpoint_id || map.dimension() != matrix.dimension()) {
    throw Error("feature-space mismatch: map '" + map.viewpoint_id() + "' (" +
                std::to_string(map.dimension()) + " features) vs viewpoint '" + matrix.viewpoint_id +
                "' (" + std::to_string(matrix.dimension()) + " features)");
  }
}

}  // namespace

Projection project_data(const SomMap& map, const ViewpointMatrix& matrix) {
  check_feature_space(map, matrix);
  Projection proj;
  proj.map_id = map.viewpoint_id();
  proj.node_count = map.node_count();
  for (const auto& [id, raw] : matrix.rows) {
    if (raw.empty()) throw Error("empty row '" + id + "'");
    const SparseVector row = map.params().unit_norm_rows ? raw.scaled(1.0 / raw.norm()) : raw;
    const NodeIndex node = best_matching_unit(map, row);
    proj.items.emplace(id, Assignment{node, cosine_similarity(row, map.codebook(node))});
  }
  return proj;
}

double quantization_error(const SomMap& map, const ViewpointMatrix& matrix) {
  check_feature_space(map, matrix);
  if (matrix.rows.empty()) throw Error("empty matrix");
  double total = 0.0;
  for (const auto& [id, raw] : matrix.rows) {
    const SparseVector row = map.params().unit_norm_rows ? raw.scaled(1.0 / raw.norm()) : raw;
    const NodeIndex node = best_matching_unit(map, row);
    total += std::sqrt(squared_distance(row, map.codebook(node)));
  }
  return total / static_cast<double>(matrix.rows.size());
}

}  // namespace multisom
