#include "codec.hpp"

#include "multisom/error.hpp"

namespace multisom::codec {

namespace {

std::string at(const std::string& what, const char* key) { return what + "." + key; }
std::string at(const std::string& what, std::size_t i) { return what + "[" + std::to_string(i) + "]"; }

std::string get_string(const json& j, const char* key, const std::string& what) {
  const json& v = require(j, key, what);
  if (!v.is_string()) throw ParseError(at(what, key) + ": expected a string");
  return v.get<std::string>();
}

double get_double(const json& j, const char* key, const std::string& what) {
  const json& v = require(j, key, what);
  if (!v.is_number()) throw ParseError(at(what, key) + ": expected a number");
  return v.get<double>();
}

std::int64_t get_int(const json& j, const char* key, const std::string& what) {
  const json& v = require(j, key, what);
  if (!v.is_number_integer()) throw ParseError(at(what, key) + ": expected an integer");
  return v.get<std::int64_t>();
}

std::uint64_t get_uint(const json& j, const char* key, const std::string& what) {
  const json& v = require(j, key, what);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw ParseError(at(what, key) + ": expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

bool get_bool(const json& j, const char* key, const std::string& what) {
  const json& v = require(j, key, what);
  if (!v.is_boolean()) throw ParseError(at(what, key) + ": expected a boolean");
  return v.get<bool>();
}

const json& get_array(const json& j, const char* key, const std::string& what) {
  const json& v = require(j, key, what);
  if (!v.is_array()) throw ParseError(at(what, key) + ": expected an array");
  return v;
}

void check_header(const json& j, const char* format, const std::string& what) {
  if (get_string(j, "format", what) != format) {
    throw ParseError(what + ": expected format '" + std::string(format) + "'");
  }
  const auto version = get_int(j, "version", what);
  if (version != kFormatVersion) {
    throw ParseError(what + ": unsupported format version " + std::to_string(version));
  }
}

json encode_phase(const TrainingPhase& p) {
  return {{"iterations", p.iterations},
          {"alpha_start", p.alpha_start},
          {"alpha_end", p.alpha_end},
          {"radius_start", p.radius_start},
          {"radius_end", p.radius_end}};
}

TrainingPhase decode_phase(const json& j, const std::string& what) {
  return {get_int(j, "iterations", what), get_double(j, "alpha_start", what), get_double(j, "alpha_end", what),
          get_double(j, "radius_start", what), get_double(j, "radius_end", what)};
}

json encode_coord(GridCoord c) { return json::array({c.a, c.b}); }

}  // namespace

const json& require(const json& j, const char* key, const std::string& what) {
  if (!j.is_object()) throw ParseError(what + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(at(what, key) + ": missing field");
  return *it;
}

json parse_document(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(what + ": malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

std::string dump(const json& j) { return j.dump(1) + "\n"; }

json encode(const TrainingParams& p) {
  return {{"ordering", encode_phase(p.ordering)},
          {"tuning", encode_phase(p.tuning)},
          {"unit_norm_rows", p.unit_norm_rows}};
}

TrainingParams decode_params(const json& j, const std::string& what) {
  TrainingParams p;
  p.ordering = decode_phase(require(j, "ordering", what), at(what, "ordering"));
  p.tuning = decode_phase(require(j, "tuning", what), at(what, "tuning"));
  p.unit_norm_rows = get_bool(j, "unit_norm_rows", what);
  try {
    p.validate();
  } catch (const Error& e) {
    throw ParseError(what + ": " + e.what());
  }
  return p;
}

json encode(const ScheduleSpec& s) {
  return {{"ordering_per_node", s.ordering_per_node},
          {"tuning_per_node", s.tuning_per_node},
          {"ordering_alpha_start", s.ordering_alpha_start},
          {"ordering_alpha_end", s.ordering_alpha_end},
          {"tuning_alpha_start", s.tuning_alpha_start},
          {"tuning_alpha_end", s.tuning_alpha_end},
          {"ordering_radius_end", s.ordering_radius_end},
          {"tuning_radius_start", s.tuning_radius_start},
          {"tuning_radius_end", s.tuning_radius_end},
          {"unit_norm_rows", s.unit_norm_rows}};
}

ScheduleSpec decode_schedule(const json& j, const std::string& what) {
  // Every field is optional; missing ones keep their defaults.
  if (!j.is_object()) throw ParseError(what + ": expected an object");
  ScheduleSpec s;
  auto num = [&](const char* key, double& field) {
    if (j.contains(key)) field = get_double(j, key, what);
  };
  num("ordering_per_node", s.ordering_per_node);
  num("tuning_per_node", s.tuning_per_node);
  num("ordering_alpha_start", s.ordering_alpha_start);
  num("ordering_alpha_end", s.ordering_alpha_end);
  num("tuning_alpha_start", s.tuning_alpha_start);
  num("tuning_alpha_end", s.tuning_alpha_end);
  num("ordering_radius_end", s.ordering_radius_end);
  num("tuning_radius_start", s.tuning_radius_start);
  num("tuning_radius_end", s.tuning_radius_end);
  if (j.contains("unit_norm_rows")) s.unit_norm_rows = get_bool(j, "unit_norm_rows", what);
  for (const auto& [key, value] : j.items()) {
    if (!encode(ScheduleSpec{}).contains(key)) throw ParseError(what + ": unknown field '" + key + "'");
  }
  return s;
}

json encode(const SomMap& map) {
  json codebooks = json::array();
  for (NodeIndex k = 0; k < map.node_count(); ++k) {
    const auto cb = map.codebook(k);
    codebooks.push_back(json(std::vector<double>(cb.begin(), cb.end())));
  }
  return {{"format", "multisom-model"},
          {"version", kFormatVersion},
          {"viewpoint", map.viewpoint_id()},
          {"width", map.grid().width},
          {"height", map.grid().height},
          {"dimension", map.dimension()},
          {"seed", map.seed()},
          {"params", encode(map.params())},
          {"codebooks", std::move(codebooks)}};
}

SomMap decode_map(const json& j, const std::string& what) {
  check_header(j, "multisom-model", what);
  const GridShape grid{static_cast<int>(get_int(j, "width", what)), static_cast<int>(get_int(j, "height", what))};
  if (grid.width < 1 || grid.height < 1) throw ParseError(what + ": grid dimensions must be positive");
  const auto dim = static_cast<std::size_t>(get_uint(j, "dimension", what));
  const json& cbs = get_array(j, "codebooks", what);
  if (cbs.size() != static_cast<std::size_t>(grid.node_count())) {
    throw ParseError(at(what, "codebooks") + ": expected " + std::to_string(grid.node_count()) + " codebooks");
  }
  std::vector<double> flat;
  flat.reserve(cbs.size() * dim);
  for (std::size_t k = 0; k < cbs.size(); ++k) {
    const json& row = cbs[k];
    const std::string where = at(at(what, "codebooks"), k);
    if (!row.is_array() || row.size() != dim) throw ParseError(where + ": expected " + std::to_string(dim) + " values");
    for (const json& v : row) {
      if (!v.is_number()) throw ParseError(where + ": expected numbers");
      flat.push_back(v.get<double>());
    }
  }
  try {
    return SomMap(get_string(j, "viewpoint", what), grid, dim,
                  decode_params(require(j, "params", what), at(what, "params")), get_uint(j, "seed", what),
                  std::move(flat));
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(what + ": " + e.what());
  }
}

json encode(const Projection& p) {
  json items = json::array();
  for (const auto& [id, a] : p.items) items.push_back({{"item", id}, {"node", a.node}, {"similarity", a.similarity}});
  return {{"map", p.map_id}, {"node_count", p.node_count}, {"items", std::move(items)}};
}

Projection decode_projection(const json& j, const std::string& what) {
  Projection p;
  p.map_id = get_string(j, "map", what);
  p.node_count = static_cast<int>(get_int(j, "node_count", what));
  const json& items = get_array(j, "items", what);
  for (std::size_t i = 0; i < items.size(); ++i) {
    const std::string where = at(at(what, "items"), i);
    const auto node = static_cast<NodeIndex>(get_int(items[i], "node", where));
    if (node < 0 || node >= p.node_count) throw ParseError(where + ": node out of range");
    p.items[get_string(items[i], "item", where)] = {node, get_double(items[i], "similarity", where)};
  }
  return p;
}

json encode(const Dataset& ds) {
  json items = json::array();
  for (const auto& item : ds.items) items.push_back({{"id", item.id}, {"label", item.label}});
  json viewpoints = json::array();
  for (const auto& vp : ds.viewpoints) {
    json rows = json::array();
    for (const auto& [id, row] : vp.rows) {
      json entries = json::array();
      for (const auto& e : row.entries()) entries.push_back(json::array({e.index, e.weight}));
      rows.push_back({{"item", id}, {"entries", std::move(entries)}});
    }
    viewpoints.push_back({{"id", vp.viewpoint_id}, {"features", vp.feature_names}, {"rows", std::move(rows)}});
  }
  return {{"format", "multisom-dataset"},
          {"version", kFormatVersion},
          {"items", std::move(items)},
          {"viewpoints", std::move(viewpoints)}};
}

Dataset decode_dataset(const json& j, const std::string& what) {
  check_header(j, "multisom-dataset", what);
  Dataset ds;
  const json& items = get_array(j, "items", what);
  for (std::size_t i = 0; i < items.size(); ++i) {
    const std::string where = at(at(what, "items"), i);
    ds.items.push_back({get_string(items[i], "id", where), get_string(items[i], "label", where)});
  }
  const json& vps = get_array(j, "viewpoints", what);
  for (std::size_t v = 0; v < vps.size(); ++v) {
    const std::string where = at(at(what, "viewpoints"), v);
    ViewpointMatrix vp;
    vp.viewpoint_id = get_string(vps[v], "id", where);
    const json& features = get_array(vps[v], "features", where);
    for (std::size_t f = 0; f < features.size(); ++f) {
      if (!features[f].is_string()) throw ParseError(at(at(where, "features"), f) + ": expected a string");
      vp.feature_names.push_back(features[f].get<std::string>());
    }
    if (!std::is_sorted(vp.feature_names.begin(), vp.feature_names.end())) {
      throw ParseError(at(where, "features") + ": feature names must be sorted");
    }
    const json& rows = get_array(vps[v], "rows", where);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const std::string rwhere = at(at(where, "rows"), r);
      const json& entries = get_array(rows[r], "entries", rwhere);
      std::vector<SparseVector::Entry> parsed;
      for (std::size_t e = 0; e < entries.size(); ++e) {
        const json& cell = entries[e];
        if (!cell.is_array() || cell.size() != 2 || !cell[0].is_number_unsigned() || !cell[1].is_number()) {
          throw ParseError(at(at(rwhere, "entries"), e) + ": expected [feature index, weight]");
        }
        const auto index = cell[0].get<std::uint64_t>();
        if (index >= vp.feature_names.size()) throw ParseError(at(at(rwhere, "entries"), e) + ": feature index out of range");
        parsed.push_back({static_cast<FeatureIndex>(index), cell[1].get<double>()});
      }
      try {
        vp.rows.emplace(get_string(rows[r], "item", rwhere), SparseVector(std::move(parsed)));
      } catch (const ParseError&) {
        throw;
      } catch (const Error& e) {
        throw ParseError(rwhere + ": " + e.what());
      }
    }
    ds.viewpoints.push_back(std::move(vp));
  }
  return ds;
}

json encode(const QualityReport& q) {
  json clusters = json::array();
  for (const auto& [node, c] : q.clusters) {
    clusters.push_back({{"node", node}, {"peculiar", c.peculiar}, {"recall", c.recall}, {"precision", c.precision}});
  }
  return {{"recall", q.recall}, {"precision", q.precision}, {"f_measure", q.f_measure}, {"clusters", std::move(clusters)}};
}

json encode(const ScanResult& s) {
  json entries = json::array();
  for (const auto& e : s.entries) {
    entries.push_back({{"side", e.side},
                       {"clusters", e.cluster_count},
                       {"degenerate", e.degenerate},
                       {"recall", e.quality.recall},
                       {"precision", e.quality.precision},
                       {"f_measure", e.quality.f_measure},
                       {"quantization_error", e.quantization_error}});
  }
  return {{"chosen_side", s.chosen_side}, {"entries", std::move(entries)}};
}

ScanResult decode_scan(const json& j, const std::string& what) {
  ScanResult s;
  s.chosen_side = static_cast<int>(get_int(j, "chosen_side", what));
  const json& entries = get_array(j, "entries", what);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::string where = at(at(what, "entries"), i);
    ScanEntry e;
    e.side = static_cast<int>(get_int(entries[i], "side", where));
    e.cluster_count = static_cast<int>(get_int(entries[i], "clusters", where));
    e.degenerate = get_bool(entries[i], "degenerate", where);
    e.quality.recall = get_double(entries[i], "recall", where);
    e.quality.precision = get_double(entries[i], "precision", where);
    e.quality.f_measure = get_double(entries[i], "f_measure", where);
    e.quantization_error = get_double(entries[i], "quantization_error", where);
    s.entries.push_back(e);
  }
  return s;
}

json encode_labels(const NodeLabels& labels) {
  json out = json::array();
  for (const auto& l : labels) out.push_back(l ? json(*l) : json(nullptr));
  return out;
}

NodeLabels decode_labels(const json& j, const std::string& what) {
  if (!j.is_array()) throw ParseError(what + ": expected an array");
  NodeLabels labels;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (j[i].is_null()) {
      labels.emplace_back();
    } else if (j[i].is_string()) {
      labels.emplace_back(j[i].get<std::string>());
    } else {
      throw ParseError(at(what, i) + ": expected a string or null");
    }
  }
  return labels;
}

json encode(const InformationArea& a, const GridShape& grid) {
  json coords = json::array();
  for (NodeIndex k : a.nodes) coords.push_back(encode_coord(grid.coord(k)));
  return {{"id", a.area_id}, {"label", a.label}, {"nodes", a.nodes}, {"coords", std::move(coords)}, {"members", a.members}};
}

std::vector<InformationArea> decode_areas(const json& j, const std::string& what) {
  if (!j.is_array()) throw ParseError(what + ": expected an array");
  std::vector<InformationArea> areas;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string where = at(what, i);
    InformationArea a;
    a.area_id = static_cast<int>(get_int(j[i], "id", where));
    a.label = get_string(j[i], "label", where);
    a.nodes = get_array(j[i], "nodes", where).get<std::vector<NodeIndex>>();
    a.members = get_array(j[i], "members", where).get<std::vector<std::string>>();
    areas.push_back(std::move(a));
  }
  return areas;
}

json encode(const ConsistencyMatrix& m) { return {{"viewpoints", m.viewpoint_ids}, {"values", m.values}}; }

ConsistencyMatrix decode_matrix(const json& j, const std::string& what) {
  ConsistencyMatrix m;
  m.viewpoint_ids = get_array(j, "viewpoints", what).get<std::vector<std::string>>();
  m.values = get_array(j, "values", what).get<std::vector<std::vector<double>>>();
  if (m.values.size() != m.viewpoint_ids.size()) throw ParseError(at(what, "values") + ": row count mismatch");
  for (const auto& row : m.values) {
    if (row.size() != m.viewpoint_ids.size()) throw ParseError(at(what, "values") + ": column count mismatch");
  }
  return m;
}

json encode(const ConsistencyReport& r) {
  json per_source = json::array();
  for (const auto& [k, d] : r.per_source) {
    json coords = json::array();
    for (const auto& c : d.coords) coords.push_back(encode_coord(c));
    per_source.push_back({{"source_node", k},
                          {"targets", d.targets},
                          {"coords", std::move(coords)},
                          {"activity_sum", d.activity_sum},
                          {"dispersion", d.dispersion},
                          {"term", d.term}});
  }
  return {{"source", r.source_map_id},
          {"target", r.target_map_id},
          {"pc", r.pc},
          {"counted_sources", r.counted_sources},
          {"excluded_sources", r.excluded_sources},
          {"per_source", std::move(per_source)}};
}

json encode(const PropagationResult& r, const GridShape& target_grid, double theta) {
  json nodes = json::array();
  for (const auto& [k, posterior] : r.posterior) {
    auto it = r.node_activity.find(k);
    const double activity = it == r.node_activity.end() ? 0.0 : it->second;
    const GridCoord c = target_grid.coord(k);
    nodes.push_back({{"node", k}, {"a", c.a}, {"b", c.b}, {"activity", activity}, {"posterior", posterior}});
  }
  return {{"source", r.source_map_id},
          {"target", r.target_map_id},
          {"theta", theta},
          {"nodes", std::move(nodes)},
          {"activated_targets", r.activated_targets},
          {"focus", focus_nodes(r, theta)},
          {"carriers", r.carriers},
          {"zero_mass_nodes", r.zero_mass_nodes},
          {"no_carriers", r.no_carriers},
          {"count_weighted", r.count_weighted}};
}

}  // namespace multisom::codec

namespace multisom {

std::string model_to_text(const SomMap& map) { return codec::dump(codec::encode(map)); }

SomMap model_from_text(const std::string& text) {
  return codec::decode_map(codec::parse_document(text, "model"), "model");
}

}  // namespace multisom
