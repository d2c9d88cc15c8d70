#include "multisom/workspace.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "codec.hpp"
#include "multisom/error.hpp"

namespace multisom {

namespace fs = std::filesystem;
using codec::json;

namespace {

json config_json(const PipelineConfig& c, bool with_threads) {
  json input = {{"path", c.input_path},
                {"format", to_string(c.format)},
                {"restrict_to_universe", c.ingest.restrict_to_universe},
                {"dedup_links", c.ingest.viewpoints.dedup_links}};
  if (c.ingest.kernel_code) input["kernel_code"] = *c.ingest.kernel_code;
  if (c.ingest.geo_prefix) input["geo_prefix"] = *c.ingest.geo_prefix;
  json j = {{"input", std::move(input)},
            {"viewpoints", c.viewpoints},
            {"scan", {{"min_side", c.min_side}, {"max_side", c.max_side}}},
            {"seed", c.seed},
            {"theta", c.theta},
            {"training", codec::encode(c.schedule)}};
  if (with_threads) j["threads"] = c.threads;
  return j;
}

template <typename T>
T read_field(const json& j, const char* key, const std::string& what, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ParseError(what + "." + key + ": wrong type");
  }
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& what) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok |= key == k;
    if (!ok) throw ParseError(what + ": unknown field '" + key + "'");
  }
}

PipelineConfig decode_config(const json& j, const fs::path& base_dir) {
  const std::string what = "config";
  if (!j.is_object()) throw ParseError(what + ": expected an object");
  reject_unknown(j, {"input", "viewpoints", "scan", "seed", "theta", "training", "threads"}, what);

  PipelineConfig c;
  if (j.contains("input")) {
    const json& in = j.at("input");
    if (!in.is_object()) throw ParseError("config.input: expected an object");
    reject_unknown(in, {"path", "format", "kernel_code", "geo_prefix", "restrict_to_universe", "dedup_links"},
                   "config.input");
    c.input_path = read_field<std::string>(in, "path", "config.input", "");
    if (!c.input_path.empty() && !base_dir.empty() && fs::path(c.input_path).is_relative()) {
      c.input_path = (base_dir / c.input_path).lexically_normal().string();
    }
    try {
      c.format = dataset_format_from_string(read_field<std::string>(in, "format", "config.input", "json"));
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(std::string("config.input.format: ") + e.what());
    }
    if (in.contains("kernel_code")) c.ingest.kernel_code = read_field<std::string>(in, "kernel_code", "config.input", "");
    if (in.contains("geo_prefix")) c.ingest.geo_prefix = read_field<std::string>(in, "geo_prefix", "config.input", "");
    c.ingest.restrict_to_universe = read_field<bool>(in, "restrict_to_universe", "config.input", true);
    c.ingest.viewpoints.dedup_links = read_field<bool>(in, "dedup_links", "config.input", false);
  }
  c.viewpoints = read_field<std::vector<std::string>>(j, "viewpoints", what, {});
  if (j.contains("scan")) {
    const json& scan = j.at("scan");
    reject_unknown(scan, {"min_side", "max_side"}, "config.scan");
    c.min_side = read_field<int>(scan, "min_side", "config.scan", c.min_side);
    c.max_side = read_field<int>(scan, "max_side", "config.scan", c.max_side);
  }
  c.seed = read_field<std::uint64_t>(j, "seed", what, 0);
  c.theta = read_field<double>(j, "theta", what, kDefaultFocusThreshold);
  c.threads = read_field<unsigned>(j, "threads", what, 0);
  if (j.contains("training")) c.schedule = codec::decode_schedule(j.at("training"), "config.training");

  if (c.min_side < 1 || c.min_side > c.max_side) throw ParseError("config.scan: need 1 <= min_side <= max_side");
  if (!(c.theta > 0.0 && c.theta <= 1.0)) throw ParseError("config.theta: must lie in (0, 1]");
  return c;
}

template <typename F>
auto stage(const char* name, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const PipelineError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError(name, e.what());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

PipelineConfig parse_config(const std::string& json_text, const fs::path& base_dir) {
  return decode_config(codec::parse_document(json_text, "config"), base_dir);
}

PipelineConfig load_config(const fs::path& path) {
  return parse_config(read_file(path), path.parent_path());
}

std::string config_to_json(const PipelineConfig& config) { return codec::dump(config_json(config, true)); }

const ViewpointModel* WorkspaceBundle::find(const std::string& viewpoint_id) const {
  for (const auto& m : models) {
    if (m.map.viewpoint_id() == viewpoint_id) return &m;
  }
  return nullptr;
}

std::vector<MapView> WorkspaceBundle::views() const {
  std::vector<MapView> out;
  for (const auto& m : models) out.push_back({&m.map, &m.projection});
  return out;
}

MapLookup WorkspaceBundle::lookup() const {
  return [this](const std::string& id) -> std::optional<MapView> {
    const ViewpointModel* m = find(id);
    if (m == nullptr) return std::nullopt;
    return MapView{&m->map, &m->projection};
  };
}

WorkspaceBundle run_pipeline(const PipelineConfig& config) {
  Dataset ds = stage("ingest", [&] {
    if (config.input_path.empty()) throw Error("no input path configured");
    return load_dataset(config.input_path, config.format, config.ingest);
  });
  return run_pipeline(config, std::move(ds));
}

WorkspaceBundle run_pipeline(const PipelineConfig& config, Dataset dataset) {
  WorkspaceBundle bundle;
  bundle.config = config;

  stage("ingest", [&] {
    const ValidationReport report = validate_dataset(dataset);
    if (!report.ok()) {
      const auto& first = report.issues.front();
      throw Error(std::to_string(report.issues.size()) + " validation issue(s), first: " + first.kind + " (" +
                  first.viewpoint + (first.subject.empty() ? "" : ": " + first.subject) + ")");
    }
  });

  std::vector<std::string> selected = stage("select", [&] {
    if (config.min_side < 1 || config.min_side > config.max_side) throw Error("invalid scan range");
    if (!(config.theta > 0.0 && config.theta <= 1.0)) throw Error("theta must lie in (0, 1]");
    std::vector<std::string> ids = config.viewpoints;
    if (ids.empty()) {
      for (const auto& vp : dataset.viewpoints) ids.push_back(vp.viewpoint_id);
    }
    std::set<std::string> seen;
    for (const auto& id : ids) {
      if (dataset.find_viewpoint(id) == nullptr) throw Error("viewpoint '" + id + "' is not in the dataset");
      if (!seen.insert(id).second) throw Error("viewpoint '" + id + "' listed twice");
    }
    if (ids.empty()) throw Error("dataset has no viewpoints");
    return ids;
  });
  bundle.config.viewpoints = selected;

  for (const auto& id : selected) {
    const ViewpointMatrix& matrix = dataset.viewpoint(id);
    ViewpointModel model;
    model.scan = stage("scan", [&] {
      return scan_map_sizes(matrix, config.min_side, config.max_side, config.schedule, config.seed, config.threads);
    });
    stage("train", [&] {
      const int side = model.scan.chosen_side;
      model.map = train_som(matrix, side, side, config.schedule.for_grid(side, side), config.seed);
      model.projection = project_data(model.map, matrix);
    });
    stage("zone", [&] {
      model.labels = label_nodes(model.map, model.projection, matrix);
      model.areas = zone_map(model.map, model.labels, model.projection);
    });
    bundle.models.push_back(std::move(model));
  }

  bundle.consistency = stage("consistency", [&] {
    const auto views = bundle.views();
    if (views.size() >= 2) return consistency_matrix(views, config.threads);
    const auto& m = bundle.models.front();
    ConsistencyMatrix single;
    single.viewpoint_ids = {m.map.viewpoint_id()};
    single.values = {{propagation_consistency(m.map, m.projection, m.map, m.projection).pc}};
    return single;
  });
  bundle.dataset = std::move(dataset);
  return bundle;
}

std::string bundle_to_text(const WorkspaceBundle& bundle) {
  json models = json::array();
  for (const auto& m : bundle.models) {
    json areas = json::array();
    for (const auto& a : m.areas) areas.push_back(codec::encode(a, m.map.grid()));
    models.push_back({{"viewpoint", m.map.viewpoint_id()},
                      {"map", codec::encode(m.map)},
                      {"projection", codec::encode(m.projection)},
                      {"scan", codec::encode(m.scan)},
                      {"labels", codec::encode_labels(m.labels)},
                      {"areas", std::move(areas)}});
  }
  const json j = {{"format", "multisom-bundle"},
                  {"version", codec::kFormatVersion},
                  {"config", config_json(bundle.config, false)},
                  {"dataset", codec::encode(bundle.dataset)},
                  {"models", std::move(models)},
                  {"consistency", codec::encode(bundle.consistency)}};
  return codec::dump(j);
}

WorkspaceBundle bundle_from_text(const std::string& text) {
  const json j = codec::parse_document(text, "bundle");
  const std::string what = "bundle";
  if (!j.is_object() || j.value("format", "") != "multisom-bundle") {
    throw ParseError(what + ": expected format 'multisom-bundle'");
  }
  if (j.value("version", -1) != codec::kFormatVersion) throw ParseError(what + ": unsupported format version");

  WorkspaceBundle b;
  b.config = decode_config(codec::require(j, "config", what), {});
  b.dataset = codec::decode_dataset(codec::require(j, "dataset", what), what + ".dataset");
  const json& models = codec::require(j, "models", what);
  if (!models.is_array() || models.empty()) throw ParseError(what + ".models: expected a non-empty array");
  for (std::size_t i = 0; i < models.size(); ++i) {
    const std::string where = what + ".models[" + std::to_string(i) + "]";
    ViewpointModel m;
    m.map = codec::decode_map(codec::require(models[i], "map", where), where + ".map");
    m.projection = codec::decode_projection(codec::require(models[i], "projection", where), where + ".projection");
    m.scan = codec::decode_scan(codec::require(models[i], "scan", where), where + ".scan");
    m.labels = codec::decode_labels(codec::require(models[i], "labels", where), where + ".labels");
    m.areas = codec::decode_areas(codec::require(models[i], "areas", where), where + ".areas");
    if (m.projection.map_id != m.map.viewpoint_id() || m.projection.node_count != m.map.node_count() ||
        m.labels.size() != static_cast<std::size_t>(m.map.node_count())) {
      throw ParseError(where + ": projection or labels do not match the map");
    }
    if (b.dataset.find_viewpoint(m.map.viewpoint_id()) == nullptr) {
      throw ParseError(where + ": viewpoint '" + m.map.viewpoint_id() + "' missing from the dataset");
    }
    if (b.find(m.map.viewpoint_id()) != nullptr) throw ParseError(where + ": duplicate viewpoint");
    b.models.push_back(std::move(m));
  }
  b.consistency = codec::decode_matrix(codec::require(j, "consistency", what), what + ".consistency");
  return b;
}

void save_bundle(const WorkspaceBundle& bundle, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << bundle_to_text(bundle);
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

WorkspaceBundle load_bundle(const fs::path& path) { return bundle_from_text(read_file(path)); }

std::string zoning_to_text(const ViewpointModel& model, const ViewpointMatrix& matrix) {
  const GridShape& grid = model.map.grid();
  std::vector<int> area_of(static_cast<std::size_t>(grid.node_count()), -1);
  json areas = json::array();
  for (const auto& a : model.areas) {
    for (NodeIndex k : a.nodes) area_of[static_cast<std::size_t>(k)] = a.area_id;
    areas.push_back(codec::encode(a, grid));
  }
  const auto members = model.projection.members();
  json nodes = json::array();
  for (NodeIndex k = 0; k < grid.node_count(); ++k) {
    const GridCoord c = grid.coord(k);
    json ranking = json::array();
    for (const auto& s : node_feature_ranking(model.projection, matrix, k)) {
      ranking.push_back(json::array({s.feature, s.weight}));
    }
    const auto& label = model.labels[static_cast<std::size_t>(k)];
    const int area = area_of[static_cast<std::size_t>(k)];
    nodes.push_back({{"node", k},
                     {"a", c.a},
                     {"b", c.b},
                     {"label", label ? json(*label) : json(nullptr)},
                     {"area", area >= 0 ? json(area) : json(nullptr)},
                     {"member_count", members[static_cast<std::size_t>(k)].size()},
                     {"ranking", std::move(ranking)}});
  }
  return codec::dump({{"format", "multisom-zoning"},
                      {"version", codec::kFormatVersion},
                      {"viewpoint", model.map.viewpoint_id()},
                      {"width", grid.width},
                      {"height", grid.height},
                      {"areas", std::move(areas)},
                      {"nodes", std::move(nodes)}});
}

}  // namespace multisom
