#include "multisom/api.hpp"

#include "codec.hpp"
#include "multisom/error.hpp"

namespace multisom {

using codec::json;

namespace {

class ClientError : public Error {
 public:
  using Error::Error;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

ApiResponse reply(int status, const json& j) { return {status, codec::dump(j)}; }
ApiResponse error_reply(int status, const std::string& message) { return reply(status, {{"error", message}}); }

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string current;
  for (char c : path.substr(0, path.find('?'))) {
    if (c == '/') {
      if (!current.empty()) parts.push_back(std::move(current));
      current.clear();
    } else {
      current += c;
    }
  }
  if (!current.empty()) parts.push_back(std::move(current));
  return parts;
}

json parse_body(const std::string& body) {
  try {
    json j = json::parse(body);
    if (!j.is_object()) throw ClientError("request body must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw ClientError("malformed JSON at byte " + std::to_string(e.byte));
  }
}

std::string string_field(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_string()) throw ClientError(std::string("'") + key + "' must be a string");
  return j.at(key).get<std::string>();
}

double theta_field(const json& j) {
  if (!j.contains("theta")) return kDefaultFocusThreshold;
  if (!j.at("theta").is_number()) throw ClientError("'theta' must be a number");
  const double theta = j.at("theta").get<double>();
  if (!(theta > 0.0 && theta <= 1.0)) throw ClientError("'theta' must lie in (0, 1]");
  return theta;
}

const ViewpointModel& model_or_404(const WorkspaceBundle& b, const std::string& id) {
  const ViewpointModel* m = b.find(id);
  if (m == nullptr) throw NotFound("unknown map '" + id + "'");
  return *m;
}

// Explicit node list or area id; empty when neither is given.
std::vector<NodeIndex> selection_field(const json& j, const ViewpointModel& source) {
  if (j.contains("nodes") && j.contains("area")) throw ClientError("give either 'nodes' or 'area', not both");
  if (j.contains("nodes")) {
    const json& nodes = j.at("nodes");
    if (!nodes.is_array() || nodes.empty()) throw ClientError("'nodes' must be a non-empty array");
    std::vector<NodeIndex> out;
    for (const json& n : nodes) {
      if (!n.is_number_integer()) throw ClientError("'nodes' must hold integers");
      const auto k = n.get<std::int64_t>();
      if (k < 0 || k >= source.map.node_count()) {
        throw ClientError("node " + std::to_string(k) + " is outside map '" + source.map.viewpoint_id() + "'");
      }
      out.push_back(static_cast<NodeIndex>(k));
    }
    return out;
  }
  if (j.contains("area")) {
    if (!j.at("area").is_number_integer()) throw ClientError("'area' must be an integer");
    const auto id = j.at("area").get<std::int64_t>();
    for (const auto& a : source.areas) {
      if (a.area_id == id) return a.nodes;
    }
    throw NotFound("unknown area " + std::to_string(id) + " on map '" + source.map.viewpoint_id() + "'");
  }
  return {};
}

}  // namespace

Api::Api(std::shared_ptr<const WorkspaceBundle> bundle) : bundle_(std::move(bundle)) {
  if (!bundle_) throw Error("api needs a bundle");
  json maps = json::array();
  for (const auto& m : bundle_->models) {
    int clusters = 0;
    for (const auto& members : m.projection.members()) clusters += members.empty() ? 0 : 1;
    maps.push_back({{"id", m.map.viewpoint_id()},
                    {"width", m.map.grid().width},
                    {"height", m.map.grid().height},
                    {"dimension", m.map.dimension()},
                    {"items", m.projection.items.size()},
                    {"clusters", clusters},
                    {"areas", m.areas.size()}});
    zoning_payloads_[m.map.viewpoint_id()] = zoning_to_text(m, bundle_->dataset.viewpoint(m.map.viewpoint_id()));
  }
  maps_payload_ = codec::dump({{"maps", std::move(maps)}});
  matrix_payload_ = codec::dump(codec::encode(bundle_->consistency));
}

ApiResponse Api::handle(const ApiRequest& request) const {
  try {
    const auto parts = split_path(request.path);
    if (parts.empty() || parts[0] != kApiVersion) throw NotFound("unknown path '" + request.path + "'");
    const bool get = request.method == "GET";
    const bool post = request.method == "POST";

    if (parts.size() == 2 && parts[1] == "health") {
      if (!get) return error_reply(405, "method not allowed");
      return reply(200, {{"status", "ok"}, {"api", kApiVersion}, {"maps", bundle_->models.size()}});
    }
    if (parts.size() >= 2 && parts[1] == "maps") {
      if (!get) return error_reply(405, "method not allowed");
      if (parts.size() == 2) return {200, maps_payload_};
      if (parts.size() == 3) {
        auto it = zoning_payloads_.find(parts[2]);
        if (it == zoning_payloads_.end()) throw NotFound("unknown map '" + parts[2] + "'");
        return {200, it->second};
      }
    }
    if (parts.size() >= 2 && parts[1] == "consistency") {
      if (!get) return error_reply(405, "method not allowed");
      if (parts.size() == 2) return {200, matrix_payload_};
      if (parts.size() == 4) return consistency_detail(parts[2], parts[3]);
    }
    if (parts.size() == 2 && parts[1] == "propagate") {
      if (!post) return error_reply(405, "method not allowed");
      return propagate(request.body);
    }
    if (parts.size() == 2 && parts[1] == "chain") {
      if (!post) return error_reply(405, "method not allowed");
      return chain(request.body);
    }
    throw NotFound("unknown path '" + request.path + "'");
  } catch (const NotFound& e) {
    return error_reply(404, e.what());
  } catch (const ClientError& e) {
    return error_reply(400, e.what());
  } catch (const Error& e) {
    // Library errors caused by request content (empty focus, bad selection).
    return error_reply(400, e.what());
  } catch (const std::exception& e) {
    return error_reply(500, e.what());
  }
}

ApiResponse Api::propagate(const std::string& body) const {
  const json j = parse_body(body);
  const ViewpointModel& source = model_or_404(*bundle_, string_field(j, "source"));
  const ViewpointModel& target = model_or_404(*bundle_, string_field(j, "target"));
  const double theta = theta_field(j);
  const auto nodes = selection_field(j, source);
  if (nodes.empty()) throw ClientError("propagation needs 'nodes' or 'area'");

  Activation act = activate(source.map, nodes, j.value("evidence", std::string{}));
  if (j.contains("modality")) {
    if (!j.at("modality").is_string()) throw ClientError("'modality' must be a string");
    act.modality = modality_from_string(j.at("modality").get<std::string>());
  }
  const PropagationResult r = multisom::propagate(act, source.projection, target.projection);
  json out = codec::encode(r, target.map.grid(), theta);
  out["activated_sources"] = act.nodes;
  out["modality"] = to_string(act.modality);
  return reply(200, out);
}

ApiResponse Api::chain(const std::string& body) const {
  const json j = parse_body(body);
  const double theta = theta_field(j);
  if (!j.contains("steps") || !j.at("steps").is_array() || j.at("steps").empty()) {
    throw ClientError("'steps' must be a non-empty array");
  }
  std::vector<ChainStep> steps;
  for (const json& s : j.at("steps")) {
    if (!s.is_object()) throw ClientError("each step must be an object");
    ChainStep step;
    step.source_map_id = string_field(s, "source");
    step.target_map_id = string_field(s, "target");
    const ViewpointModel& source = model_or_404(*bundle_, step.source_map_id);
    model_or_404(*bundle_, step.target_map_id);
    step.nodes = selection_field(s, source);
    steps.push_back(std::move(step));
  }
  const auto results = chain_propagation(steps, bundle_->lookup(), theta);
  json out = json::array();
  for (const auto& r : results) out.push_back(codec::encode(r, model_or_404(*bundle_, r.target_map_id).map.grid(), theta));
  return reply(200, {{"theta", theta}, {"steps", std::move(out)}});
}

ApiResponse Api::consistency_detail(const std::string& source, const std::string& target) const {
  const ViewpointModel& s = model_or_404(*bundle_, source);
  const ViewpointModel& t = model_or_404(*bundle_, target);
  return reply(200, codec::encode(propagation_consistency(s.map, s.projection, t.map, t.projection)));
}

}  // namespace multisom
