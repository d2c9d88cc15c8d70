#pragma once

// JSON encoding shared by the model file, dataset documents, the workspace
// bundle and the query service. Internal to the library.

#include <nlohmann/json.hpp>

#include "multisom/intermap.hpp"
#include "multisom/quality.hpp"
#include "multisom/som.hpp"
#include "multisom/topology.hpp"
#include "multisom/viewpoint.hpp"

namespace multisom::codec {

using json = nlohmann::json;

inline constexpr int kFormatVersion = 1;

/// Throws ParseError naming `what` when the key is missing or has the wrong type.
const json& require(const json& j, const char* key, const std::string& what);

json parse_document(const std::string& text, const std::string& what);
std::string dump(const json& j);

json encode(const TrainingParams& p);
TrainingParams decode_params(const json& j, const std::string& what);

json encode(const ScheduleSpec& s);
ScheduleSpec decode_schedule(const json& j, const std::string& what);

json encode(const SomMap& map);
SomMap decode_map(const json& j, const std::string& what);

json encode(const Projection& p);
Projection decode_projection(const json& j, const std::string& what);

json encode(const Dataset& ds);
Dataset decode_dataset(const json& j, const std::string& what);

json encode(const QualityReport& q);
json encode(const ScanResult& s);
ScanResult decode_scan(const json& j, const std::string& what);

json encode_labels(const NodeLabels& labels);
NodeLabels decode_labels(const json& j, const std::string& what);

json encode(const InformationArea& a, const GridShape& grid);
std::vector<InformationArea> decode_areas(const json& j, const std::string& what);

json encode(const ConsistencyMatrix& m);
ConsistencyMatrix decode_matrix(const json& j, const std::string& what);

json encode(const ConsistencyReport& r);
json encode(const PropagationResult& r, const GridShape& target_grid, double theta);

}  // namespace multisom::codec
