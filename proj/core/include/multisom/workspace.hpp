#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "multisom/ingest.hpp"
#include "multisom/intermap.hpp"
#include "multisom/quality.hpp"
#include "multisom/som.hpp"
#include "multisom/topology.hpp"

namespace multisom {

/// Declarative pipeline configuration (JSON file). Every default is echoed into
/// the bundle so a bundle records exactly how it was produced.
struct PipelineConfig {
  std::string input_path;  // resolved relative to the config file when loaded from one
  DatasetFormat format = DatasetFormat::json;
  IngestOptions ingest;
  std::vector<std::string> viewpoints;  // empty = every viewpoint of the dataset
  int min_side = 3;
  int max_side = 20;
  std::uint64_t seed = 0;
  double theta = kDefaultFocusThreshold;
  ScheduleSpec schedule;
  unsigned threads = 0;  // 0 = hardware concurrency; does not affect results
};

PipelineConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const PipelineConfig& config);

struct ViewpointModel {
  SomMap map;
  Projection projection;
  ScanResult scan;
  NodeLabels labels;
  std::vector<InformationArea> areas;
};

/// Self-contained result of a pipeline run.
struct WorkspaceBundle {
  PipelineConfig config;
  Dataset dataset;
  std::vector<ViewpointModel> models;  // config viewpoint order
  ConsistencyMatrix consistency;

  const ViewpointModel* find(const std::string& viewpoint_id) const;
  std::vector<MapView> views() const;
  MapLookup lookup() const;
};

/// ingest -> per-viewpoint scan and train -> zone -> consistency matrix.
/// Stage failures surface as PipelineError naming the stage.
WorkspaceBundle run_pipeline(const PipelineConfig& config);

/// Pipeline over an in-memory dataset (skips the ingest stage's file reading).
WorkspaceBundle run_pipeline(const PipelineConfig& config, Dataset dataset);

/// Deterministic text form (JSON, format "multisom-bundle").
std::string bundle_to_text(const WorkspaceBundle& bundle);
WorkspaceBundle bundle_from_text(const std::string& text);
void save_bundle(const WorkspaceBundle& bundle, const std::filesystem::path& path);
WorkspaceBundle load_bundle(const std::filesystem::path& path);

/// Zoning export for one map: areas (id, label, node coordinates, members) and
/// per-node feature rankings.
std::string zoning_to_text(const ViewpointModel& model, const ViewpointMatrix& matrix);

}  // namespace multisom
