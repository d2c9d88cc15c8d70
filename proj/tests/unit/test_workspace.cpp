#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>

#include "multisom/error.hpp"
#include "multisom/workspace.hpp"
#include "oracles.hpp"

using namespace multisom;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

PipelineConfig small_config() {
  PipelineConfig c;
  c.min_side = 3;
  c.max_side = 5;
  c.seed = 4;
  c.threads = 1;
  return c;
}

}  // namespace

TEST(Config, DefaultsAndEcho) {
  const PipelineConfig c = parse_config("{}");
  EXPECT_EQ(c.min_side, 3);
  EXPECT_EQ(c.max_side, 20);
  EXPECT_EQ(c.theta, 0.1);
  EXPECT_EQ(c.schedule, ScheduleSpec{});
  EXPECT_EQ(c.format, DatasetFormat::json);
  const json echoed = json::parse(config_to_json(c));
  EXPECT_EQ(echoed.at("scan").at("max_side"), 20);
  EXPECT_EQ(echoed.at("theta"), 0.1);
  EXPECT_EQ(echoed.at("training").at("ordering_per_node"), 20.0);
  // The echo parses back to the same configuration.
  const PipelineConfig back = parse_config(config_to_json(c));
  EXPECT_EQ(back.schedule, c.schedule);
  EXPECT_EQ(back.min_side, c.min_side);
  EXPECT_EQ(back.theta, c.theta);
}

TEST(Config, ResolvesRelativeInputAndRejectsUnknownKeys) {
  const PipelineConfig c = parse_config(R"({"input":{"path":"data/x.json","format":"triples"}})", "/base/dir");
  EXPECT_EQ(c.input_path, "/base/dir/data/x.json");
  EXPECT_EQ(c.format, DatasetFormat::triples);
  EXPECT_THROW(parse_config(R"({"sed":1})"), ParseError);
  EXPECT_THROW(parse_config(R"({"input":{"pth":"x"}})"), ParseError);
  EXPECT_THROW(parse_config(R"({"training":{"speed":1}})"), ParseError);
  EXPECT_THROW(parse_config(R"({"scan":{"min_side":9,"max_side":4}})"), ParseError);
  EXPECT_THROW(parse_config(R"({"theta":0})"), ParseError);
  EXPECT_THROW(parse_config(R"({"seed":"one"})"), ParseError);
  EXPECT_THROW(parse_config(R"({"input":{"format":"xml"}})"), ParseError);
  EXPECT_THROW(parse_config("[1,2"), ParseError);
}

TEST(Pipeline, BuildsOneModelPerViewpoint) {
  const WorkspaceBundle b = run_pipeline(small_config(), fixture::desk(2));
  ASSERT_EQ(b.models.size(), 2u);
  EXPECT_EQ(b.config.viewpoints, (std::vector<std::string>{"alpha", "beta"}));
  for (const auto& m : b.models) {
    EXPECT_EQ(m.scan.entries.size(), 3u);
    EXPECT_EQ(m.map.grid().width, m.scan.chosen_side);
    EXPECT_EQ(m.map.grid().height, m.scan.chosen_side);
    EXPECT_EQ(m.projection.items.size(), b.dataset.viewpoint(m.map.viewpoint_id()).row_count());
    EXPECT_EQ(m.labels.size(), static_cast<std::size_t>(m.map.node_count()));
    EXPECT_FALSE(m.areas.empty());
  }
  ASSERT_EQ(b.consistency.values.size(), 2u);
  EXPECT_NEAR(b.consistency.values[0][0], 1.0, 1e-9);
  EXPECT_NEAR(b.consistency.values[1][1], 1.0, 1e-9);
  EXPECT_NE(b.find("beta"), nullptr);
  EXPECT_EQ(b.find("gamma"), nullptr);
  EXPECT_TRUE(b.lookup()("alpha").has_value());
  EXPECT_FALSE(b.lookup()("gamma").has_value());
}

TEST(Pipeline, SelectedSubsetAndSingleViewpoint) {
  PipelineConfig c = small_config();
  c.viewpoints = {"beta"};
  const WorkspaceBundle b = run_pipeline(c, fixture::desk(2));
  ASSERT_EQ(b.models.size(), 1u);
  EXPECT_EQ(b.consistency.viewpoint_ids, std::vector<std::string>{"beta"});
  EXPECT_NEAR(b.consistency.values.at(0).at(0), 1.0, 1e-9);
}

TEST(Pipeline, StageErrorsNameTheStage) {
  PipelineConfig c = small_config();
  c.viewpoints = {"alpha", "missing"};
  try {
    run_pipeline(c, fixture::desk(2));
    FAIL() << "expected a pipeline error";
  } catch (const PipelineError& e) {
    EXPECT_EQ(e.stage(), "select");
    EXPECT_NE(std::string(e.what()).find("missing"), std::string::npos);
  }
  Dataset broken = fixture::desk(2);
  broken.items.pop_back();
  try {
    run_pipeline(small_config(), broken);
    FAIL() << "expected a pipeline error";
  } catch (const PipelineError& e) {
    EXPECT_EQ(e.stage(), "ingest");
  }
  PipelineConfig nofile = small_config();
  nofile.input_path = "/nonexistent/multisom.json";
  try {
    run_pipeline(nofile);
    FAIL() << "expected a pipeline error";
  } catch (const PipelineError& e) {
    EXPECT_EQ(e.stage(), "ingest");
  }
}

TEST(Bundle, TextRoundTripAndDeterminism) {
  const WorkspaceBundle a = run_pipeline(small_config(), fixture::desk(5));
  PipelineConfig threaded = small_config();
  threaded.threads = 4;
  const WorkspaceBundle b = run_pipeline(threaded, fixture::desk(5));
  const std::string text = bundle_to_text(a);
  EXPECT_EQ(bundle_to_text(b), text);  // the thread count is not part of the result

  const WorkspaceBundle back = bundle_from_text(text);
  EXPECT_EQ(bundle_to_text(back), text);
  EXPECT_EQ(back.dataset, a.dataset);
  EXPECT_EQ(back.consistency, a.consistency);
  ASSERT_EQ(back.models.size(), a.models.size());
  for (std::size_t i = 0; i < a.models.size(); ++i) {
    EXPECT_EQ(back.models[i].map, a.models[i].map);
    EXPECT_EQ(back.models[i].projection, a.models[i].projection);
    EXPECT_EQ(back.models[i].scan, a.models[i].scan);
    EXPECT_EQ(back.models[i].labels, a.models[i].labels);
    EXPECT_EQ(back.models[i].areas, a.models[i].areas);
  }
  const fs::path path = fs::temp_directory_path() / "multisom_test_bundle.json";
  save_bundle(a, path);
  EXPECT_EQ(bundle_to_text(load_bundle(path)), text);
  EXPECT_THROW(bundle_from_text("{\"format\":\"multisom-bundle\",\"version\":2}"), Error);
}

TEST(Bundle, FromConfigFileTwiceIsByteIdentical) {
  const fs::path dir = fs::temp_directory_path() / "multisom_test_cfg";
  fs::remove_all(dir);
  fs::create_directories(dir);
  save_dataset(fixture::desk(7), dir / "desk.json", DatasetFormat::json);
  {
    std::ofstream cfg(dir / "cfg.json");
    cfg << R"({"input":{"path":"desk.json"},"scan":{"min_side":3,"max_side":4},"seed":11})";
  }
  const PipelineConfig c = load_config(dir / "cfg.json");
  save_bundle(run_pipeline(c), dir / "a.json");
  save_bundle(run_pipeline(c), dir / "b.json");
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  EXPECT_EQ(slurp(dir / "a.json"), slurp(dir / "b.json"));
}

TEST(Zoning, ExportListsAreasAndNodes) {
  const WorkspaceBundle b = run_pipeline(small_config(), fixture::desk(3));
  const ViewpointModel& m = b.models[0];
  const json z = json::parse(zoning_to_text(m, b.dataset.viewpoint("alpha")));
  EXPECT_EQ(z.at("format"), "multisom-zoning");
  EXPECT_EQ(z.at("areas").size(), m.areas.size());
  EXPECT_EQ(z.at("nodes").size(), static_cast<std::size_t>(m.map.node_count()));
  std::size_t members = 0;
  for (const auto& n : z.at("nodes")) members += n.at("member_count").get<std::size_t>();
  EXPECT_EQ(members, m.projection.items.size());
}
