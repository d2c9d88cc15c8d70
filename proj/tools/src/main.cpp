// multisom command-line tool.
//
// Query commands (propagate, chain, consistency detail) go through the same
// Api dispatcher as the HTTP service and print its JSON payload.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "http_service.hpp"
#include "multisom/api.hpp"
#include "multisom/error.hpp"
#include "multisom/ingest.hpp"
#include "multisom/quality.hpp"
#include "multisom/som.hpp"
#include "multisom/workspace.hpp"

namespace fs = std::filesystem;
using namespace multisom;

namespace {

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  if (path.find('/') != std::string::npos && fs::path(path).has_parent_path()) {
    fs::create_directories(fs::path(path).parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
  if (!out) throw Error("write failed for " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::shared_ptr<const Api> open_api(const std::string& bundle_path) {
  auto bundle = std::make_shared<const WorkspaceBundle>(load_bundle(bundle_path));
  return std::make_shared<const Api>(std::move(bundle));
}

int print_response(const ApiResponse& r) {
  std::cout << r.body;
  if (r.status != 200) {
    std::cerr << "multisom: request failed with status " << r.status << '\n';
    return 1;
  }
  return 0;
}

std::string json_string(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out + "\"";
}

std::string int_list(const std::vector<int>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out + "]";
}

// "source:target" or "source:target:1,2,3"
std::string chain_step_json(const std::string& spec) {
  const auto first = spec.find(':');
  if (first == std::string::npos) throw Error("step '" + spec + "' must be source:target[:nodes]");
  const auto second = spec.find(':', first + 1);
  const std::string source = spec.substr(0, first);
  const std::string target = spec.substr(first + 1, second == std::string::npos ? std::string::npos : second - first - 1);
  std::string out = "{\"source\":" + json_string(source) + ",\"target\":" + json_string(target);
  if (second != std::string::npos) {
    std::vector<int> nodes;
    std::stringstream ss(spec.substr(second + 1));
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        nodes.push_back(std::stoi(tok));
      } catch (const std::exception&) {
        throw Error("step '" + spec + "': bad node '" + tok + "'");
      }
    }
    out += ",\"nodes\":" + int_list(nodes);
  }
  return out + "}";
}

// "id:features:groups:per_item[:max_weight[:coverage[:noise]]]"
SyntheticViewpoint parse_viewpoint_spec(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ':')) parts.push_back(tok);
  if (parts.size() < 4 || parts.size() > 7) {
    throw Error("viewpoint spec '" + spec + "' must be id:features:groups:per_item[:max_weight[:coverage[:noise]]]");
  }
  try {
    SyntheticViewpoint vp;
    vp.id = parts[0];
    vp.feature_count = std::stoi(parts[1]);
    vp.group_count = std::stoi(parts[2]);
    vp.features_per_item = std::stoi(parts[3]);
    if (parts.size() > 4) vp.max_weight = std::stoi(parts[4]);
    if (parts.size() > 5) vp.coverage = std::stod(parts[5]);
    if (parts.size() > 6) vp.noise_features = std::stoi(parts[6]);
    return vp;
  } catch (const std::invalid_argument&) {
    throw Error("viewpoint spec '" + spec + "' has a non-numeric field");
  }
}

struct InputArgs {
  std::string path;
  std::string format = "json";
  std::string kernel_code;
  std::string geo_prefix;
  bool no_restrict = false;
  bool dedup_links = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("-i,--input", path, "Dataset path")->required();
    cmd->add_option("-f,--format", format, "json, triples or sites")->capture_default_str();
    cmd->add_option("--kernel-code", kernel_code, "Domain code selecting the kernel (sites input)");
    cmd->add_option("--geo-prefix", geo_prefix, "Geo prefix selecting the kernel (sites input)");
    cmd->add_flag("--no-restrict", no_restrict, "Keep links leaving the site universe (sites input)");
    cmd->add_flag("--dedup-links", dedup_links, "Weight 1 per distinct link instead of its count");
  }

  Dataset load() const {
    IngestOptions opt;
    if (!kernel_code.empty()) opt.kernel_code = kernel_code;
    if (!geo_prefix.empty()) opt.geo_prefix = geo_prefix;
    opt.restrict_to_universe = !no_restrict;
    opt.viewpoints.dedup_links = dedup_links;
    return load_dataset(path, dataset_format_from_string(format), opt);
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-viewpoint self-organizing maps: training, zoning and inter-map analysis"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "multisom 0.3.0");

  // run
  std::string config_path, bundle_out;
  int run_threads = -1;
  auto* run = app.add_subcommand("run", "Run the full pipeline from a JSON config and write a bundle");
  run->add_option("-c,--config", config_path, "Pipeline config")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--output", bundle_out, "Bundle output path")->required();
  run->add_option("--threads", run_threads, "Worker threads (results do not depend on it)");

  // ingest
  InputArgs ingest_in;
  std::string ingest_out, ingest_out_format = "json";
  auto* ingest = app.add_subcommand("ingest", "Load, validate and convert a dataset");
  ingest_in.add_to(ingest);
  ingest->add_option("-o,--output", ingest_out, "Output path");
  ingest->add_option("--output-format", ingest_out_format, "json or triples")->capture_default_str();

  // synth
  std::string synth_out, synth_format = "json";
  bool synth_web_corpus = false, synth_sites = false;
  int synth_items = 200, synth_groups = 4;
  double synth_coupling = 1.0;
  std::uint64_t synth_seed = 0;
  std::vector<std::string> synth_viewpoints;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth->add_option("-o,--output", synth_out, "Output path")->required();
  synth->add_option("--output-format", synth_format, "json or triples")->capture_default_str();
  synth->add_flag("--web-corpus", synth_web_corpus, "Reference web-corpus shaped fixture");
  synth->add_flag("--sites", synth_sites, "With --web-corpus: write the raw partial site tables instead");
  synth->add_option("--items", synth_items)->capture_default_str();
  synth->add_option("--groups", synth_groups)->capture_default_str();
  synth->add_option("--coupling", synth_coupling)->capture_default_str()->check(CLI::Range(0.0, 1.0));
  synth->add_option("--seed", synth_seed)->capture_default_str();
  synth->add_option("--viewpoint", synth_viewpoints, "id:features:groups:per_item[:max_weight[:coverage[:noise]]]");

  // scan
  InputArgs scan_in;
  std::string scan_vp, scan_out;
  int scan_min = 3, scan_max = 20;
  std::uint64_t scan_seed = 0;
  unsigned scan_threads = 0;
  auto* scan = app.add_subcommand("scan", "Train square maps over a side range and report quality");
  scan_in.add_to(scan);
  scan->add_option("-v,--viewpoint", scan_vp)->required();
  scan->add_option("--min-side", scan_min)->capture_default_str();
  scan->add_option("--max-side", scan_max)->capture_default_str();
  scan->add_option("--seed", scan_seed)->capture_default_str();
  scan->add_option("--threads", scan_threads);
  scan->add_option("-o,--output", scan_out, "CSV output (stdout by default)");

  // train
  InputArgs train_in;
  std::string train_vp, train_out;
  int train_w = 0, train_h = 0;
  std::uint64_t train_seed = 0;
  auto* train = app.add_subcommand("train", "Train one map and write the model file");
  train_in.add_to(train);
  train->add_option("-v,--viewpoint", train_vp)->required();
  train->add_option("--width", train_w)->required()->check(CLI::PositiveNumber);
  train->add_option("--height", train_h)->required()->check(CLI::PositiveNumber);
  train->add_option("--seed", train_seed)->capture_default_str();
  train->add_option("-o,--output", train_out, "Model output path");

  // zone
  std::string zone_bundle, zone_map_id, zone_out;
  auto* zone = app.add_subcommand("zone", "Export labels and information areas of one map");
  zone->add_option("-b,--bundle", zone_bundle)->required()->check(CLI::ExistingFile);
  zone->add_option("-m,--map", zone_map_id)->required();
  zone->add_option("-o,--output", zone_out);

  // consistency
  std::string pc_bundle, pc_source, pc_target, pc_out;
  bool pc_json = false;
  auto* consistency = app.add_subcommand("consistency", "Print the consistency matrix or one pair's detail");
  consistency->add_option("-b,--bundle", pc_bundle)->required()->check(CLI::ExistingFile);
  consistency->add_option("--source", pc_source);
  consistency->add_option("--target", pc_target);
  consistency->add_flag("--json", pc_json, "JSON instead of CSV for the matrix");
  consistency->add_option("-o,--output", pc_out);

  // propagate
  std::string prop_bundle, prop_source, prop_target, prop_modality;
  std::vector<int> prop_nodes;
  int prop_area = -1;
  double prop_theta = kDefaultFocusThreshold;
  auto* propagate = app.add_subcommand("propagate", "Activate source nodes and report target activity");
  propagate->add_option("-b,--bundle", prop_bundle)->required()->check(CLI::ExistingFile);
  propagate->add_option("--source", prop_source)->required();
  propagate->add_option("--target", prop_target)->required();
  auto* nodes_opt = propagate->add_option("--nodes", prop_nodes)->delimiter(',');
  auto* area_opt = propagate->add_option("--area", prop_area);
  nodes_opt->excludes(area_opt);
  propagate->add_option("--theta", prop_theta)->capture_default_str();
  propagate->add_option("--modality", prop_modality, "active or inactive");

  // chain
  std::string chain_bundle, chain_request;
  std::vector<std::string> chain_steps;
  double chain_theta = kDefaultFocusThreshold;
  auto* chain = app.add_subcommand("chain", "Run a multi-step propagation");
  chain->add_option("-b,--bundle", chain_bundle)->required()->check(CLI::ExistingFile);
  auto* req_opt = chain->add_option("--request", chain_request, "JSON request file")->check(CLI::ExistingFile);
  auto* step_opt = chain->add_option("--step", chain_steps, "source:target[:n1,n2,...]; no nodes = previous focus");
  req_opt->excludes(step_opt);
  chain->add_option("--theta", chain_theta)->capture_default_str();

  // serve
  std::string serve_bundle, serve_host = "127.0.0.1";
  int serve_port = 8080;
  auto* serve = app.add_subcommand("serve", "Serve a bundle over HTTP");
  serve->add_option("-b,--bundle", serve_bundle)->required()->check(CLI::ExistingFile);
  serve->add_option("--host", serve_host)->capture_default_str();
  serve->add_option("--port", serve_port)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      PipelineConfig cfg = load_config(config_path);
      if (run_threads >= 0) cfg.threads = static_cast<unsigned>(run_threads);
      const WorkspaceBundle bundle = run_pipeline(cfg);
      save_bundle(bundle, bundle_out);
      for (const auto& m : bundle.models) {
        std::cerr << m.map.viewpoint_id() << ": " << m.map.grid().width << "x" << m.map.grid().height << ", "
                  << m.areas.size() << " areas\n";
      }
      return 0;
    }
    if (*ingest) {
      const Dataset ds = ingest_in.load();
      const ValidationReport report = validate_dataset(ds);
      for (const auto& issue : report.issues) {
        std::cerr << "issue: " << issue.kind << " [" << issue.viewpoint << "] " << issue.subject << '\n';
      }
      std::cerr << ds.items.size() << " items\n";
      for (const auto& vp : ds.viewpoints) {
        std::cerr << "  " << vp.viewpoint_id << ": " << vp.row_count() << " x " << vp.dimension() << '\n';
      }
      if (!ingest_out.empty()) {
        save_dataset(ds, ingest_out, dataset_format_from_string(ingest_out_format));
      }
      return report.ok() ? 0 : 1;
    }
    if (*synth) {
      if (synth_web_corpus) {
        const WebCorpusFixture fx = generate_web_corpus_fixture(synth_seed);
        if (synth_sites) {
          save_site_tables(fx.tables, synth_out);
        } else {
          IngestOptions opt;
          opt.kernel_code = fx.domain_code;
          opt.geo_prefix = fx.geo_prefix;
          save_dataset(prepare_sites(fx.tables, opt), synth_out, dataset_format_from_string(synth_format));
        }
        return 0;
      }
      if (synth_sites) throw Error("--sites requires --web-corpus");
      SyntheticSpec spec;
      spec.item_count = synth_items;
      spec.group_count = synth_groups;
      spec.coupling = synth_coupling;
      spec.seed = synth_seed;
      if (synth_viewpoints.empty()) synth_viewpoints = {"alpha:24:0:3", "beta:24:0:3"};
      for (const auto& s : synth_viewpoints) spec.viewpoints.push_back(parse_viewpoint_spec(s));
      save_dataset(generate_synthetic(spec), synth_out, dataset_format_from_string(synth_format));
      return 0;
    }
    if (*scan) {
      const Dataset ds = scan_in.load();
      const ScanResult r = scan_map_sizes(ds.viewpoint(scan_vp), scan_min, scan_max, ScheduleSpec{}, scan_seed,
                                          scan_threads);
      emit(scan_to_table(r), scan_out);
      std::cerr << "chosen side: " << r.chosen_side << '\n';
      return 0;
    }
    if (*train) {
      const Dataset ds = train_in.load();
      const ViewpointMatrix& m = ds.viewpoint(train_vp);
      const SomMap map = train_som(m, train_w, train_h, ScheduleSpec{}.for_grid(train_w, train_h), train_seed);
      std::cerr << "quantization error: " << quantization_error(map, m) << '\n';
      emit(model_to_text(map), train_out);
      return 0;
    }
    if (*zone) {
      const WorkspaceBundle bundle = load_bundle(zone_bundle);
      const ViewpointModel* m = bundle.find(zone_map_id);
      if (m == nullptr) throw Error("unknown map '" + zone_map_id + "'");
      emit(zoning_to_text(*m, bundle.dataset.viewpoint(zone_map_id)), zone_out);
      return 0;
    }
    if (*consistency) {
      if (pc_source.empty() != pc_target.empty()) throw Error("--source and --target go together");
      if (!pc_source.empty()) {
        const auto api = open_api(pc_bundle);
        return print_response(api->handle({"GET", "/v1/consistency/" + pc_source + "/" + pc_target, ""}));
      }
      const WorkspaceBundle bundle = load_bundle(pc_bundle);
      if (pc_json) {
        const Api api(std::make_shared<const WorkspaceBundle>(bundle));
        emit(api.handle({"GET", "/v1/consistency", ""}).body, pc_out);
      } else {
        emit(consistency_to_table(bundle.consistency), pc_out);
      }
      return 0;
    }
    if (*propagate) {
      if (prop_nodes.empty() && prop_area < 0) throw Error("give --nodes or --area");
      std::ostringstream body;
      body << "{\"source\":" << json_string(prop_source) << ",\"target\":" << json_string(prop_target);
      if (!prop_nodes.empty()) body << ",\"nodes\":" << int_list(prop_nodes);
      if (prop_area >= 0) body << ",\"area\":" << prop_area;
      body.precision(17);
      body << ",\"theta\":" << prop_theta;
      if (!prop_modality.empty()) body << ",\"modality\":" << json_string(prop_modality);
      body << "}";
      const auto api = open_api(prop_bundle);
      return print_response(api->handle({"POST", "/v1/propagate", body.str()}));
    }
    if (*chain) {
      std::string body;
      if (!chain_request.empty()) {
        body = read_text(chain_request);
      } else {
        if (chain_steps.empty()) throw Error("give --request or at least one --step");
        std::ostringstream b;
        b.precision(17);
        b << "{\"theta\":" << chain_theta << ",\"steps\":[";
        for (std::size_t i = 0; i < chain_steps.size(); ++i) b << (i ? "," : "") << chain_step_json(chain_steps[i]);
        b << "]}";
        body = b.str();
      }
      const auto api = open_api(chain_bundle);
      return print_response(api->handle({"POST", "/v1/chain", body}));
    }
    if (*serve) {
      HttpService service(open_api(serve_bundle));
      const int port = service.bind(serve_host, serve_port);
      std::cerr << "listening on http://" << serve_host << ":" << port << '\n';
      service.listen();
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "multisom: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
