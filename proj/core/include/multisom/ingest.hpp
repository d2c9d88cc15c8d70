#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "multisom/viewpoint.hpp"

namespace multisom {

// ---------------------------------------------------------------------------
// Website description tables

struct Link {
  std::string url;
  std::int64_t count = 0;
  bool operator==(const Link&) const = default;
};

struct SiteRecord {
  std::string url;
  std::string organization;
  std::string geo_code;  // "CC-town", e.g. "DE-munich"
  std::vector<std::string> domain_codes;
  std::vector<Link> inlinks;
  std::vector<Link> outlinks;
  std::int64_t page_count = 0;

  bool operator==(const SiteRecord&) const = default;
};

/// A row of one partial description table; absent columns stay empty.
struct PartialRecord {
  std::string url;
  std::optional<std::string> organization;
  std::optional<std::string> geo_code;
  std::optional<std::vector<std::string>> domain_codes;
  std::optional<std::vector<Link>> inlinks;
  std::optional<std::vector<Link>> outlinks;
  std::optional<std::int64_t> page_count;

  bool operator==(const PartialRecord&) const = default;
};

using SiteTable = std::vector<PartialRecord>;

struct MergeResult {
  std::vector<SiteRecord> records;  // one per url, ascending url
  std::vector<std::string> warnings;
};

/// Joins partial tables on url. Scalar conflicts resolve last-writer-wins with a
/// warning; code lists are unioned; links are keyed by url (repeats inside one
/// record are summed, conflicting counts across tables resolve last-writer-wins).
MergeResult merge_site_tables(const std::vector<SiteTable>& tables);

/// Converts merged records back into a single full table (for re-merging and export).
SiteTable to_site_table(const std::vector<SiteRecord>& records);

/// Records whose domain codes contain `domain_code` and whose geo code starts with `geo_prefix`.
std::vector<SiteRecord> filter_kernel(const std::vector<SiteRecord>& records, const std::string& domain_code,
                                      const std::string& geo_prefix);

/// Drops outlinks whose target and inlinks whose source lie outside `universe`.
std::vector<SiteRecord> restrict_links(std::vector<SiteRecord> kernel, const std::set<std::string>& universe);

inline const char* const kTownsViewpoint = "towns";
inline const char* const kSubdomainsViewpoint = "subdomains";
inline const char* const kOutlinksViewpoint = "outlinks";
inline const char* const kInlinksViewpoint = "inlinks";

struct ViewpointOptions {
  bool dedup_links = false;  // weight 1 per distinct link instead of its count
};

/// Four viewpoints: towns (geo code), sub-domains (domain codes), outlinks and
/// inlinks. Towns and domains are binary; links carry counts. Items with no
/// feature in a viewpoint are absent from its rows; empty viewpoints are omitted.
Dataset records_to_viewpoints(const std::vector<SiteRecord>& records, const ViewpointOptions& options = {});

// ---------------------------------------------------------------------------
// Synthetic fixtures

struct SyntheticViewpoint {
  std::string id;
  int feature_count = 0;
  int group_count = 0;        // 0 = dataset group count
  int features_per_item = 3;  // 0 = the item's whole feature block
  int max_weight = 1;         // 1 = binary weights, otherwise uniform in [1, max_weight]
  double coverage = 1.0;      // fraction of items present in the viewpoint
  int noise_features = 0;     // extra features per item drawn from outside its block
  bool operator==(const SyntheticViewpoint&) const = default;
};

/// Items fall into latent groups; each viewpoint partitions its features into
/// one block per group. With coupling 1 every viewpoint uses the latent
/// grouping (coarsened when it has fewer groups); with coupling 0 each
/// viewpoint draws an independent grouping; in between each item keeps its
/// latent group with probability `coupling`.
struct SyntheticSpec {
  int item_count = 0;
  std::vector<SyntheticViewpoint> viewpoints;
  int group_count = 1;
  double coupling = 1.0;
  std::uint64_t seed = 0;
};

struct SyntheticDataset {
  Dataset dataset;
  /// group of each item (by item order) in each viewpoint (by viewpoint order)
  std::vector<std::vector<int>> groups;
};

SyntheticDataset generate_synthetic_with_groups(const SyntheticSpec& spec);
Dataset generate_synthetic(const SyntheticSpec& spec);

/// Shapes of the reference web corpus: a 438-site kernel with 96 towns, 93
/// sub-domains, 386 x 2079 outlinks and 388 x 2839 inlinks, inlink mass above
/// outlink mass. Generated as three partial tables plus non-kernel records and
/// links leaving the universe, so the whole preparation pipeline is exercised.
struct WebCorpusFixture {
  std::vector<SiteTable> tables;
  std::string domain_code = "1203";
  std::string geo_prefix = "DE";
  std::size_t kernel_size = 438;
};

WebCorpusFixture generate_web_corpus_fixture(std::uint64_t seed);

struct IngestOptions {
  std::optional<std::string> kernel_code;  // filter_kernel when set together with geo_prefix
  std::optional<std::string> geo_prefix;
  bool restrict_to_universe = true;  // universe = every url holding a record
  ViewpointOptions viewpoints;
};

/// merge -> filter -> restrict -> viewpoints.
Dataset prepare_sites(const std::vector<SiteTable>& tables, const IngestOptions& options,
                      std::vector<std::string>* warnings = nullptr);

// ---------------------------------------------------------------------------
// File formats

enum class DatasetFormat {
  triples,  // directory: one "<viewpoint>.csv" of item,feature,weight per viewpoint + items.csv
  json,     // single "multisom-dataset" document
  sites,    // directory of tab-separated partial site tables (*.tsv)
};

DatasetFormat dataset_format_from_string(const std::string& s);
std::string to_string(DatasetFormat f);

Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format, const IngestOptions& options = {});
void save_dataset(const Dataset& ds, const std::filesystem::path& path, DatasetFormat format);

std::string dataset_to_json(const Dataset& ds);
Dataset dataset_from_json(const std::string& text);

/// Triples text for one viewpoint: header "item,feature,weight" then one line per cell.
std::string viewpoint_to_triples(const ViewpointMatrix& vp);
std::vector<RawEntry> parse_triples(const std::string& text, const std::string& source_name);

std::string site_table_to_tsv(const SiteTable& table);
SiteTable parse_site_table(const std::string& text, const std::string& source_name);
void save_site_tables(const std::vector<SiteTable>& tables, const std::filesystem::path& dir);

}  // namespace multisom
