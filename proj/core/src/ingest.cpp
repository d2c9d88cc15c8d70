#include "multisom/ingest.hpp"

#include <algorithm>
#include <map>

#include "multisom/error.hpp"

namespace multisom {

namespace {

// Sums repeated urls inside one link list, keeping first-seen order.
std::vector<Link> collapse_links(const std::vector<Link>& links) {
  std::vector<Link> out;
  std::map<std::string, std::size_t> pos;
  for (const auto& l : links) {
    if (l.url.empty()) throw Error("link with empty url");
    if (l.count < 0) throw Error("negative link count for '" + l.url + "'");
    auto [it, inserted] = pos.emplace(l.url, out.size());
    if (inserted) {
      out.push_back(l);
    } else {
      out[it->second].count += l.count;
    }
  }
  return out;
}

template <typename T>
void merge_scalar(const std::string& url, const char* field, T& current, bool& seen, const std::optional<T>& incoming,
                  std::vector<std::string>& warnings) {
  if (!incoming) return;
  if (seen && current != *incoming) {
    warnings.push_back("conflicting " + std::string(field) + " for '" + url + "'; keeping the later value");
  }
  current = *incoming;
  seen = true;
}

void merge_links(const std::string& url, const char* field, std::vector<Link>& current,
                 const std::vector<Link>& incoming, std::vector<std::string>& warnings) {
  for (const auto& l : collapse_links(incoming)) {
    auto it = std::find_if(current.begin(), current.end(), [&](const Link& c) { return c.url == l.url; });
    if (it == current.end()) {
      current.push_back(l);
    } else if (it->count != l.count) {
      warnings.push_back("conflicting " + std::string(field) + " count " + url + " -> " + l.url +
                         "; keeping the later value");
      it->count = l.count;
    }
  }
}

}  // namespace

MergeResult merge_site_tables(const std::vector<SiteTable>& tables) {
  struct State {
    SiteRecord record;
    bool has_org = false;
    bool has_geo = false;
    bool has_pages = false;
  };
  std::map<std::string, State> merged;
  MergeResult result;

  for (std::size_t t = 0; t < tables.size(); ++t) {
    for (std::size_t r = 0; r < tables[t].size(); ++r) {
      const PartialRecord& p = tables[t][r];
      if (p.url.empty()) {
        throw Error("record with no url (table " + std::to_string(t + 1) + ", row " + std::to_string(r + 1) + ")");
      }
      State& s = merged[p.url];
      s.record.url = p.url;
      merge_scalar(p.url, "organization", s.record.organization, s.has_org, p.organization, result.warnings);
      merge_scalar(p.url, "geo code", s.record.geo_code, s.has_geo, p.geo_code, result.warnings);
      merge_scalar(p.url, "page count", s.record.page_count, s.has_pages, p.page_count, result.warnings);
      if (p.domain_codes) {
        for (const auto& code : *p.domain_codes) {
          auto& codes = s.record.domain_codes;
          if (std::find(codes.begin(), codes.end(), code) == codes.end()) codes.push_back(code);
        }
      }
      if (p.outlinks) merge_links(p.url, "outlink", s.record.outlinks, *p.outlinks, result.warnings);
      if (p.inlinks) merge_links(p.url, "inlink", s.record.inlinks, *p.inlinks, result.warnings);
    }
  }

  result.records.reserve(merged.size());
  for (auto& [url, s] : merged) result.records.push_back(std::move(s.record));
  return result;
}

SiteTable to_site_table(const std::vector<SiteRecord>& records) {
  SiteTable table;
  table.reserve(records.size());
  for (const auto& r : records) {
    table.push_back(PartialRecord{r.url, r.organization, r.geo_code, r.domain_codes, r.inlinks, r.outlinks,
                                  r.page_count});
  }
  return table;
}

std::vector<SiteRecord> filter_kernel(const std::vector<SiteRecord>& records, const std::string& domain_code,
                                      const std::string& geo_prefix) {
  std::vector<SiteRecord> kept;
  for (const auto& r : records) {
    const bool has_code =
        std::find(r.domain_codes.begin(), r.domain_codes.end(), domain_code) != r.domain_codes.end();
    if (has_code && r.geo_code.starts_with(geo_prefix)) kept.push_back(r);
  }
  return kept;
}

std::vector<SiteRecord> restrict_links(std::vector<SiteRecord> kernel, const std::set<std::string>& universe) {
  auto outside = [&](const Link& l) { return !universe.contains(l.url); };
  for (auto& r : kernel) {
    std::erase_if(r.outlinks, outside);
    std::erase_if(r.inlinks, outside);
  }
  return kernel;
}

Dataset records_to_viewpoints(const std::vector<SiteRecord>& records, const ViewpointOptions& options) {
  Dataset ds;
  std::vector<RawEntry> towns;
  std::vector<RawEntry> domains;
  std::vector<RawEntry> outlinks;
  std::vector<RawEntry> inlinks;

  auto link_weight = [&](const Link& l) {
    if (l.count < 0) throw Error("negative link count for '" + l.url + "'");
    if (options.dedup_links) return l.count > 0 ? 1.0 : 0.0;
    return static_cast<double>(l.count);
  };

  for (const auto& r : records) {
    ds.items.push_back({r.url, r.organization});
    if (!r.geo_code.empty()) towns.push_back({r.url, r.geo_code, 1.0});
    std::set<std::string> codes(r.domain_codes.begin(), r.domain_codes.end());
    for (const auto& code : codes) {
      if (!code.empty()) domains.push_back({r.url, code, 1.0});
    }
    for (const auto& l : r.outlinks) outlinks.push_back({r.url, l.url, link_weight(l)});
    for (const auto& l : r.inlinks) inlinks.push_back({r.url, l.url, link_weight(l)});
  }

  auto add = [&](const char* id, const std::vector<RawEntry>& raw) {
    const bool any = std::any_of(raw.begin(), raw.end(), [](const RawEntry& e) { return e.weight > 0.0; });
    if (any) ds.viewpoints.push_back(build_viewpoint_matrix(id, raw));
  };
  add(kTownsViewpoint, towns);
  add(kSubdomainsViewpoint, domains);
  add(kOutlinksViewpoint, outlinks);
  add(kInlinksViewpoint, inlinks);
  if (ds.viewpoints.empty()) throw Error("all viewpoints are empty");
  return ds;
}

Dataset prepare_sites(const std::vector<SiteTable>& tables, const IngestOptions& options,
                      std::vector<std::string>* warnings) {
  MergeResult merged = merge_site_tables(tables);
  if (warnings != nullptr) {
    warnings->insert(warnings->end(), merged.warnings.begin(), merged.warnings.end());
  }
  std::vector<SiteRecord> records = std::move(merged.records);

  std::set<std::string> universe;
  for (const auto& r : records) universe.insert(r.url);

  if (options.kernel_code.has_value() != options.geo_prefix.has_value()) {
    throw Error("kernel selection needs both a domain code and a geo prefix");
  }
  if (options.kernel_code) records = filter_kernel(records, *options.kernel_code, *options.geo_prefix);
  if (records.empty()) throw Error("kernel selection is empty");
  if (options.restrict_to_universe) records = restrict_links(std::move(records), universe);
  return records_to_viewpoints(records, options.viewpoints);
}

}  // namespace multisom
