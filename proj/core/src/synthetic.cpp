#include <algorithm>
#include <cmath>
#include <set>

#include "multisom/error.hpp"
#include "multisom/ingest.hpp"
#include "multisom/random.hpp"

namespace multisom {

namespace {

std::string numbered(const std::string& prefix, std::size_t i, std::size_t total) {
  const int width = std::max(1, static_cast<int>(std::to_string(total > 0 ? total - 1 : 0).size()));
  std::string digits = std::to_string(i);
  if (digits.size() < static_cast<std::size_t>(width)) digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
  return prefix + digits;
}

// Splits [0, n) into `parts` contiguous blocks whose sizes differ by at most one.
std::pair<int, int> block_range(int n, int parts, int block) {
  const int base = n / parts;
  const int extra = n % parts;
  const int begin = block * base + std::min(block, extra);
  return {begin, begin + base + (block < extra ? 1 : 0)};
}

std::vector<int> balanced_groups(std::size_t n, int groups, Rng& rng) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  rng.shuffle(order);
  std::vector<int> g(n);
  for (std::size_t i = 0; i < n; ++i) g[order[i]] = static_cast<int>(i % static_cast<std::size_t>(groups));
  return g;
}

}  // namespace

SyntheticDataset generate_synthetic_with_groups(const SyntheticSpec& spec) {
  if (spec.item_count < 1) throw Error("synthetic spec: item count must be positive");
  if (spec.group_count < 1 || spec.group_count > spec.item_count) {
    throw Error("synthetic spec: group count must lie in [1, item count]");
  }
  if (!(spec.coupling >= 0.0 && spec.coupling <= 1.0)) throw Error("synthetic spec: coupling must lie in [0, 1]");
  if (spec.viewpoints.empty()) throw Error("synthetic spec: no viewpoints");
  std::set<std::string> ids;
  for (const auto& vp : spec.viewpoints) {
    const int groups = vp.group_count > 0 ? vp.group_count : spec.group_count;
    if (vp.id.empty() || !ids.insert(vp.id).second) throw Error("synthetic spec: viewpoint ids must be unique");
    if (groups > spec.item_count) throw Error("synthetic spec: viewpoint '" + vp.id + "' has more groups than items");
    if (vp.feature_count < groups) {
      throw Error("synthetic spec: viewpoint '" + vp.id + "' needs at least one feature per group");
    }
    if (vp.features_per_item < 0 || vp.features_per_item > vp.feature_count / groups) {
      throw Error("synthetic spec: viewpoint '" + vp.id + "' features per item exceeds its smallest block");
    }
    if (vp.max_weight < 1) throw Error("synthetic spec: max weight must be >= 1");
    if (vp.noise_features < 0 || vp.noise_features > vp.feature_count - (vp.feature_count + groups - 1) / groups) {
      throw Error("synthetic spec: viewpoint '" + vp.id + "' has more noise features than features outside a block");
    }
    if (!(vp.coverage > 0.0 && vp.coverage <= 1.0)) throw Error("synthetic spec: coverage must lie in (0, 1]");
  }

  const auto n = static_cast<std::size_t>(spec.item_count);
  Rng rng(spec.seed);
  SyntheticDataset out;
  for (std::size_t i = 0; i < n; ++i) out.dataset.items.push_back({numbered("item", i, n), {}});

  const std::vector<int> latent = balanced_groups(n, spec.group_count, rng);

  for (const auto& vp : spec.viewpoints) {
    const int groups = vp.group_count > 0 ? vp.group_count : spec.group_count;
    const std::vector<int> independent = balanced_groups(n, groups, rng);
    std::vector<int> group(n);
    for (std::size_t i = 0; i < n; ++i) {
      const int coupled = static_cast<int>(static_cast<long long>(latent[i]) * groups / spec.group_count);
      group[i] = rng.bernoulli(spec.coupling) ? coupled : independent[i];
    }

    std::vector<std::size_t> present(n);
    for (std::size_t i = 0; i < n; ++i) present[i] = i;
    std::size_t keep = n;
    if (vp.coverage < 1.0) {
      rng.shuffle(present);
      keep = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(vp.coverage * static_cast<double>(n))));
      present.resize(keep);
      std::sort(present.begin(), present.end());
    }

    std::vector<RawEntry> raw;
    const auto fcount = static_cast<std::size_t>(vp.feature_count);
    for (std::size_t i : present) {
      const auto [begin, end] = block_range(vp.feature_count, groups, group[i]);
      std::vector<int> block;
      for (int f = begin; f < end; ++f) block.push_back(f);
      std::size_t take = vp.features_per_item == 0 ? block.size() : static_cast<std::size_t>(vp.features_per_item);
      take = std::min(take, block.size());
      // Partial Fisher-Yates: the first `take` slots become a uniform sample.
      for (std::size_t s = 0; s < take; ++s) {
        std::swap(block[s], block[s + rng.index(block.size() - s)]);
      }
      std::vector<int> picked(block.begin(), block.begin() + static_cast<std::ptrdiff_t>(take));
      if (vp.noise_features > 0) {
        std::vector<int> outside;
        for (int f = 0; f < vp.feature_count; ++f) {
          if (f < begin || f >= end) outside.push_back(f);
        }
        const auto extra = static_cast<std::size_t>(vp.noise_features);
        for (std::size_t s = 0; s < extra; ++s) {
          std::swap(outside[s], outside[s + rng.index(outside.size() - s)]);
        }
        picked.insert(picked.end(), outside.begin(), outside.begin() + static_cast<std::ptrdiff_t>(extra));
      }
      for (int f : picked) {
        const double w = vp.max_weight == 1 ? 1.0 : 1.0 + static_cast<double>(rng.index(static_cast<std::uint64_t>(vp.max_weight)));
        raw.push_back({out.dataset.items[i].id, numbered(vp.id + "-f", static_cast<std::size_t>(f), fcount), w});
      }
    }
    out.dataset.viewpoints.push_back(build_viewpoint_matrix(vp.id, raw));
    out.groups.push_back(std::move(group));
  }
  return out;
}

Dataset generate_synthetic(const SyntheticSpec& spec) { return generate_synthetic_with_groups(spec).dataset; }

WebCorpusFixture generate_web_corpus_fixture(std::uint64_t seed) {
  constexpr int kKernel = 438;
  constexpr int kGroups = 8;
  constexpr int kTowns = 96;
  constexpr int kSubcodes = 92;  // plus the selection code itself: 93 sub-domain features
  constexpr int kOutlinkers = 386;
  constexpr int kOutTargets = 2079;
  constexpr int kInlinked = 388;
  constexpr int kInSources = 2839;
  constexpr int kExternal = 40;

  Rng rng(seed);
  WebCorpusFixture fx;
  SiteTable geo_table;
  SiteTable domain_table;
  SiteTable link_table;

  std::vector<std::string> kernel(kKernel);
  for (int i = 0; i < kKernel; ++i) kernel[i] = "http://" + numbered("lab", static_cast<std::size_t>(i), kKernel) + ".de";
  const std::vector<int> group = balanced_groups(kKernel, kGroups, rng);
  std::vector<std::vector<int>> by_group(kGroups);
  for (int i = 0; i < kKernel; ++i) by_group[static_cast<std::size_t>(group[i])].push_back(i);

  auto member_of = [&](int g, const std::vector<bool>* eligible) {
    const auto& pool = by_group[static_cast<std::size_t>(g)];
    for (;;) {
      const int i = pool[rng.index(pool.size())];
      if (eligible == nullptr || (*eligible)[static_cast<std::size_t>(i)]) return i;
    }
  };

  // Towns: every town used at least once, otherwise drawn from the item's group block.
  std::vector<std::string> town(kKernel);
  std::vector<bool> has_town(kKernel, false);
  for (int t = 0; t < kTowns; ++t) {
    const int g = t * kGroups / kTowns;
    const auto& pool = by_group[static_cast<std::size_t>(g)];
    int i;
    do {
      i = pool[rng.index(pool.size())];
    } while (has_town[static_cast<std::size_t>(i)]);
    has_town[static_cast<std::size_t>(i)] = true;
    town[static_cast<std::size_t>(i)] = "DE-" + numbered("town", static_cast<std::size_t>(t), kTowns);
  }
  for (int i = 0; i < kKernel; ++i) {
    if (has_town[static_cast<std::size_t>(i)]) continue;
    const auto [b, e] = block_range(kTowns, kGroups, group[i]);
    town[static_cast<std::size_t>(i)] = "DE-" + numbered("town", static_cast<std::size_t>(b + static_cast<int>(rng.index(static_cast<std::uint64_t>(e - b)))), kTowns);
  }

  auto subcode = [&](int c) { return fx.domain_code + "." + numbered("", static_cast<std::size_t>(c + 1), kSubcodes + 1); };
  std::vector<std::set<std::string>> codes(kKernel);
  for (int c = 0; c < kSubcodes; ++c) {
    codes[static_cast<std::size_t>(member_of(c * kGroups / kSubcodes, nullptr))].insert(subcode(c));
  }
  for (int i = 0; i < kKernel; ++i) {
    const auto [b, e] = block_range(kSubcodes, kGroups, group[i]);
    const int extra = 1 + static_cast<int>(rng.index(2));
    for (int x = 0; x < extra; ++x) codes[static_cast<std::size_t>(i)].insert(subcode(b + static_cast<int>(rng.index(static_cast<std::uint64_t>(e - b)))));
  }

  std::vector<int> order(kKernel);
  for (int i = 0; i < kKernel; ++i) order[static_cast<std::size_t>(i)] = i;

  auto pick_subset = [&](int count) {
    rng.shuffle(order);
    std::vector<bool> chosen(kKernel, false);
    for (int i = 0; i < count; ++i) chosen[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = true;
    return chosen;
  };

  std::vector<std::map<std::string, std::int64_t>> out(kKernel);
  std::vector<std::map<std::string, std::int64_t>> in(kKernel);

  auto wire = [&](int universe_size, const char* stem, const std::vector<bool>& eligible, std::int64_t max_count,
                  std::vector<std::map<std::string, std::int64_t>>& links, std::vector<std::string>& urls) {
    for (int j = 0; j < universe_size; ++j) {
      urls.push_back("http://" + numbered(stem, static_cast<std::size_t>(j), static_cast<std::size_t>(universe_size)) + ".eu");
    }
    // Each universe site is linked at least once, from a kernel site of its group.
    for (int j = 0; j < universe_size; ++j) {
      const int g = static_cast<int>(static_cast<long long>(j) * kGroups / universe_size);
      const int i = member_of(g, &eligible);
      links[static_cast<std::size_t>(i)][urls[static_cast<std::size_t>(j)]] += 1 + static_cast<std::int64_t>(rng.index(static_cast<std::uint64_t>(max_count)));
    }
    // Every eligible kernel site gets a few more links inside its group block.
    for (int i = 0; i < kKernel; ++i) {
      if (!eligible[static_cast<std::size_t>(i)]) continue;
      const auto [b, e] = block_range(universe_size, kGroups, group[i]);
      const int extra = 1 + static_cast<int>(rng.index(3));
      for (int x = 0; x < extra; ++x) {
        const int j = b + static_cast<int>(rng.index(static_cast<std::uint64_t>(e - b)));
        links[static_cast<std::size_t>(i)][urls[static_cast<std::size_t>(j)]] += 1 + static_cast<std::int64_t>(rng.index(static_cast<std::uint64_t>(max_count)));
      }
    }
  };

  std::vector<std::string> targets;
  std::vector<std::string> sources;
  wire(kOutTargets, "eu-lab", pick_subset(kOutlinkers), 2, out, targets);
  wire(kInSources, "eu-src", pick_subset(kInlinked), 4, in, sources);

  // Links leaving the universe; the link-restriction step must remove them.
  for (int i = 0; i < kKernel; ++i) {
    if (rng.bernoulli(0.3)) {
      out[static_cast<std::size_t>(i)]["http://" + numbered("ext", rng.index(kExternal), kExternal) + ".com"] += 1;
    }
    if (rng.bernoulli(0.3)) {
      in[static_cast<std::size_t>(i)]["http://" + numbered("ext", rng.index(kExternal), kExternal) + ".com"] += 2;
    }
  }

  auto to_links = [](const std::map<std::string, std::int64_t>& m) {
    std::vector<Link> v;
    for (const auto& [url, count] : m) v.push_back({url, count});
    return v;
  };

  for (int i = 0; i < kKernel; ++i) {
    const auto& url = kernel[static_cast<std::size_t>(i)];
    PartialRecord geo;
    geo.url = url;
    geo.organization = "Research lab " + std::to_string(i);
    geo.geo_code = town[static_cast<std::size_t>(i)];
    geo_table.push_back(std::move(geo));

    PartialRecord dom;
    dom.url = url;
    std::vector<std::string> list{fx.domain_code};
    list.insert(list.end(), codes[static_cast<std::size_t>(i)].begin(), codes[static_cast<std::size_t>(i)].end());
    dom.domain_codes = std::move(list);
    domain_table.push_back(std::move(dom));

    PartialRecord links;
    links.url = url;
    links.outlinks = to_links(out[static_cast<std::size_t>(i)]);
    links.inlinks = to_links(in[static_cast<std::size_t>(i)]);
    links.page_count = 10 + static_cast<std::int64_t>(rng.index(500));
    link_table.push_back(std::move(links));
  }

  // Universe sites outside the kernel: foreign labs, or German sites of another discipline.
  static const char* const kCountries[] = {"FR", "IT", "NL", "ES", "AT", "BE", "SE", "DK", "FI", "PT", "IE", "GR", "LU", "GB"};
  auto add_outsider = [&](const std::string& url, std::size_t j) {
    PartialRecord geo;
    geo.url = url;
    PartialRecord dom;
    dom.url = url;
    geo.organization = "Institute " + url.substr(7, url.size() - 10);
    if (j % 5 == 0) {
      geo.geo_code = "DE-" + numbered("town", rng.index(kTowns), kTowns);
      dom.domain_codes = std::vector<std::string>{"1105"};
    } else {
      geo.geo_code = std::string(kCountries[rng.index(std::size(kCountries))]) + "-city";
      dom.domain_codes = std::vector<std::string>{fx.domain_code};
    }
    geo_table.push_back(std::move(geo));
    domain_table.push_back(std::move(dom));
  };
  for (std::size_t j = 0; j < targets.size(); ++j) add_outsider(targets[j], j);
  for (std::size_t j = 0; j < sources.size(); ++j) add_outsider(sources[j], j);

  fx.tables = {std::move(geo_table), std::move(domain_table), std::move(link_table)};
  return fx;
}

}  // namespace multisom
