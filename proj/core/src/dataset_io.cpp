#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "codec.hpp"
#include "multisom/error.hpp"
#include "multisom/ingest.hpp"

namespace multisom {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw Error("cannot format number");
  return {buf, end};
}

// Minimal CSV: fields containing the delimiter, quotes or newlines are quoted.
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line, const std::string& where) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          fields.back() += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  if (quoted) throw ParseError(where + ": unterminated quoted field");
  return fields;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::string line;
  std::istringstream in(text);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

double parse_number(const std::string& s, const std::string& where) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ParseError(where + ": invalid number '" + s + "'");
  }
  return v;
}

std::int64_t parse_integer(const std::string& s, const std::string& where) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw ParseError(where + ": invalid integer '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<fs::path> files_with_extension(const fs::path& dir, const std::string& ext) {
  if (!fs::is_directory(dir)) throw Error("'" + dir.string() + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ext) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

const char* const kSiteColumns[] = {"url", "organization", "geo", "domains", "outlinks", "inlinks", "pages"};

std::string encode_links(const std::vector<Link>& links) {
  std::string out;
  for (std::size_t i = 0; i < links.size(); ++i) {
    if (i > 0) out += ';';
    out += links[i].url + "|" + std::to_string(links[i].count);
  }
  return out;
}

std::vector<Link> decode_links(const std::string& field, const std::string& where) {
  std::vector<Link> links;
  for (const auto& part : split(field, ';')) {
    const auto bar = part.rfind('|');
    if (bar == std::string::npos || bar == 0) throw ParseError(where + ": expected url|count, got '" + part + "'");
    links.push_back({part.substr(0, bar), parse_integer(part.substr(bar + 1), where)});
  }
  return links;
}

std::string join(const std::vector<std::string>& v, char sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += sep;
    out += v[i];
  }
  return out;
}

}  // namespace

DatasetFormat dataset_format_from_string(const std::string& s) {
  if (s == "triples") return DatasetFormat::triples;
  if (s == "json") return DatasetFormat::json;
  if (s == "sites") return DatasetFormat::sites;
  throw Error("unknown dataset format '" + s + "' (expected triples, json or sites)");
}

std::string to_string(DatasetFormat f) {
  switch (f) {
    case DatasetFormat::triples:
      return "triples";
    case DatasetFormat::json:
      return "json";
    case DatasetFormat::sites:
      return "sites";
  }
  return "unknown";
}

std::string dataset_to_json(const Dataset& ds) { return codec::dump(codec::encode(ds)); }

Dataset dataset_from_json(const std::string& text) {
  return codec::decode_dataset(codec::parse_document(text, "dataset"), "dataset");
}

std::string viewpoint_to_triples(const ViewpointMatrix& vp) {
  std::string out = "item,feature,weight\n";
  for (const auto& [id, row] : vp.rows) {
    for (const auto& e : row.entries()) {
      out += csv_field(id) + "," + csv_field(vp.feature_names.at(e.index)) + "," + format_double(e.weight) + "\n";
    }
  }
  return out;
}

std::vector<RawEntry> parse_triples(const std::string& text, const std::string& source_name) {
  std::vector<RawEntry> raw;
  const auto lines = lines_of(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const std::string where = source_name + ":" + std::to_string(n + 1);
    const std::string& line = lines[n];
    if (line.empty() || line[0] == '#') continue;
    if (n == 0 && line == "item,feature,weight") continue;
    const auto fields = split_csv_line(line, where);
    if (fields.size() != 3) {
      throw ParseError(where + ": expected 3 fields (item,feature,weight), got " + std::to_string(fields.size()));
    }
    const double w = parse_number(fields[2], where);
    if (w < 0.0) throw ParseError(where + ": negative weight");
    raw.push_back({fields[0], fields[1], w});
  }
  return raw;
}

std::string site_table_to_tsv(const SiteTable& table) {
  bool has[7] = {true, false, false, false, false, false, false};
  for (const auto& r : table) {
    has[1] |= r.organization.has_value();
    has[2] |= r.geo_code.has_value();
    has[3] |= r.domain_codes.has_value();
    has[4] |= r.outlinks.has_value();
    has[5] |= r.inlinks.has_value();
    has[6] |= r.page_count.has_value();
  }
  std::string out;
  for (int c = 0, first = 1; c < 7; ++c) {
    if (!has[c]) continue;
    out += (first ? "" : "\t") + std::string(kSiteColumns[c]);
    first = 0;
  }
  out += '\n';
  for (const auto& r : table) {
    std::vector<std::string> cells{r.url};
    if (has[1]) cells.push_back(r.organization.value_or(""));
    if (has[2]) cells.push_back(r.geo_code.value_or(""));
    if (has[3]) cells.push_back(join(r.domain_codes.value_or(std::vector<std::string>{}), ';'));
    if (has[4]) cells.push_back(encode_links(r.outlinks.value_or(std::vector<Link>{})));
    if (has[5]) cells.push_back(encode_links(r.inlinks.value_or(std::vector<Link>{})));
    if (has[6]) cells.push_back(r.page_count ? std::to_string(*r.page_count) : "");
    for (const auto& cell : cells) {
      if (cell.find_first_of("\t\n") != std::string::npos) throw Error("site table cell contains a tab or newline");
    }
    out += join(cells, '\t') + '\n';
  }
  return out;
}

SiteTable parse_site_table(const std::string& text, const std::string& source_name) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw ParseError(source_name + ":1: missing header");
  const auto header = split(lines[0], '\t');
  std::vector<int> column(header.size(), -1);
  for (std::size_t i = 0; i < header.size(); ++i) {
    for (int c = 0; c < 7; ++c) {
      if (header[i] == kSiteColumns[c]) column[i] = c;
    }
    if (column[i] < 0) throw ParseError(source_name + ":1: unknown column '" + header[i] + "'");
  }
  if (std::find(column.begin(), column.end(), 0) == column.end()) {
    throw ParseError(source_name + ":1: missing 'url' column");
  }

  SiteTable table;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    if (lines[n].empty()) continue;
    const std::string where = source_name + ":" + std::to_string(n + 1);
    auto cells = split(lines[n], '\t');
    if (cells.size() != header.size()) {
      throw ParseError(where + ": expected " + std::to_string(header.size()) + " columns, got " +
                       std::to_string(cells.size()));
    }
    PartialRecord r;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const std::string& cell = cells[i];
      switch (column[i]) {
        case 0:
          r.url = cell;
          break;
        case 1:
          r.organization = cell;
          break;
        case 2:
          r.geo_code = cell;
          break;
        case 3:
          r.domain_codes = split(cell, ';');
          break;
        case 4:
          r.outlinks = decode_links(cell, where);
          break;
        case 5:
          r.inlinks = decode_links(cell, where);
          break;
        case 6:
          if (!cell.empty()) r.page_count = parse_integer(cell, where);
          break;
      }
    }
    if (r.url.empty()) throw ParseError(where + ": record with no url");
    table.push_back(std::move(r));
  }
  return table;
}

void save_site_tables(const std::vector<SiteTable>& tables, const fs::path& dir) {
  fs::create_directories(dir);
  for (std::size_t t = 0; t < tables.size(); ++t) {
    write_file(dir / ("table" + std::to_string(t + 1) + ".tsv"), site_table_to_tsv(tables[t]));
  }
}

Dataset load_dataset(const fs::path& path, DatasetFormat format, const IngestOptions& options) {
  switch (format) {
    case DatasetFormat::json:
      return codec::decode_dataset(codec::parse_document(read_file(path), path.string()), "dataset");

    case DatasetFormat::triples: {
      Dataset ds;
      std::set<std::string> known;
      const fs::path items_file = path / "items.csv";
      if (fs::exists(items_file)) {
        const auto lines = lines_of(read_file(items_file));
        for (std::size_t n = 0; n < lines.size(); ++n) {
          if (lines[n].empty() || (n == 0 && lines[n] == "id,label")) continue;
          const std::string where = items_file.string() + ":" + std::to_string(n + 1);
          auto fields = split_csv_line(lines[n], where);
          if (fields.size() > 2) throw ParseError(where + ": expected id[,label]");
          ds.items.push_back({fields[0], fields.size() > 1 ? fields[1] : ""});
          known.insert(fields[0]);
        }
      }
      // The manifest fixes viewpoint order; without one, files load in name order.
      std::vector<fs::path> files;
      const fs::path manifest = path / "manifest.txt";
      if (fs::exists(manifest)) {
        const auto lines = lines_of(read_file(manifest));
        if (lines.empty() || lines[0] != "multisom-triples " + std::to_string(codec::kFormatVersion)) {
          throw ParseError(manifest.string() + ":1: expected 'multisom-triples " +
                           std::to_string(codec::kFormatVersion) + "'");
        }
        for (std::size_t n = 1; n < lines.size(); ++n) {
          if (!lines[n].empty()) files.push_back(path / (lines[n] + ".csv"));
        }
      } else {
        files = files_with_extension(path, ".csv");
        std::erase_if(files, [](const fs::path& f) { return f.filename() == "items.csv"; });
      }
      std::set<std::string> row_ids;
      for (const auto& file : files) {
        const auto raw = parse_triples(read_file(file), file.string());
        if (raw.empty()) throw ParseError(file.string() + ": no entries");
        ds.viewpoints.push_back(build_viewpoint_matrix(file.stem().string(), raw));
        for (const auto& [id, row] : ds.viewpoints.back().rows) row_ids.insert(id);
      }
      if (ds.viewpoints.empty()) throw Error("no viewpoint files in '" + path.string() + "'");
      for (const auto& id : row_ids) {
        if (!known.contains(id)) ds.items.push_back({id, ""});
      }
      return ds;
    }

    case DatasetFormat::sites: {
      std::vector<SiteTable> tables;
      for (const auto& file : files_with_extension(path, ".tsv")) {
        tables.push_back(parse_site_table(read_file(file), file.string()));
      }
      if (tables.empty()) throw Error("no site tables (*.tsv) in '" + path.string() + "'");
      return prepare_sites(tables, options);
    }
  }
  throw Error("unknown dataset format");
}

void save_dataset(const Dataset& ds, const fs::path& path, DatasetFormat format) {
  switch (format) {
    case DatasetFormat::json:
      if (path.has_parent_path()) fs::create_directories(path.parent_path());
      write_file(path, dataset_to_json(ds));
      return;
    case DatasetFormat::triples: {
      fs::create_directories(path);
      std::string items = "id,label\n";
      for (const auto& item : ds.items) items += csv_field(item.id) + "," + csv_field(item.label) + "\n";
      write_file(path / "items.csv", items);
      std::string manifest = "multisom-triples " + std::to_string(codec::kFormatVersion) + "\n";
      for (const auto& vp : ds.viewpoints) {
        if (vp.viewpoint_id == "items" || vp.viewpoint_id.find_first_of("/\\\n") != std::string::npos) {
          throw Error("viewpoint id '" + vp.viewpoint_id + "' cannot be used as a triples file name");
        }
        write_file(path / (vp.viewpoint_id + ".csv"), viewpoint_to_triples(vp));
        manifest += vp.viewpoint_id + "\n";
      }
      write_file(path / "manifest.txt", manifest);
      return;
    }
    case DatasetFormat::sites:
      throw Error("the sites format is input-only; use save_site_tables for raw tables");
  }
}

}  // namespace multisom
