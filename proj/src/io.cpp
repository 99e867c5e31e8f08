#include "netreg/io.hpp"

#include <algorithm>
#include <charconv>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "netreg/error.hpp"
#include "netreg/log.hpp"

namespace netreg {
namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool parse_int(std::string_view text, int& out) {
  text = trim(text);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

bool try_parse_double(std::string_view text, double& out) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size() && !text.empty();
}

std::ofstream open_for_writing(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

void finish_writing(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

// Schema validation for the manifest.
[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
  throw ArgumentError(where + ": " + what);
}

const json& require(const json& object, const std::string& key, const std::string& where) {
  if (!object.contains(key)) schema_error(where + "." + key, "missing required field");
  return object.at(key);
}

int require_int(const json& value, const std::string& where) {
  if (!value.is_number_integer()) schema_error(where, "expected an integer");
  return value.get<int>();
}

}  // namespace

WeightedDigraph parse_weighted_edge_list(std::istream& in, int node_count,
                                         std::string_view source_name) {
  if (node_count < 1) throw ArgumentError("node_count must be positive");
  const std::string src(source_name);
  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(in, line)) throw ParseError(src + ": empty file (expected header src,dst,weight)", 1);
  ++line_no;
  {
    const auto cols = split_csv_line(trim(line));
    if (cols.size() != 3 || trim(cols[0]) != "src" || trim(cols[1]) != "dst" ||
        trim(cols[2]) != "weight")
      throw ParseError(src + ":1: header must be 'src,dst,weight'", 1);
  }

  WeightedDigraph g;
  g.node_count = node_count;
  std::map<std::pair<int, int>, std::size_t> seen;
  std::size_t self_loops = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view body = trim(line);
    if (body.empty()) continue;
    const auto cols = split_csv_line(body);
    const std::string at = src + ":" + std::to_string(line_no) + ": ";
    if (cols.size() != 3) throw ParseError(at + "expected 3 fields", line_no);
    int a = 0, b = 0;
    double w = 0.0;
    if (!parse_int(cols[0], a) || !parse_int(cols[1], b))
      throw ParseError(at + "node ids must be integers", line_no);
    if (!try_parse_double(cols[2], w) || !std::isfinite(w))
      throw ParseError(at + "weight '" + std::string(trim(cols[2])) + "' is not a finite number", line_no);
    if (a < 0 || b < 0 || a >= node_count || b >= node_count)
      throw ParseError(at + "node id out of range [0, " + std::to_string(node_count) + ")", line_no);
    if (a == b) {
      ++self_loops;
      continue;
    }
    const auto [it, inserted] = seen.emplace(std::make_pair(a, b), line_no);
    if (!inserted)
      throw ParseError(at + "duplicate arc " + std::to_string(a) + "->" + std::to_string(b) +
                           " (first on line " + std::to_string(it->second) + ")",
                       line_no);
    g.arcs.push_back({a, b, w});
  }
  if (self_loops > 0)
    warn(src + ": dropped " + std::to_string(self_loops) + " self-loop row(s)");
  return g;
}

WeightedDigraph load_weighted_edge_list(const std::filesystem::path& path, int node_count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open edge list '" + path.string() + "'");
  return parse_weighted_edge_list(in, node_count, path.string());
}

void write_weighted_edge_list(const std::filesystem::path& path, const WeightedDigraph& g) {
  std::ofstream out = open_for_writing(path);
  out << "src,dst,weight\n";
  for (const auto& arc : g.arcs) out << arc.src << ',' << arc.dst << ',' << format_double(arc.weight) << '\n';
  finish_writing(out, path);
}

std::string_view to_string(SymmetrizeRule rule) noexcept {
  switch (rule) {
    case SymmetrizeRule::max: return "max";
    case SymmetrizeRule::sum: return "sum";
    case SymmetrizeRule::mean: return "mean";
  }
  return "max";
}

SymmetrizeRule parse_symmetrize_rule(std::string_view text) {
  if (text == "max") return SymmetrizeRule::max;
  if (text == "sum") return SymmetrizeRule::sum;
  if (text == "mean") return SymmetrizeRule::mean;
  throw ArgumentError("unknown symmetrization rule '" + std::string(text) + "' (max, sum, mean)");
}

double linear_percentile(std::vector<double> values, double percentile) {
  if (values.empty()) throw ArgumentError("percentile of an empty set");
  if (!(percentile >= 0.0 && percentile <= 100.0))
    throw ArgumentError("percentile must lie in [0, 100]");
  std::sort(values.begin(), values.end());
  const double rank = percentile / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

double pooled_censoring_threshold(std::span<const WeightedDigraph> graphs, double percentile) {
  std::vector<double> magnitudes;
  for (const auto& g : graphs)
    for (const auto& arc : g.arcs)
      if (arc.weight != 0.0) magnitudes.push_back(std::abs(arc.weight));
  if (magnitudes.empty())
    throw ArgumentError("cannot censor: every edge weight is zero");
  return linear_percentile(std::move(magnitudes), percentile);
}

double censoring_threshold(const WeightedDigraph& g, double percentile) {
  return pooled_censoring_threshold(std::span<const WeightedDigraph>(&g, 1), percentile);
}

AdjacencyMatrix binarize_at(const WeightedDigraph& g, double threshold, SymmetrizeRule rule) {
  struct Pair {
    double max = 0.0;
    double sum = 0.0;
    int arcs = 0;
  };
  std::map<std::pair<int, int>, Pair> pairs;
  for (const auto& arc : g.arcs) {
    if (arc.src == arc.dst) continue;
    auto& p = pairs[{std::min(arc.src, arc.dst), std::max(arc.src, arc.dst)}];
    const double m = std::abs(arc.weight);
    p.max = std::max(p.max, m);
    p.sum += m;
    ++p.arcs;
  }
  AdjacencyMatrix a(g.node_count);
  for (const auto& [key, p] : pairs) {
    double w = p.max;
    if (rule == SymmetrizeRule::sum) w = p.sum;
    if (rule == SymmetrizeRule::mean) w = p.sum / p.arcs;
    if (w > threshold) a.set_edge(key.first, key.second);
  }
  return a;
}

AdjacencyMatrix censor_binarize(const WeightedDigraph& g, double percentile, SymmetrizeRule rule) {
  return binarize_at(g, censoring_threshold(g, percentile), rule);
}

int DatasetManifest::labeled_count() const noexcept {
  int count = 0;
  for (const auto& s : series) {
    if (!s.response) break;
    ++count;
  }
  return count;
}

std::filesystem::path DatasetManifest::resolve(const std::filesystem::path& p) const {
  return p.is_absolute() ? p : base_dir / p;
}

DatasetManifest parse_manifest(std::string_view json_text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) schema_error("$", "expected an object");

  DatasetManifest m;
  m.base_dir = base_dir;
  m.format_version = require_int(require(doc, "format_version", "$"), "$.format_version");
  if (m.format_version != 1) schema_error("$.format_version", "unsupported version (expected 1)");
  m.node_count = require_int(require(doc, "node_count", "$"), "$.node_count");
  if (m.node_count < 2) schema_error("$.node_count", "must be >= 2");

  const json& series = require(doc, "series", "$");
  if (!series.is_array() || series.empty()) schema_error("$.series", "expected a non-empty array");
  bool seen_unlabeled = false;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const std::string where = "$.series[" + std::to_string(i) + "]";
    const json& entry = series[i];
    if (!entry.is_object()) schema_error(where, "expected an object");
    SeriesEntry s;
    const json& graphs = require(entry, "graphs", where);
    if (!graphs.is_array() || graphs.empty()) schema_error(where + ".graphs", "expected a non-empty array");
    for (std::size_t j = 0; j < graphs.size(); ++j) {
      if (!graphs[j].is_string())
        schema_error(where + ".graphs[" + std::to_string(j) + "]", "expected a path string");
      s.graphs.emplace_back(graphs[j].get<std::string>());
    }
    const json& response = require(entry, "response", where);
    if (response.is_null()) {
      seen_unlabeled = true;
    } else {
      if (!response.is_number()) schema_error(where + ".response", "expected a number or null");
      const double y = response.get<double>();
      if (!std::isfinite(y)) schema_error(where + ".response", "must be finite");
      if (seen_unlabeled)
        schema_error(where + ".response", "labelled series must precede unlabelled ones");
      s.response = y;
    }
    if (!m.series.empty() && s.graphs.size() != m.series.front().graphs.size())
      schema_error(where + ".graphs", "series length " + std::to_string(s.graphs.size()) +
                                          " differs from " + std::to_string(m.series.front().graphs.size()));
    m.series.push_back(std::move(s));
  }
  for (const auto& [key, _] : doc.items())
    if (key != "format_version" && key != "node_count" && key != "series")
      schema_error("$." + key, "unknown field");
  return m;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_manifest(buffer.str(), path.parent_path());
}

std::string manifest_to_json(const DatasetManifest& manifest) {
  json doc;
  doc["format_version"] = manifest.format_version;
  doc["node_count"] = manifest.node_count;
  doc["series"] = json::array();
  for (const auto& s : manifest.series) {
    json entry;
    entry["graphs"] = json::array();
    for (const auto& g : s.graphs) entry["graphs"].push_back(g.generic_string());
    entry["response"] = s.response ? json(*s.response) : json(nullptr);
    doc["series"].push_back(std::move(entry));
  }
  return doc.dump(2) + "\n";
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
  std::ofstream out = open_for_writing(path);
  out << manifest_to_json(manifest);
  finish_writing(out, path);
}

GraphCollection ingest_position(const DatasetManifest& manifest, int position, double percentile,
                                SymmetrizeRule rule, bool pooled_threshold) {
  if (position < 1 || position > manifest.series_length())
    throw ArgumentError("position " + std::to_string(position) + " outside the series range [1, " +
                        std::to_string(manifest.series_length()) + "]");
  std::vector<WeightedDigraph> digraphs;
  digraphs.reserve(manifest.series.size());
  for (const auto& s : manifest.series)
    digraphs.push_back(load_weighted_edge_list(
        manifest.resolve(s.graphs[static_cast<std::size_t>(position - 1)]), manifest.node_count));

  GraphCollection out;
  out.graphs.reserve(digraphs.size());
  if (pooled_threshold) {
    const double tau = pooled_censoring_threshold(digraphs, percentile);
    for (const auto& g : digraphs) out.graphs.push_back(binarize_at(g, tau, rule));
  } else {
    for (const auto& g : digraphs) out.graphs.push_back(censor_binarize(g, percentile, rule));
  }
  for (const auto& s : manifest.series) {
    if (!s.response) break;
    out.responses.push_back(*s.response);
  }
  return out;
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw NumericalError("failed to format a double");
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  text = trim(text);
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  if (!try_parse_double(text, v)) throw ParseError("'" + std::string(text) + "' is not a number");
  return v;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  CsvTable table;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    for (auto cell : split_csv_line(line)) cells.emplace_back(cell);
    if (header) {
      table.header = std::move(cells);
      header = false;
    } else {
      if (cells.size() != table.header.size())
        throw ParseError(path.string() + ": row has " + std::to_string(cells.size()) +
                         " fields, header has " + std::to_string(table.header.size()));
      table.rows.push_back(std::move(cells));
    }
  }
  if (header) throw ParseError(path.string() + ": missing header");
  return table;
}

void write_embedding_csv(const std::filesystem::path& path, std::span<const double> embedding,
                         std::span<const double> responses) {
  std::ofstream out = open_for_writing(path);
  out << "index,z_hat,response\n";
  for (std::size_t i = 0; i < embedding.size(); ++i) {
    out << i + 1 << ',' << format_double(embedding[i]) << ',';
    if (i < responses.size()) out << format_double(responses[i]);
    out << '\n';
  }
  finish_writing(out, path);
}

void write_matrix_csv(const std::filesystem::path& path, const std::vector<std::string>& labels,
                      const Eigen::MatrixXd& matrix) {
  if (static_cast<Eigen::Index>(labels.size()) != matrix.rows() || matrix.rows() != matrix.cols())
    throw ArgumentError("matrix CSV needs a square matrix with one label per row");
  std::ofstream out = open_for_writing(path);
  out << "name";
  for (const auto& l : labels) out << ',' << l;
  out << '\n';
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    out << labels[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) out << ',' << format_double(matrix(i, j));
    out << '\n';
  }
  finish_writing(out, path);
}

}  // namespace netreg
