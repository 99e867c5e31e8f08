#pragma once

// Ingestion of weighted digraphs and dataset manifests, the censoring /
// binarisation transform, and small CSV utilities.
//
// Edge list format (CSV, UTF-8, LF or CRLF):
//
//   src,dst,weight
//   0,1,0.5
//   1,0,-0.2
//
// Node ids are zero-based and must be below the manifest's node_count.
// Duplicate (src, dst) rows are rejected; self-loops are dropped.
//
// Manifest format (JSON, format_version 1):
//
//   {
//     "format_version": 1,
//     "node_count": 140,
//     "series": [
//       { "graphs": ["s000/t000.csv", "s000/t001.csv"], "response": 1.25 },
//       { "graphs": ["s001/t000.csv", "s001/t001.csv"], "response": null }
//     ]
//   }
//
// Relative graph paths resolve against the manifest's directory. Every
// series must list the same number of graphs. `response` is required; null
// marks an unlabelled series, and labelled series must precede unlabelled
// ones.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "netreg/graph_model.hpp"

namespace netreg {

struct WeightedArc {
  int src;
  int dst;
  double weight;
};

struct WeightedDigraph {
  int node_count = 0;
  std::vector<WeightedArc> arcs;
};

WeightedDigraph parse_weighted_edge_list(std::istream& in, int node_count,
                                         std::string_view source_name = "<stream>");
WeightedDigraph load_weighted_edge_list(const std::filesystem::path& path, int node_count);
void write_weighted_edge_list(const std::filesystem::path& path, const WeightedDigraph& g);

/// How reciprocal arcs i->j and j->i combine into one undirected weight.
enum class SymmetrizeRule { max, sum, mean };
std::string_view to_string(SymmetrizeRule rule) noexcept;
SymmetrizeRule parse_symmetrize_rule(std::string_view text);

/// Percentile with linear interpolation between order statistics
/// (rank = p/100 * (m - 1)). Throws ArgumentError for empty input or p
/// outside [0, 100].
double linear_percentile(std::vector<double> values, double percentile);

/// Percentile of {|w| : w != 0} over the arcs of one digraph (or, pooled,
/// of several). Throws ArgumentError when every weight is zero.
double censoring_threshold(const WeightedDigraph& g, double percentile);
double pooled_censoring_threshold(std::span<const WeightedDigraph> graphs, double percentile);

/// Symmetrise |weights| with `rule`, then keep edges whose undirected weight
/// strictly exceeds `threshold`.
AdjacencyMatrix binarize_at(const WeightedDigraph& g, double threshold,
                            SymmetrizeRule rule = SymmetrizeRule::max);

/// binarize_at(g, censoring_threshold(g, percentile), rule).
AdjacencyMatrix censor_binarize(const WeightedDigraph& g, double percentile,
                                SymmetrizeRule rule = SymmetrizeRule::max);

struct SeriesEntry {
  std::vector<std::filesystem::path> graphs;
  std::optional<double> response;
};

struct DatasetManifest {
  int format_version = 1;
  int node_count = 0;
  std::vector<SeriesEntry> series;
  /// Directory relative paths are resolved against.
  std::filesystem::path base_dir;

  int series_length() const noexcept {
    return series.empty() ? 0 : static_cast<int>(series.front().graphs.size());
  }
  int labeled_count() const noexcept;
  std::filesystem::path resolve(const std::filesystem::path& p) const;
};

/// Throws ParseError (malformed JSON) or ArgumentError (schema violation,
/// message prefixed with the JSON path of the offending field).
DatasetManifest parse_manifest(std::string_view json_text, const std::filesystem::path& base_dir);
DatasetManifest load_manifest(const std::filesystem::path& path);
std::string manifest_to_json(const DatasetManifest& manifest);
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

/// Ingest graph `position` (1-based) of every series, censor and binarise
/// it, and attach the labelled responses.
GraphCollection ingest_position(const DatasetManifest& manifest, int position, double percentile,
                                SymmetrizeRule rule = SymmetrizeRule::max,
                                bool pooled_threshold = false);

// CSV helpers -------------------------------------------------------------

/// Shortest representation that round-trips exactly; "nan", "inf", "-inf".
std::string format_double(double value);
double parse_double(std::string_view text);

/// Split one CSV line on commas (no quoting; the formats here never need it).
std::vector<std::string_view> split_csv_line(std::string_view line);

/// Reads a whole CSV file: header plus rows. Trailing CR is stripped.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
CsvTable read_csv(const std::filesystem::path& path);

/// Writes `index,z_hat,response` rows (1-based index; empty response for
/// unlabelled points).
void write_embedding_csv(const std::filesystem::path& path, std::span<const double> embedding,
                         std::span<const double> responses);

/// Writes a labelled square matrix as CSV with a leading `name` column.
void write_matrix_csv(const std::filesystem::path& path, const std::vector<std::string>& labels,
                      const Eigen::MatrixXd& matrix);

}  // namespace netreg
