#pragma once

// End-to-end response prediction for networks and the Monte Carlo
// experiments built on it.

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "netreg/graph_model.hpp"
#include "netreg/io.hpp"
#include "netreg/manifold.hpp"
#include "netreg/mase.hpp"
#include "netreg/regression.hpp"

namespace netreg {

struct PredictConfig {
  int d = 2;
  double lambda = 1.0;   ///< localization radius
  int l = 6;             ///< isomap outputs kept (labelled plus targets)
  int n_star = 6;        ///< leading points fed to isomap
  int r = 6;             ///< 1-based index of the graph to predict
  MaseOptions mase;
  SmacofOptions smacof;
};

struct EmbeddingDiagnostics {
  double sparsity = 0.0;
  StressTrace trace;
  DissimilarityMatrix dissimilarities;
  std::size_t localization_edges = 0;
  double min_dissimilarity = 0.0;  ///< smallest off-diagonal entry
  double max_dissimilarity = 0.0;
};

/// Isomap coordinates of the first l graphs.
struct GraphEmbedding {
  Embedding1D embedding;
  EmbeddingDiagnostics diagnostics;
};

struct Prediction {
  double value = 0.0;
  RegressionFit fit;
  GraphEmbedding stage;
};

/// MASE on every graph, scaled-score vectorisation, isomap over the first
/// n_star points, keeping the first l coordinates. Ignores `config.r`.
/// Throws ArgumentError unless 1 <= l <= n_star <= N and lambda > 0.
GraphEmbedding embed_graphs(const GraphCollection& collection, const PredictConfig& config);
GraphEmbedding embed_graphs(std::span<const Eigen::MatrixXd> matrices, const PredictConfig& config);

/// Fit responses on the first responses.size() coordinates and predict at
/// coordinate r (1-based).
double predict_from_embedding(const Embedding1D& z, std::span<const double> responses, int r,
                              RegressionFit* fit = nullptr);

/// Full prediction. Requires 2 <= s <= l and r <= l on top of the
/// embed_graphs preconditions.
Prediction pred_graph_resp(const GraphCollection& collection, const PredictConfig& config);
Prediction pred_graph_resp(std::span<const Eigen::MatrixXd> matrices,
                           std::span<const double> responses, const PredictConfig& config);

/// Fit on (ts[k], ys[k]) for k < ys.size(); predict at ts[r - 1].
double oracle_prediction(std::span<const double> ts, std::span<const double> ys, int r);

// Monte Carlo experiments ----------------------------------------------------

enum class ExperimentKind { consistency, power };
std::string_view to_string(ExperimentKind kind) noexcept;
ExperimentKind parse_experiment_kind(std::string_view text);

struct ScheduleEntry {
  int K = 1;
  int n = 0;
  int N = 0;
  int n_star = 0;
  double lambda = 0.0;

  friend bool operator==(const ScheduleEntry&, const ScheduleEntry&) = default;
};

/// floor(N^exponent), guarded against pow() landing just below an integer.
int floor_power(int N, double exponent);

/// n = 500 + 150(K-1), N = 15 + (K-1), n* = floor(N^0.75), lambda = 2 * 0.99^(K-1).
ScheduleEntry paper_consistency_entry(int K);
/// As above with n = 200 + 100(K-1).
ScheduleEntry desk_consistency_entry(int K);
/// n = 16 + 4(K-1), N = 12 + (K-1), n* = floor(N^0.85), lambda = 0.95 * 0.99^(K-1).
ScheduleEntry paper_power_entry(int K);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::consistency;
  std::vector<ScheduleEntry> schedule;
  int labeled = 5;        ///< s
  double alpha = 2.0;
  double beta = 5.0;
  double sigma = 0.01;
  CurveVariant variant = CurveVariant::curve_a;
  double t_min = 0.25;
  double t_max = 1.0;
  int replicates = 100;
  std::uint64_t base_seed = 0;
  int d = 2;
  int l = 6;
  int r = 6;
  double level = 0.05;
  int threads = 1;
  /// Use the probability matrices themselves instead of sampled graphs.
  bool noiseless = false;
  SmacofOptions smacof;

  /// Throws ArgumentError on an inconsistent configuration.
  void validate() const;
};

struct ReplicateRecord {
  int K = 0;
  int replicate = 0;
  std::uint64_t seed = 0;
  int n = 0;
  int N = 0;
  int n_star = 0;
  double lambda = 0.0;
  double sq_gap = std::numeric_limits<double>::quiet_NaN();
  bool valid = false;
  // Power experiment only.
  double f_true = std::numeric_limits<double>::quiet_NaN();
  double f_hat = std::numeric_limits<double>::quiet_NaN();
  bool reject_true = false;
  bool reject_hat = false;
  std::string error;  ///< failure message for invalid records (not serialised)
};

struct KSummary {
  int K = 0;
  int n = 0;
  int N = 0;
  int n_star = 0;
  double lambda = 0.0;
  int valid = 0;
  int failed = 0;
  double mean_sq_gap = std::numeric_limits<double>::quiet_NaN();
  double median_sq_gap = std::numeric_limits<double>::quiet_NaN();
  double pi_true = std::numeric_limits<double>::quiet_NaN();
  double pi_hat = std::numeric_limits<double>::quiet_NaN();
  double abs_diff = std::numeric_limits<double>::quiet_NaN();
  double se_true = std::numeric_limits<double>::quiet_NaN();
  double se_hat = std::numeric_limits<double>::quiet_NaN();

  double failure_rate() const noexcept {
    return valid + failed == 0 ? 0.0 : static_cast<double>(failed) / (valid + failed);
  }
};

struct ExperimentResult {
  ExperimentKind kind = ExperimentKind::consistency;
  std::vector<KSummary> summaries;
  /// Ordered by schedule entry, then replicate.
  std::vector<ReplicateRecord> records;
  double wall_seconds = 0.0;
  int threads = 1;
};

/// Seed of replicate `replicate` at schedule index K. Independent of the
/// replicate count, so adding replicates never changes earlier records.
std::uint64_t replicate_seed(std::uint64_t base_seed, int K, int replicate) noexcept;

/// One replicate of either experiment. Failures are caught and recorded.
ReplicateRecord run_replicate(const ExperimentConfig& config, const ScheduleEntry& entry,
                              int replicate);

/// Per-K summaries over valid records, in schedule order.
std::vector<KSummary> summarize(ExperimentKind kind, std::span<const ScheduleEntry> schedule,
                                std::span<const ReplicateRecord> records);

ExperimentResult run_experiment(const ExperimentConfig& config);
/// run_experiment with the kind checked.
ExperimentResult run_consistency_experiment(const ExperimentConfig& config);
ExperimentResult run_power_experiment(const ExperimentConfig& config);

// Real-data analysis ---------------------------------------------------------

struct AnalysisOptions {
  int position = 1;  ///< 1-based graph index within each series
  int d = 3;
  double lambda = 1.0;
  double level = 0.05;
  double percentile = 25.0;
  SymmetrizeRule rule = SymmetrizeRule::max;
  bool pooled_threshold = false;
  std::optional<double> local_linear_bandwidth;
  /// Points fed to isomap; defaults to every series.
  std::optional<int> n_star;
  /// Where CSV outputs go; nothing is written when empty.
  std::filesystem::path out_dir;
  SmacofOptions smacof;
};

struct LocalLinearSummary {
  double bandwidth = 0.0;
  double r_squared = 0.0;
  std::vector<double> fitted;
};

struct AnalysisReport {
  int series_count = 0;
  int labeled_count = 0;
  double sparsity = 0.0;
  std::vector<std::int64_t> edge_counts;
  /// Correlations between the upper-triangle score entries across series.
  Eigen::MatrixXd entry_correlations;
  std::vector<std::string> entry_labels;
  Embedding1D embedding;
  StressTrace trace;
  RegressionFit fit;
  TestReport test;
  std::optional<LocalLinearSummary> local_linear;
  std::vector<std::filesystem::path> written_files;
};

AnalysisReport analyze_real_dataset(const DatasetManifest& manifest, const AnalysisOptions& options);

}  // namespace netreg
