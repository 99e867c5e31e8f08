#include "netreg/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "netreg/error.hpp"
#include "netreg/rng.hpp"

namespace netreg {
namespace {

void check_embedding_config(const PredictConfig& c, int graph_count) {
  if (c.d < 1) throw ArgumentError("d must be >= 1");
  if (!(c.lambda > 0.0) || !std::isfinite(c.lambda))
    throw ArgumentError("lambda must be positive and finite");
  if (c.l < 1) throw ArgumentError("l must be >= 1");
  if (c.n_star < c.l)
    throw ArgumentError("n_star (" + std::to_string(c.n_star) + ") must be >= l (" +
                        std::to_string(c.l) + ")");
  if (c.n_star > graph_count)
    throw ArgumentError("n_star (" + std::to_string(c.n_star) + ") exceeds the number of graphs (" +
                        std::to_string(graph_count) + ")");
}

void check_prediction_config(const PredictConfig& c, std::size_t labeled) {
  if (c.r < 1 || c.r > c.l)
    throw ArgumentError("r (" + std::to_string(c.r) + ") must lie in [1, l = " +
                        std::to_string(c.l) + "]");
  if (labeled > static_cast<std::size_t>(c.l))
    throw ArgumentError("s (" + std::to_string(labeled) + ") must not exceed l (" +
                        std::to_string(c.l) + ")");
}

std::vector<Point> leading_points(std::span<const ScaledScorePoint> points, int count,
                                  bool upper_triangle) {
  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k)
    out.push_back(upper_triangle ? points[static_cast<std::size_t>(k)].alt_coords
                                 : points[static_cast<std::size_t>(k)].coords);
  return out;
}

GraphEmbedding embed_scores(const MaseResult& mase, int n, const PredictConfig& config) {
  const auto points = scaled_score_points(mase.scores, n);
  const auto cloud = leading_points(points, config.n_star, false);
  IsomapResult iso = isomap_1d(cloud, config.lambda, config.l, config.smacof);

  GraphEmbedding out;
  out.embedding = std::move(iso.embedding);
  auto& diag = out.diagnostics;
  diag.sparsity = mase.sparsity;
  diag.trace = std::move(iso.trace);
  diag.localization_edges = iso.graph.edges.size();
  const Eigen::MatrixXd& delta = iso.dissimilarities.entries;
  if (delta.rows() > 1) {
    diag.min_dissimilarity = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < delta.rows(); ++i)
      for (Eigen::Index j = i + 1; j < delta.cols(); ++j) {
        diag.min_dissimilarity = std::min(diag.min_dissimilarity, delta(i, j));
        diag.max_dissimilarity = std::max(diag.max_dissimilarity, delta(i, j));
      }
  }
  diag.dissimilarities = std::move(iso.dissimilarities);
  return out;
}

std::vector<double> head(std::span<const double> v, std::size_t count) {
  return {v.begin(), v.begin() + static_cast<std::ptrdiff_t>(count)};
}

std::vector<double> head(const Embedding1D& z, std::size_t count) {
  return {z.values.data(), z.values.data() + count};
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

}  // namespace

GraphEmbedding embed_graphs(const GraphCollection& collection, const PredictConfig& config) {
  collection.validate();
  check_embedding_config(config, collection.size());
  const MaseResult mase = sparse_mase(collection, config.d, config.mase);
  return embed_scores(mase, collection.n(), config);
}

GraphEmbedding embed_graphs(std::span<const Eigen::MatrixXd> matrices, const PredictConfig& config) {
  check_embedding_config(config, static_cast<int>(matrices.size()));
  const MaseResult mase = sparse_mase(matrices, config.d, config.mase);
  return embed_scores(mase, static_cast<int>(matrices.front().rows()), config);
}

double predict_from_embedding(const Embedding1D& z, std::span<const double> responses, int r,
                              RegressionFit* fit) {
  if (responses.size() > static_cast<std::size_t>(z.size()))
    throw ArgumentError("more responses than embedded points");
  if (r < 1 || r > z.size()) throw ArgumentError("prediction index out of range");
  const auto zs = head(z, responses.size());
  const RegressionFit f = fit_slr(zs, responses);
  if (fit) *fit = f;
  return predict_slr(f, z.values(r - 1));
}

Prediction pred_graph_resp(const GraphCollection& collection, const PredictConfig& config) {
  collection.validate();
  check_prediction_config(config, collection.responses.size());
  Prediction out;
  out.stage = embed_graphs(collection, config);
  out.value = predict_from_embedding(out.stage.embedding, collection.responses, config.r, &out.fit);
  return out;
}

Prediction pred_graph_resp(std::span<const Eigen::MatrixXd> matrices,
                           std::span<const double> responses, const PredictConfig& config) {
  check_prediction_config(config, responses.size());
  Prediction out;
  out.stage = embed_graphs(matrices, config);
  out.value = predict_from_embedding(out.stage.embedding, responses, config.r, &out.fit);
  return out;
}

double oracle_prediction(std::span<const double> ts, std::span<const double> ys, int r) {
  if (ys.size() > ts.size()) throw ArgumentError("more responses than regressors");
  if (r < 1 || static_cast<std::size_t>(r) > ts.size())
    throw ArgumentError("prediction index out of range");
  const RegressionFit fit = fit_slr(head(ts, ys.size()), ys);
  return predict_slr(fit, ts[static_cast<std::size_t>(r - 1)]);
}

std::string_view to_string(ExperimentKind kind) noexcept {
  return kind == ExperimentKind::power ? "power" : "consistency";
}

ExperimentKind parse_experiment_kind(std::string_view text) {
  if (text == "consistency") return ExperimentKind::consistency;
  if (text == "power") return ExperimentKind::power;
  throw ArgumentError("unknown experiment '" + std::string(text) + "' (consistency, power)");
}

int floor_power(int N, double exponent) {
  return static_cast<int>(std::floor(std::pow(static_cast<double>(N), exponent) + 1e-9));
}

ScheduleEntry paper_consistency_entry(int K) {
  if (K < 1) throw ArgumentError("K must be >= 1");
  ScheduleEntry e;
  e.K = K;
  e.n = 500 + 150 * (K - 1);
  e.N = 15 + (K - 1);
  e.n_star = floor_power(e.N, 0.75);
  e.lambda = 2.0 * std::pow(0.99, K - 1);
  return e;
}

ScheduleEntry desk_consistency_entry(int K) {
  ScheduleEntry e = paper_consistency_entry(K);
  e.n = 200 + 100 * (K - 1);
  return e;
}

ScheduleEntry paper_power_entry(int K) {
  if (K < 1) throw ArgumentError("K must be >= 1");
  ScheduleEntry e;
  e.K = K;
  e.n = 16 + 4 * (K - 1);
  e.N = 12 + (K - 1);
  e.n_star = floor_power(e.N, 0.85);
  e.lambda = 0.95 * std::pow(0.99, K - 1);
  return e;
}

void ExperimentConfig::validate() const {
  if (schedule.empty()) throw ArgumentError("schedule is empty");
  if (replicates < 1) throw ArgumentError("replicates must be >= 1");
  if (labeled < 2) throw ArgumentError("s must be >= 2");
  if (kind == ExperimentKind::power && labeled < 3)
    throw ArgumentError("the F test needs s >= 3");
  if (labeled > l) throw ArgumentError("s must not exceed l");
  if (kind == ExperimentKind::consistency && (r < 1 || r > l))
    throw ArgumentError("r must lie in [1, l]");
  if (d < 1) throw ArgumentError("d must be >= 1");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ArgumentError("sigma must be >= 0");
  if (!std::isfinite(alpha) || !std::isfinite(beta)) throw ArgumentError("alpha, beta must be finite");
  if (!(level > 0.0 && level < 1.0)) throw RangeError("level must lie in (0, 1)");
  if (!(t_min >= 0.0 && t_min < t_max && t_max <= max_admissible_t(variant)))
    throw RangeError("regressor range must satisfy 0 <= t_min < t_max <= " +
                     std::to_string(max_admissible_t(variant)));
  if (threads < 1) throw ArgumentError("threads must be >= 1");
  for (const auto& e : schedule) {
    const std::string at = "schedule entry K=" + std::to_string(e.K) + ": ";
    if (e.n < 2 || e.n % 2 != 0) throw ArgumentError(at + "n must be even and >= 2");
    if (e.N < e.n_star) throw ArgumentError(at + "n_star must not exceed N");
    if (e.n_star < l) throw ArgumentError(at + "n_star must be >= l");
    if (!(e.lambda > 0.0)) throw ArgumentError(at + "lambda must be positive");
    if (d > e.n) throw ArgumentError(at + "d must not exceed n");
  }
}

std::uint64_t replicate_seed(std::uint64_t base_seed, int K, int replicate) noexcept {
  return derive_seed(derive_seed(base_seed, static_cast<std::uint64_t>(K)),
                     static_cast<std::uint64_t>(replicate));
}

ReplicateRecord run_replicate(const ExperimentConfig& config, const ScheduleEntry& entry,
                              int replicate) {
  ReplicateRecord rec;
  rec.K = entry.K;
  rec.replicate = replicate;
  rec.seed = replicate_seed(config.base_seed, entry.K, replicate);
  rec.n = entry.n;
  rec.N = entry.N;
  rec.n_star = entry.n_star;
  rec.lambda = entry.lambda;

  try {
    SplitMix64 rng(rec.seed);
    std::vector<double> ts(static_cast<std::size_t>(entry.N));
    for (double& t : ts) t = rng.uniform(config.t_min, config.t_max);
    std::vector<double> ys(static_cast<std::size_t>(config.labeled));
    for (std::size_t k = 0; k < ys.size(); ++k)
      ys[k] = config.alpha + config.beta * ts[k] + rng.normal(0.0, config.sigma);

    PredictConfig pc;
    pc.d = config.d;
    pc.lambda = entry.lambda;
    pc.l = config.l;
    pc.n_star = entry.n_star;
    pc.r = config.r;
    pc.smacof = config.smacof;

    GraphEmbedding stage;
    if (config.noiseless) {
      const CommunityMembership z = balanced_membership(entry.n, 2);
      std::vector<Eigen::MatrixXd> ps;
      ps.reserve(ts.size());
      for (double t : ts)
        ps.push_back(probability_matrix(z, build_block_probability(t, config.variant)).entries());
      stage = embed_graphs(ps, pc);
    } else {
      const GraphCollection graphs =
          sample_collection(ts, entry.n, config.variant, derive_seed(rec.seed, 2));
      stage = embed_graphs(graphs, pc);
    }

    if (config.r >= 1 && config.r <= config.l) {
      const double predicted = predict_from_embedding(stage.embedding, ys, config.r);
      const double target = oracle_prediction(ts, ys, config.r);
      rec.sq_gap = (predicted - target) * (predicted - target);
    }
    if (config.kind == ExperimentKind::power) {
      const TestReport truth = f_test(head(ts, ys.size()), ys, config.level);
      const TestReport proxy = f_test(head(stage.embedding, ys.size()), ys, config.level);
      rec.f_true = truth.f_value;
      rec.f_hat = proxy.f_value;
      rec.reject_true = truth.reject;
      rec.reject_hat = proxy.reject;
    }
    rec.valid = true;
  } catch (const NumericalError& e) {
    rec.valid = false;
    rec.error = e.what();
  }
  return rec;
}

std::vector<KSummary> summarize(ExperimentKind kind, std::span<const ScheduleEntry> schedule,
                                std::span<const ReplicateRecord> records) {
  std::vector<KSummary> out;
  out.reserve(schedule.size());
  for (const auto& e : schedule) {
    KSummary s;
    s.K = e.K;
    s.n = e.n;
    s.N = e.N;
    s.n_star = e.n_star;
    s.lambda = e.lambda;
    std::vector<double> gaps;
    int rejects_true = 0;
    int rejects_hat = 0;
    for (const auto& r : records) {
      if (r.K != e.K) continue;
      if (!r.valid) {
        ++s.failed;
        continue;
      }
      ++s.valid;
      if (std::isfinite(r.sq_gap)) gaps.push_back(r.sq_gap);
      rejects_true += r.reject_true ? 1 : 0;
      rejects_hat += r.reject_hat ? 1 : 0;
    }
    if (!gaps.empty()) {
      double total = 0.0;
      for (double g : gaps) total += g;
      s.mean_sq_gap = total / static_cast<double>(gaps.size());
      s.median_sq_gap = median(gaps);
    }
    if (kind == ExperimentKind::power && s.valid > 0) {
      s.pi_true = static_cast<double>(rejects_true) / s.valid;
      s.pi_hat = static_cast<double>(rejects_hat) / s.valid;
      s.abs_diff = std::abs(s.pi_hat - s.pi_true);
      s.se_true = binomial_standard_error(s.pi_true, s.valid);
      s.se_hat = binomial_standard_error(s.pi_hat, s.valid);
    }
    out.push_back(s);
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const std::size_t per_k = static_cast<std::size_t>(config.replicates);
  const std::size_t total = config.schedule.size() * per_k;

  ExperimentResult result;
  result.kind = config.kind;
  result.records.resize(total);
  result.threads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(config.threads), total));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t task = next++; task < total; task = next++) {
      try {
        result.records[task] =
            run_replicate(config, config.schedule[task / per_k], static_cast<int>(task % per_k));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = total;
      }
    }
  };
  if (result.threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < result.threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  result.summaries = summarize(config.kind, config.schedule, result.records);
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

ExperimentResult run_consistency_experiment(const ExperimentConfig& config) {
  if (config.kind != ExperimentKind::consistency)
    throw ArgumentError("configuration describes a power experiment");
  return run_experiment(config);
}

ExperimentResult run_power_experiment(const ExperimentConfig& config) {
  if (config.kind != ExperimentKind::power)
    throw ArgumentError("configuration describes a consistency experiment");
  return run_experiment(config);
}

AnalysisReport analyze_real_dataset(const DatasetManifest& manifest, const AnalysisOptions& options) {
  if (!(options.lambda > 0.0)) throw ArgumentError("lambda must be positive");
  const GraphCollection collection = ingest_position(manifest, options.position, options.percentile,
                                                     options.rule, options.pooled_threshold);
  AnalysisReport report;
  report.series_count = collection.size();
  report.labeled_count = static_cast<int>(collection.responses.size());
  for (const auto& g : collection.graphs) report.edge_counts.push_back(g.edge_count());

  const MaseResult mase = sparse_mase(collection, options.d);
  report.sparsity = mase.sparsity;
  const auto points = scaled_score_points(mase.scores, collection.n());

  // Correlations between the upper-triangle entries across series.
  const Eigen::Index m = points.front().alt_coords.size();
  Eigen::MatrixXd entries(static_cast<Eigen::Index>(points.size()), m);
  for (std::size_t k = 0; k < points.size(); ++k)
    entries.row(static_cast<Eigen::Index>(k)) = points[k].alt_coords.transpose();
  const Eigen::MatrixXd centered = entries.rowwise() - entries.colwise().mean();
  const Eigen::MatrixXd cov = centered.transpose() * centered;
  const Eigen::VectorXd sd = cov.diagonal().cwiseSqrt();
  report.entry_correlations = cov.array() / (sd * sd.transpose()).array();
  for (int i = 0; i < options.d; ++i)
    for (int j = i; j < options.d; ++j)
      report.entry_labels.push_back("q" + std::to_string(i + 1) + std::to_string(j + 1));

  const int n_star = options.n_star.value_or(report.series_count);
  if (n_star < 1 || n_star > report.series_count)
    throw ArgumentError("n_star must lie in [1, number of series]");
  if (report.labeled_count > n_star)
    throw ArgumentError("n_star must cover every labelled series");
  const auto cloud = leading_points(points, n_star, true);
  IsomapResult iso = isomap_1d(cloud, options.lambda, n_star, options.smacof);
  report.embedding = std::move(iso.embedding);
  report.trace = std::move(iso.trace);

  const auto zs = head(report.embedding, static_cast<std::size_t>(report.labeled_count));
  report.fit = fit_slr(zs, collection.responses);
  report.test = f_test(zs, collection.responses, options.level);
  if (options.local_linear_bandwidth) {
    LocalLinearSummary ll;
    ll.bandwidth = *options.local_linear_bandwidth;
    ll.r_squared = local_linear_r_squared(zs, collection.responses, ll.bandwidth);
    for (double z : zs) ll.fitted.push_back(fit_local_linear(zs, collection.responses, ll.bandwidth, z));
    report.local_linear = std::move(ll);
  }

  if (!options.out_dir.empty()) {
    const auto embedding_csv = options.out_dir / "embedding.csv";
    std::vector<double> all(report.embedding.values.data(),
                            report.embedding.values.data() + report.embedding.size());
    write_embedding_csv(embedding_csv, all, collection.responses);
    report.written_files.push_back(embedding_csv);
    const auto corr_csv = options.out_dir / "correlations.csv";
    write_matrix_csv(corr_csv, report.entry_labels, report.entry_correlations);
    report.written_files.push_back(corr_csv);
  }
  return report;
}

}  // namespace netreg
