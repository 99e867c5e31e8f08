// Command-line front end: simulation experiments, prediction and analysis of
// exported network time series.

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "netreg/error.hpp"
#include "netreg/io.hpp"
#include "netreg/log.hpp"
#include "netreg/mase.hpp"
#include "netreg/pipeline.hpp"
#include "netreg/report_io.hpp"

namespace fs = std::filesystem;
using namespace netreg;

namespace {

constexpr int kExitInvalid = 2;
constexpr int kExitNumerical = 3;

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  double percentile = 25.0;
  std::string symmetrize = "max";
  bool pooled = false;
};

struct SimulateOptions {
  std::string experiment;
  fs::path config;
  fs::path out;
};

struct PredictOptions {
  fs::path manifest;
  int position = 1;
  int d = 2;
  double lambda = 0.0;
  int l = 6;
  int n_star = 0;
  int r = 6;
  std::optional<int> labeled;
};

struct AnalyzeOptions {
  fs::path manifest;
  int position = 1;
  int d = 3;
  double lambda = 0.0;
  double level = 0.05;
  bool local_linear = false;
  double bandwidth = 0.03;
  std::optional<int> n_star;
  fs::path out;
};

struct MaseCommandOptions {
  fs::path manifest;
  int position = 1;
  int d = 2;
  fs::path out;
};

int run_simulate(const SimulateOptions& opt, const GlobalOptions& global) {
  ExperimentConfig config = load_experiment_config(opt.config);
  if (to_string(config.kind) != opt.experiment)
    throw ArgumentError("config describes a '" + std::string(to_string(config.kind)) +
                        "' experiment, not '" + opt.experiment + "'");
  if (global.seed) config.base_seed = *global.seed;
  if (global.threads) config.threads = *global.threads;

  // Small sampled graphs often tie at the d/(d+1) eigenvalue boundary;
  // report a count instead of one line per graph.
  std::atomic<int> warning_count{0};
  std::string first_warning;
  std::mutex first_mutex;
  ExperimentResult result;
  {
    ScopedWarningSink sink([&](std::string_view message) {
      if (warning_count++ == 0) {
        std::lock_guard lock(first_mutex);
        first_warning = message;
      }
    });
    result = run_experiment(config);
  }
  if (warning_count > 0)
    std::fprintf(stderr, "%d warning(s) during the run; first: %s\n", warning_count.load(),
                 first_warning.c_str());
  write_replicate_csv(opt.out / "replicates.csv", config.kind, result.records);
  write_summary_csv(opt.out / "summary.csv", config.kind, result.summaries);

  for (const auto& s : result.summaries) {
    if (config.kind == ExperimentKind::power)
      std::printf("K=%-3d n=%-4d N=%-3d pi*=%.3f pi^=%.3f |diff|=%.3f valid=%d failed=%d\n", s.K, s.n,
                  s.N, s.pi_true, s.pi_hat, s.abs_diff, s.valid, s.failed);
    else
      std::printf("K=%-3d n=%-4d N=%-3d median_sq_gap=%.4g mean_sq_gap=%.4g valid=%d failed=%d\n", s.K,
                  s.n, s.N, s.median_sq_gap, s.mean_sq_gap, s.valid, s.failed);
  }
  for (const auto& r : result.records)
    if (!r.valid)
      std::fprintf(stderr, "replicate K=%d #%d failed: %s\n", r.K, r.replicate, r.error.c_str());
  std::printf("%zu replicates in %.2fs on %d thread(s); results in %s\n", result.records.size(),
              result.wall_seconds, result.threads, opt.out.string().c_str());
  return 0;
}

GraphCollection ingest(const fs::path& manifest_path, int position, const GlobalOptions& global) {
  return ingest_position(load_manifest(manifest_path), position, global.percentile,
                         parse_symmetrize_rule(global.symmetrize), global.pooled);
}

int run_predict(const PredictOptions& opt, const GlobalOptions& global) {
  GraphCollection collection = ingest(opt.manifest, opt.position, global);
  if (opt.labeled) {
    if (*opt.labeled < 2 || *opt.labeled > static_cast<int>(collection.responses.size()))
      throw ArgumentError("--labeled must lie in [2, number of labelled series]");
    collection.responses.resize(static_cast<std::size_t>(*opt.labeled));
  }
  PredictConfig config;
  config.d = opt.d;
  config.lambda = opt.lambda;
  config.l = opt.l;
  config.n_star = opt.n_star > 0 ? opt.n_star : collection.size();
  config.r = opt.r;
  const Prediction p = pred_graph_resp(collection, config);
  const auto& diag = p.stage.diagnostics;
  std::printf("prediction %s\n", format_double(p.value).c_str());
  std::printf("series %d, labelled %zu, n_star %d, l %d, r %d\n", collection.size(),
              collection.responses.size(), config.n_star, config.l, config.r);
  std::printf("sparsity %.6g\n", diag.sparsity);
  std::printf("fit intercept %.6g slope %.6g\n", p.fit.intercept, p.fit.slope);
  std::printf("localization edges %zu, dissimilarity range [%.6g, %.6g]\n", diag.localization_edges,
              diag.min_dissimilarity, diag.max_dissimilarity);
  std::printf("stress %.6g -> %.6g in %d iterations (%s)\n", diag.trace.initial(), diag.trace.final(),
              diag.trace.iterations, diag.trace.converged ? "converged" : "iteration limit");
  std::printf("embedding");
  for (Eigen::Index i = 0; i < p.stage.embedding.values.size(); ++i)
    std::printf(" %.6g", p.stage.embedding.values(i));
  std::printf("\n");
  return 0;
}

int run_analyze(const AnalyzeOptions& opt, const GlobalOptions& global) {
  const DatasetManifest manifest = load_manifest(opt.manifest);
  AnalysisOptions a;
  a.position = opt.position;
  a.d = opt.d;
  a.lambda = opt.lambda;
  a.level = opt.level;
  a.percentile = global.percentile;
  a.rule = parse_symmetrize_rule(global.symmetrize);
  a.pooled_threshold = global.pooled;
  if (opt.local_linear) a.local_linear_bandwidth = opt.bandwidth;
  a.n_star = opt.n_star;
  a.out_dir = opt.out;
  const AnalysisReport report = analyze_real_dataset(manifest, a);

  std::printf("series %d, labelled %d, sparsity %.6g\n", report.series_count, report.labeled_count,
              report.sparsity);
  std::printf("entry correlations (%s", report.entry_labels.front().c_str());
  for (std::size_t i = 1; i < report.entry_labels.size(); ++i)
    std::printf(", %s", report.entry_labels[i].c_str());
  std::printf(")\n");
  for (Eigen::Index i = 0; i < report.entry_correlations.rows(); ++i) {
    for (Eigen::Index j = 0; j < report.entry_correlations.cols(); ++j)
      std::printf("%s%8.3f", j ? " " : "  ", report.entry_correlations(i, j));
    std::printf("\n");
  }
  std::printf("stress %.6g -> %.6g\n", report.trace.initial(), report.trace.final());
  std::printf("fit y = %.6g + %.6g z\n", report.fit.intercept, report.fit.slope);
  std::printf("F = %.6g on (1, %d) df, critical %.6g at level %g, p = %.6g, %s\n",
              report.test.f_value, report.test.df2, report.test.critical_value, report.test.level,
              report.test.p_value, report.test.reject ? "reject H0" : "do not reject H0");
  if (report.local_linear)
    std::printf("local-linear bandwidth %g, R^2 = %.6g\n", report.local_linear->bandwidth,
                report.local_linear->r_squared);
  for (const auto& f : report.written_files) std::printf("wrote %s\n", f.string().c_str());
  return 0;
}

int run_mase(const MaseCommandOptions& opt, const GlobalOptions& global) {
  const GraphCollection collection = ingest(opt.manifest, opt.position, global);
  const MaseResult mase = sparse_mase(collection, opt.d);
  if (opt.out.has_parent_path()) fs::create_directories(opt.out.parent_path());
  std::ofstream out(opt.out, std::ios::binary);
  if (!out) throw IoError("cannot open '" + opt.out.string() + "' for writing");
  out << "graph,i,j,r_hat,q_hat,rho_hat\n";
  const double n = collection.n();
  for (std::size_t k = 0; k < mase.scores.size(); ++k) {
    const Eigen::MatrixXd& r = mase.scores[k].entries;
    for (Eigen::Index i = 0; i < r.rows(); ++i)
      for (Eigen::Index j = 0; j < r.cols(); ++j)
        out << k + 1 << ',' << i + 1 << ',' << j + 1 << ',' << format_double(r(i, j)) << ','
            << format_double(r(i, j) / n) << ',' << format_double(mase.sparsity) << '\n';
  }
  out.flush();
  if (!out) throw IoError("failed writing '" + opt.out.string() + "'");
  std::printf("%zu score matrices (d = %d, sparsity %.6g) written to %s\n", mase.scores.size(), opt.d,
              mase.sparsity, opt.out.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Predict responses attached to networks via spectral embedding and isomap"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions global;
  app.add_option("--seed", global.seed, "Override the base random seed");
  app.add_option("--threads", global.threads, "Worker threads for simulations")->check(CLI::PositiveNumber);
  app.add_option("--percentile", global.percentile, "Censoring percentile of non-zero |weights|")
      ->check(CLI::Range(0.0, 100.0))
      ->capture_default_str();
  app.add_option("--symmetrize", global.symmetrize, "Reciprocal arc rule")
      ->check(CLI::IsMember({"max", "sum", "mean"}))
      ->capture_default_str();
  app.add_flag("--pooled-threshold", global.pooled, "One censoring threshold across all series");

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Run a Monte Carlo experiment");
  simulate->add_option("experiment", sim.experiment, "consistency or power")
      ->required()
      ->check(CLI::IsMember({"consistency", "power"}));
  simulate->add_option("--config", sim.config, "Experiment configuration (JSON)")->required();
  simulate->add_option("--out", sim.out, "Output directory")->required();

  PredictOptions pred;
  auto* predict = app.add_subcommand("predict", "Predict the response of one series");
  predict->add_option("--manifest", pred.manifest, "Dataset manifest (JSON)")->required();
  predict->add_option("--position", pred.position, "1-based graph index within each series")->required();
  predict->add_option("--d", pred.d, "Embedding dimension")->capture_default_str();
  predict->add_option("--lambda", pred.lambda, "Localization radius")->required();
  predict->add_option("--l", pred.l, "Isomap outputs kept")->capture_default_str();
  predict->add_option("--nstar", pred.n_star, "Points fed to isomap (default: all series)");
  predict->add_option("--r", pred.r, "1-based series to predict")->capture_default_str();
  predict->add_option("--labeled", pred.labeled, "Use only the first s labelled series");

  AnalyzeOptions ana;
  auto* analyze = app.add_subcommand("analyze", "Embed, regress and test a dataset");
  analyze->add_option("--manifest", ana.manifest, "Dataset manifest (JSON)")->required();
  analyze->add_option("--position", ana.position, "1-based graph index within each series")->required();
  analyze->add_option("--d", ana.d, "Embedding dimension")->capture_default_str();
  analyze->add_option("--lambda", ana.lambda, "Localization radius")->required();
  analyze->add_option("--level", ana.level, "Test level")->capture_default_str();
  analyze->add_flag("--local-linear", ana.local_linear, "Also fit a local-linear smoother");
  analyze->add_option("--bandwidth", ana.bandwidth, "Local-linear bandwidth")->capture_default_str();
  analyze->add_option("--nstar", ana.n_star, "Points fed to isomap (default: all series)");
  analyze->add_option("--out", ana.out, "Directory for embedding and correlation CSVs");

  MaseCommandOptions mopt;
  auto* mase = app.add_subcommand("mase", "Write estimated score matrices");
  mase->add_option("--manifest", mopt.manifest, "Dataset manifest (JSON)")->required();
  mase->add_option("--position", mopt.position, "1-based graph index within each series")
      ->capture_default_str();
  mase->add_option("--d", mopt.d, "Embedding dimension")->required();
  mase->add_option("--out", mopt.out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  try {
    if (*simulate) return run_simulate(sim, global);
    if (*predict) return run_predict(pred, global);
    if (*analyze) return run_analyze(ana, global);
    if (*mase) return run_mase(mopt, global);
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const ConnectivityError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return 0;
}
