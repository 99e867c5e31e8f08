#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <vector>

#include "netreg/error.hpp"
#include "netreg/log.hpp"
#include "netreg/pipeline.hpp"
#include "netreg/rng.hpp"

using namespace netreg;
namespace fs = std::filesystem;

namespace {

std::vector<Eigen::MatrixXd> noiseless_matrices(const std::vector<double>& ts, int n) {
  const CommunityMembership z = balanced_membership(n, 2);
  std::vector<Eigen::MatrixXd> out;
  for (double t : ts) out.push_back(probability_matrix(z, build_block_probability(t, CurveVariant::curve_a)).entries());
  return out;
}

ExperimentConfig small_consistency() {
  ExperimentConfig c;
  c.kind = ExperimentKind::consistency;
  c.schedule = {{1, 60, 10, 8, 2.0}};
  c.replicates = 4;
  c.base_seed = 11;
  return c;
}

}  // namespace

TEST_CASE("oracle prediction") {
  const std::vector<double> ts = {0.0, 1.0, 2.0, 3.0};
  const std::vector<double> ys = {1.0, 3.0, 5.0};
  CHECK(oracle_prediction(ts, ys, 4) == doctest::Approx(7.0));
  const std::vector<double> noisy = {0.0, 2.0, 1.0};
  // slope 0.5, intercept 0.5
  CHECK(oracle_prediction(ts, noisy, 4) == doctest::Approx(2.0));
  CHECK_THROWS_AS(oracle_prediction(ts, ys, 5), ArgumentError);
  CHECK_THROWS_AS(oracle_prediction(ts, ys, 0), ArgumentError);
}

TEST_CASE("noise-free inputs reproduce the oracle prediction") {
  SplitMix64 rng(5);
  std::vector<double> ts(10);
  for (double& t : ts) t = rng.uniform(0.25, 1.0);
  std::vector<double> ys(5);
  for (std::size_t k = 0; k < ys.size(); ++k) ys[k] = 2.0 + 5.0 * ts[k] + rng.normal(0.0, 0.1);
  const auto ps = noiseless_matrices(ts, 40);
  PredictConfig cfg;
  cfg.lambda = 100.0;
  cfg.n_star = 10;
  cfg.l = 8;
  for (int r = 6; r <= 8; ++r) {
    cfg.r = r;
    const Prediction p = pred_graph_resp(ps, ys, cfg);
    CHECK(p.value == doctest::Approx(oracle_prediction(ts, ys, r)).epsilon(1e-6));
    CHECK(p.stage.embedding.size() == 8);
    CHECK(p.stage.diagnostics.localization_edges == 45);
  }
}

TEST_CASE("prediction argument checks") {
  const std::vector<double> ts = {0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
  const auto ps = noiseless_matrices(ts, 20);
  const std::vector<double> ys = {1, 2, 3};
  PredictConfig cfg;
  cfg.lambda = 10.0;
  cfg.l = 4;
  cfg.n_star = 5;
  cfg.r = 5;
  CHECK_THROWS_AS(pred_graph_resp(ps, ys, cfg), ArgumentError);
  cfg.r = 4;
  cfg.n_star = 7;
  CHECK_THROWS_AS(pred_graph_resp(ps, ys, cfg), ArgumentError);
  cfg.n_star = 5;
  const std::vector<double> many = {1, 2, 3, 4, 5};
  CHECK_THROWS_AS(pred_graph_resp(ps, many, cfg), ArgumentError);
  cfg.lambda = 0.0;
  CHECK_THROWS_AS(pred_graph_resp(ps, ys, cfg), ArgumentError);
  cfg.lambda = 10.0;
  CHECK_NOTHROW(pred_graph_resp(ps, ys, cfg));
}

TEST_CASE("predictions are invariant to affine changes of the embedding") {
  SplitMix64 rng(3);
  Embedding1D z{Eigen::VectorXd(7)};
  for (int i = 0; i < 7; ++i) z.values(i) = rng.normal();
  const std::vector<double> ys = {0.2, 1.4, -0.3, 2.2, 0.9};
  const double base = predict_from_embedding(z, ys, 7);
  for (double scale : {-1.0, 0.01, 37.5}) {
    Embedding1D moved{z.values.array() * scale + 4.25};
    CHECK(predict_from_embedding(moved, ys, 7) == doctest::Approx(base).epsilon(1e-10));
  }
}

TEST_CASE("schedules") {
  CHECK(paper_consistency_entry(1) == ScheduleEntry{1, 500, 15, 7, 2.0});
  const ScheduleEntry c12 = paper_consistency_entry(12);
  CHECK(c12.n == 2150);
  CHECK(c12.N == 26);
  CHECK(c12.n_star == 11);
  CHECK(c12.lambda == doctest::Approx(2.0 * std::pow(0.99, 11)));
  CHECK(desk_consistency_entry(3).n == 400);
  CHECK(paper_power_entry(1) == ScheduleEntry{1, 16, 12, 8, 0.95});
  const ScheduleEntry p20 = paper_power_entry(20);
  CHECK(p20.n == 92);
  CHECK(p20.N == 31);
  CHECK(p20.n_star == 18);
  CHECK_THROWS_AS(paper_power_entry(0), ArgumentError);
}

TEST_CASE("floor_power is exact at perfect powers") {
  CHECK(floor_power(16, 0.75) == 8);
  CHECK(floor_power(81, 0.75) == 27);
  CHECK(floor_power(8, 1.0 / 3.0) == 2);
  CHECK(floor_power(1000, 1.0 / 3.0) == 10);
  for (int N = 1; N <= 200; ++N) {
    const int f = floor_power(N, 0.85);
    CHECK(std::pow(f, 1.0 / 0.85) <= N + 1e-6);
    CHECK(std::pow(f + 1, 1.0 / 0.85) > N);
  }
}

TEST_CASE("replicates are deterministic and isolated by seed") {
  ScopedWarningSink quiet([](std::string_view) {});
  ExperimentConfig c = small_consistency();
  const ReplicateRecord a = run_replicate(c, c.schedule[0], 1);
  const ReplicateRecord b = run_replicate(c, c.schedule[0], 1);
  CHECK(a.seed == b.seed);
  CHECK(a.valid == b.valid);
  if (a.valid) CHECK(a.sq_gap == b.sq_gap);

  const ExperimentResult four = run_experiment(c);
  c.replicates = 2;
  const ExperimentResult two = run_experiment(c);
  REQUIRE(four.records.size() == 4);
  REQUIRE(two.records.size() == 2);
  for (int i = 0; i < 2; ++i) {
    CHECK(two.records[i].seed == four.records[i].seed);
    CHECK(two.records[i].valid == four.records[i].valid);
    if (two.records[i].valid) CHECK(two.records[i].sq_gap == four.records[i].sq_gap);
  }
  CHECK(replicate_seed(11, 1, 0) != replicate_seed(11, 2, 0));
  CHECK(replicate_seed(11, 1, 0) != replicate_seed(11, 1, 1));

  c.replicates = 4;
  c.threads = 3;
  const ExperimentResult threaded = run_experiment(c);
  for (int i = 0; i < 4; ++i) CHECK(threaded.records[i].seed == four.records[i].seed);
  CHECK_THROWS_AS(run_power_experiment(c), ArgumentError);
}

TEST_CASE("summaries skip failed replicates") {
  const std::vector<ScheduleEntry> schedule = {{1, 16, 12, 8, 0.95}, {2, 20, 13, 8, 0.94}};
  std::vector<ReplicateRecord> records(6);
  for (auto& r : records) r.valid = true;
  records[0].K = 1; records[0].sq_gap = 1.0; records[0].reject_true = true;
  records[1].K = 1; records[1].sq_gap = 3.0; records[1].reject_hat = true;
  records[2].K = 1; records[2].valid = false;
  records[3].K = 2; records[3].sq_gap = 4.0;
  records[4].K = 2; records[4].sq_gap = 0.0; records[4].reject_true = true;
  records[5].K = 2; records[5].sq_gap = 8.0; records[5].reject_true = true;
  const auto s = summarize(ExperimentKind::power, schedule, records);
  REQUIRE(s.size() == 2);
  CHECK(s[0].valid == 2);
  CHECK(s[0].failed == 1);
  CHECK(s[0].failure_rate() == doctest::Approx(1.0 / 3.0));
  CHECK(s[0].mean_sq_gap == 2.0);
  CHECK(s[0].median_sq_gap == 2.0);
  CHECK(s[0].pi_true == 0.5);
  CHECK(s[0].pi_hat == 0.5);
  CHECK(s[0].abs_diff == 0.0);
  CHECK(s[1].median_sq_gap == 4.0);
  CHECK(s[1].pi_true == doctest::Approx(2.0 / 3.0));
  CHECK(s[1].se_true == doctest::Approx(std::sqrt(2.0 / 9.0 / 3.0)));
  CHECK(std::isnan(summarize(ExperimentKind::consistency, schedule, records)[0].pi_hat));
}

TEST_CASE("both tests hold their size under a flat response") {
  ScopedWarningSink quiet([](std::string_view) {});
  ExperimentConfig c;
  c.kind = ExperimentKind::power;
  c.schedule = {paper_power_entry(10)};
  c.variant = CurveVariant::curve_b;
  c.sigma = 0.1;
  c.beta = 0.0;
  c.l = 5;
  c.r = 0;
  c.replicates = 600;
  c.base_seed = 4242;
  const ExperimentResult res = run_power_experiment(c);
  const KSummary& s = res.summaries.at(0);
  REQUIRE(s.valid > 500);
  // Nominal 0.05; the binomial SE at 600 draws is about 0.009.
  CHECK(s.pi_true == doctest::Approx(0.05).epsilon(0.6));
  CHECK(s.pi_hat == doctest::Approx(0.05).epsilon(0.6));
}

TEST_CASE("real-data analysis on the bundled fixture") {
  ScopedWarningSink quiet([](std::string_view) {});
  const DatasetManifest m = load_manifest(fs::path(NETREG_TEST_DATA) / "manifest.json");
  AnalysisOptions opt;
  opt.lambda = 3.0;
  opt.local_linear_bandwidth = 0.5;
  const fs::path out = fs::temp_directory_path() / "netreg_test_pipeline_analysis";
  fs::remove_all(out);
  fs::create_directories(out);
  opt.out_dir = out;
  const AnalysisReport r = analyze_real_dataset(m, opt);
  CHECK(r.series_count == 16);
  CHECK(r.labeled_count == 14);
  CHECK(r.embedding.size() == 16);
  CHECK(r.entry_labels.size() == 6);
  CHECK(r.entry_correlations.rows() == 6);
  CHECK(r.entry_correlations.diagonal().isOnes(1e-12));
  CHECK(std::isfinite(r.test.p_value));
  CHECK(r.test.p_value >= 0.0);
  CHECK(r.test.p_value <= 1.0);
  REQUIRE(r.local_linear.has_value());
  CHECK(r.local_linear->fitted.size() == 14);
  CHECK(r.written_files.size() == 2);
  for (const auto& f : r.written_files) CHECK(fs::exists(f));

  opt.out_dir.clear();
  opt.position = 3;
  CHECK_THROWS_AS(analyze_real_dataset(m, opt), ArgumentError);
  opt.position = 1;
  opt.n_star = 10;
  CHECK_THROWS_AS(analyze_real_dataset(m, opt), ArgumentError);

  DatasetManifest single = m;
  single.series.resize(1);
  opt.n_star.reset();
  CHECK_THROWS_AS(analyze_real_dataset(single, opt), DegenerateDesignError);
}
