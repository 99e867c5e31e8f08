#pragma once

// CSV records for experiment results and the JSON experiment configuration.
//
// replicates.csv   K,replicate,seed,n,N,n_star,lambda,sq_gap,valid
//                  (+ f_true,f_hat,reject_true,reject_hat for power runs)
// summary.csv      K,n,N,n_star,lambda,valid,failed,mean_sq_gap,median_sq_gap
//                  (+ pi_true,pi_hat,abs_diff,se_true,se_hat for power runs)
//
// Booleans are written as 0/1, missing values as "nan".
//
// Experiment configuration (JSON, format_version 1):
//
//   {
//     "format_version": 1,
//     "experiment": "consistency",          // or "power"
//     "schedule": {"preset": "desk", "K": [1, 2, 3]},
//     "replicates": 30,
//     "seed": 7
//   }
//
// `schedule` is either a preset ("paper" or "desk"; desk exists only for
// consistency) with a K list, or an explicit array of
// {"K", "n", "N", "n_star", "lambda"} objects. Optional keys and defaults:
// s, alpha, beta, sigma (per experiment), variant ("curve-A" for
// consistency, "curve-B" for power), t_range [0.25, 1], d 2, l (6 or 5),
// r (6, or 0 = no prediction for power), level 0.05, noiseless false, threads 1,
// smacof {"tolerance", "max_iterations"}. Unknown keys are rejected.

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "netreg/pipeline.hpp"

namespace netreg {

void write_replicate_csv(const std::filesystem::path& path, ExperimentKind kind,
                         std::span<const ReplicateRecord> records);
std::vector<ReplicateRecord> read_replicate_csv(const std::filesystem::path& path);

void write_summary_csv(const std::filesystem::path& path, ExperimentKind kind,
                       std::span<const KSummary> summaries);
std::vector<KSummary> read_summary_csv(const std::filesystem::path& path);

/// Throws ParseError for malformed JSON, ArgumentError (with a JSON path)
/// for schema violations.
ExperimentConfig parse_experiment_config(std::string_view json_text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
/// Serialises with an explicit schedule; parse(to_json(c)) reproduces c.
std::string experiment_config_to_json(const ExperimentConfig& config);

}  // namespace netreg
