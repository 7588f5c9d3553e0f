#pragma once

#include "conlearn/config.hpp"
#include "conlearn/metrics.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <string>
#include <vector>

namespace conlearn {

enum class RunStatus { Completed, Diverged };

struct RunResult {
    std::uint64_t seed = 0;
    std::string learner;
    std::vector<MetricsRecord> records;  ///< one per checkpoint, sorted by t
    std::vector<Vector> trajectory;      ///< w_0, w_1, ..., w_m
    LearnerState final_state;
    Vector target;
    std::map<std::string, RateFit> rate_fits;
    std::map<std::string, std::string> rate_fit_errors;
    double final_forgetting_per_sample = 0.0;
    double final_regret_per_sample = 0.0;
    double final_l_star_per_sample = 0.0;
    RunStatus status = RunStatus::Completed;
};

/// Builds the stream for `seed`, runs the learner over it and logs metrics at checkpoints
/// (always including the last stage). Deterministic in (cfg, seed).
RunResult run_experiment(const ExperimentConfig& cfg, std::uint64_t seed);

/// Same, for an already-built stream.
RunResult run_on_stream(const ExperimentConfig& cfg, const TaskStream& stream, std::uint64_t seed);

/// Column order of the metrics CSV.
inline constexpr const char* kMetricsHeader =
    "t,est_err_sq,forgetting,regret,lambda_min,q_lambda_min,l_star,p_star,learner,seed";

/// Metrics CSV text: header plus one row per record, reals with 17 significant digits.
std::string render_metrics_csv(const RunResult& run);

/// Trajectory CSV text: t,w0,...,w{d-1} for every stage including t = 0.
std::string render_trajectory_csv(const RunResult& run);

struct MetricsTable {
    std::vector<MetricsRecord> records;
    std::vector<std::string> learners;
    std::vector<std::uint64_t> seeds;
};

/// Parses a metrics CSV; throws InvalidArgument naming the column on schema mismatch.
MetricsTable parse_metrics_csv(const std::string& text);

/// Rate fits (trailing half) of est_err_sq, regret - l_star and forgetting - l_star.
/// Series that are not strictly positive in the window land in `errors`.
void fit_standard_rates(const std::vector<MetricsRecord>& records, std::map<std::string, RateFit>& fits,
                        std::map<std::string, std::string>& errors);

/// Runs every seed (in parallel, capped by CONLEARN_THREADS), writes metrics_<seed>.csv,
/// trajectory_<seed>.csv, summary.json and config_echo.json under cfg.output.
std::vector<RunResult> run_replicates(const ExperimentConfig& cfg);

nlohmann::json summarize(const ExperimentConfig& cfg, const std::vector<RunResult>& runs);

/// Number of worker threads allowed for replicate parallelism.
unsigned replicate_threads();

/// Demo stream of the drifting-parameter illustration: d = 2, three meta parameters,
/// 100 tasks of 200 samples.
ExperimentConfig group_demo_config(bool random_order, bool use_sgd, std::uint64_t seed);

/// [4, -1/6], the minimizer quoted alongside the demo.
Vector group_demo_quoted_target();

} // namespace conlearn
