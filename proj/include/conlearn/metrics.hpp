#pragma once

// Forgetting / regret, the excitation level lambda_min, the optimal-loss
// baselines, and log-log rate fitting.
//
// All task averages divide by the number of tasks t, with each task
// contributing the sum of its per-sample losses.

#include "conlearn/losses.hpp"
#include "conlearn/models.hpp"
#include "conlearn/numkit.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace conlearn {

struct MetricsRecord {
    std::size_t t = 0;
    double est_err_sq = 0.0;   ///< ||w_t - w*||^2
    double forgetting = 0.0;   ///< F_t
    double regret = 0.0;       ///< R_t
    double lambda_min = 0.0;   ///< lambda_min(I + sum x x')
    double q_lambda_min = 0.0; ///< lambda_min(Q_t) of the learner
    double l_star = 0.0;       ///< average loss at the shared target
    double p_star = 0.0;       ///< average loss at each task's own parameter
};

struct RateFit {
    double exponent = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::size_t window_begin = 0; ///< index into the series, inclusive
    std::size_t window_end = 0;   ///< exclusive
};

/// Sum over samples of loss(x'w, y) for one task, compensated.
double task_loss(const TaskData& task, const Vector& w, const LossFamily& family);

/// F_t = (1/t) sum_k task_loss(D_k, w).
double forgetting(const Vector& w, std::span<const TaskData> seen_tasks, const LossFamily& family);

/// Streaming R_t = (1/t) sum_k task_loss(D_k, w_{k-1}). Stages must arrive as 1, 2, 3, ...
class RegretAccumulator {
public:
    /// `w_prev` is the estimate held before learning `task`.
    double observe(std::size_t stage, const Vector& w_prev, const TaskData& task, const LossFamily& family);

    double value() const;
    std::size_t stages() const noexcept { return stages_; }
    void finalize() noexcept { finalized_ = true; }
    bool finalized() const noexcept { return finalized_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
    std::size_t stages_ = 0;
    bool finalized_ = false;
};

/// lambda_min(I + sum_k sum_i x x') over the given tasks.
double lambda_min_accum(std::span<const TaskData> tasks, Eigen::Index dim);

/// Incremental version of lambda_min_accum.
class ExcitationTracker {
public:
    explicit ExcitationTracker(Eigen::Index dim) : gram_(dim) {}

    void add(const TaskData& task);
    double lambda_min() const;
    Matrix information() const;

private:
    CompensatedGram gram_;
};

/// (1/t) sum_k task_loss(D_k, w_ref).
double optimal_loss(std::span<const TaskData> tasks, const Vector& w_ref, const LossFamily& family);

/// (1/t) sum_k task_loss(D_k, w_refs[k]).
double optimal_loss(std::span<const TaskData> tasks, std::span<const Vector> w_refs, const LossFamily& family);

/// Least-squares slope of log(value) against log(t) over series[begin, end).
/// Throws InvalidArgument for windows shorter than 5 or non-positive entries.
RateFit rate_fit(std::span<const double> t, std::span<const double> values, std::size_t begin, std::size_t end);

/// Same, over the trailing half of the series.
RateFit rate_fit(std::span<const double> t, std::span<const double> values);

} // namespace conlearn
