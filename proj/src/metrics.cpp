#include "conlearn/metrics.hpp"

#include "conlearn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace conlearn {

namespace {

struct Neumaier {
    double sum = 0.0;
    double carry = 0.0;

    void add(double v) noexcept
    {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v)) {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }

    double value() const noexcept { return sum + carry; }
};

} // namespace

double task_loss(const TaskData& task, const Vector& w, const LossFamily& family)
{
    if (task.size() > 0 && task.dim() != w.size()) {
        throw InvalidArgument("task_loss: dimension mismatch");
    }
    Neumaier acc;
    for (Eigen::Index i = 0; i < task.size(); ++i) {
        acc.add(loss_value(family, task.features.row(i).dot(w), task.outputs[i]));
    }
    return acc.value();
}

double forgetting(const Vector& w, std::span<const TaskData> seen_tasks, const LossFamily& family)
{
    if (seen_tasks.empty()) {
        throw InvalidArgument("forgetting: no tasks seen");
    }
    Neumaier acc;
    for (const auto& task : seen_tasks) {
        acc.add(task_loss(task, w, family));
    }
    return acc.value() / static_cast<double>(seen_tasks.size());
}

double RegretAccumulator::observe(std::size_t stage, const Vector& w_prev, const TaskData& task,
                                  const LossFamily& family)
{
    if (finalized_) {
        throw InvalidArgument("regret: observe after finalize");
    }
    if (stage != stages_ + 1) {
        throw InvalidArgument("regret: expected stage " + std::to_string(stages_ + 1) + ", got " +
                              std::to_string(stage));
    }
    const double loss = task_loss(task, w_prev, family);
    const double t = sum_ + loss;
    if (std::abs(sum_) >= std::abs(loss)) {
        carry_ += (sum_ - t) + loss;
    } else {
        carry_ += (loss - t) + sum_;
    }
    sum_ = t;
    stages_ = stage;
    return value();
}

double RegretAccumulator::value() const
{
    if (stages_ == 0) {
        throw InvalidArgument("regret: no stages observed");
    }
    return (sum_ + carry_) / static_cast<double>(stages_);
}

void ExcitationTracker::add(const TaskData& task)
{
    for (Eigen::Index i = 0; i < task.size(); ++i) {
        gram_.add_outer(task.features.row(i).transpose());
    }
}

Matrix ExcitationTracker::information() const
{
    Matrix info = gram_.value();
    info.diagonal().array() += 1.0;
    return info;
}

double ExcitationTracker::lambda_min() const
{
    return min_eigenvalue(information());
}

double lambda_min_accum(std::span<const TaskData> tasks, Eigen::Index dim)
{
    ExcitationTracker tracker(dim);
    for (const auto& task : tasks) {
        tracker.add(task);
    }
    return tracker.lambda_min();
}

double optimal_loss(std::span<const TaskData> tasks, const Vector& w_ref, const LossFamily& family)
{
    if (tasks.empty()) {
        throw InvalidArgument("optimal_loss: no tasks");
    }
    Neumaier acc;
    for (const auto& task : tasks) {
        acc.add(task_loss(task, w_ref, family));
    }
    return acc.value() / static_cast<double>(tasks.size());
}

double optimal_loss(std::span<const TaskData> tasks, std::span<const Vector> w_refs, const LossFamily& family)
{
    if (tasks.empty()) {
        throw InvalidArgument("optimal_loss: no tasks");
    }
    if (tasks.size() != w_refs.size()) {
        throw InvalidArgument("optimal_loss: one reference parameter per task required");
    }
    Neumaier acc;
    for (std::size_t k = 0; k < tasks.size(); ++k) {
        acc.add(task_loss(tasks[k], w_refs[k], family));
    }
    return acc.value() / static_cast<double>(tasks.size());
}

RateFit rate_fit(std::span<const double> t, std::span<const double> values, std::size_t begin, std::size_t end)
{
    if (t.size() != values.size()) {
        throw InvalidArgument("rate_fit: t and values differ in length");
    }
    if (end > values.size() || begin >= end || end - begin < 5) {
        throw InvalidArgument("rate_fit: window must hold at least 5 points");
    }
    const auto n = static_cast<double>(end - begin);
    double sx = 0.0;
    double sy = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
        if (!(values[i] > 0.0) || !(t[i] > 0.0)) {
            throw InvalidArgument("rate_fit: non-positive value at index " + std::to_string(i));
        }
        sx += std::log(t[i]);
        sy += std::log(values[i]);
    }
    const double mx = sx / n;
    const double my = sy / n;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
        const double dx = std::log(t[i]) - mx;
        const double dy = std::log(values[i]) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) {
        throw InvalidArgument("rate_fit: all t in the window coincide");
    }
    RateFit fit;
    fit.exponent = sxy / sxx;
    fit.intercept = my - fit.exponent * mx;
    // A constant series is fit perfectly by a zero slope.
    fit.r_squared = syy == 0.0 ? 1.0 : std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
    fit.window_begin = begin;
    fit.window_end = end;
    return fit;
}

RateFit rate_fit(std::span<const double> t, std::span<const double> values)
{
    return rate_fit(t, values, values.size() / 2, values.size());
}

} // namespace conlearn
