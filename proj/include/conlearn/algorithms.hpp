#pragma once

// Continual learners. Each consumes one task at a time and never revisits old
// data; what it remembers of the past lives in the information matrix Q.

#include "conlearn/losses.hpp"
#include "conlearn/models.hpp"
#include "conlearn/numkit.hpp"

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

namespace conlearn {

struct LearnerState {
    Vector w;
    Matrix Q;
    std::size_t t = 0;

    /// w = w0 (zero if omitted), Q = I, t = 0.
    static LearnerState initial(Eigen::Index dim);
    static LearnerState initial(const Vector& w0);
};

/// Projected regularized estimator for a shared minimizer (any loss family).
struct Alg1Config {
    double mu = 1.0;      ///< gain; mu^2 should not exceed the curvature lower bound
    double radius = 10.0; ///< projection radius M, must cover ||w*||
    LossFamily family = LinearLoss{};
};

/// Gain-scheduled least squares for drifting parameters (linear family only).
struct Alg2Config {
    double delta = 0.0;         ///< beta_t = t^-delta, delta in [0, 1/2)
    std::vector<double> betas;  ///< explicit beta_t per stage; overrides the schedule when nonempty
};

/// Plain per-sample SGD fine-tuning on each task.
struct SgdConfig {
    double lr = 0.01;
    int passes = 5;
    LossFamily family = LinearLoss{};
};

using LearnerConfig = std::variant<Alg1Config, Alg2Config, SgdConfig>;

/// argmin over ||w|| <= radius of (x - w)' Q (x - w).
Vector project_q_ball(const Vector& x, const Matrix& Q, double radius);

/// One task of the projected estimator:
///   Q_t = Q_{t-1} + mu^2 sum x x'
///   w_t = Proj_{Q_t}[ w_{t-1} - Q_t^{-1} sum g1(x'w_{t-1}, y) x ]
/// An empty task returns the state unchanged.
LearnerState alg1_update(const LearnerState& state, const TaskData& task, const Alg1Config& cfg);

/// One task of gain-scheduled least squares:
///   Q_t = Q_{t-1} + beta sum x x'
///   w_t = w_{t-1} + Q_t^{-1} beta sum x (y - x'w_{t-1})
/// beta = 0 or an empty task returns the state unchanged.
LearnerState alg2_update(const LearnerState& state, const TaskData& task, double beta);

/// t^-delta for t >= 1, delta in [0, 1/2).
double beta_schedule(std::size_t t, double delta);

struct SgdResult {
    Vector w;
    bool diverged = false;
};

/// `passes` epochs of w <- w - lr g1(x'w, y) x in sample order. Stops stepping and
/// flags divergence once ||w|| exceeds 1e8.
SgdResult sgd_update(const Vector& w, const TaskData& task, const LossFamily& family, double lr, int passes);

/// Default gain for the projected estimator: 1 for the linear family, otherwise the square
/// root of the curvature lower bound over |xi| <= feature_bound * radius.
double default_alg1_gain(const LossFamily& family, double feature_bound, double radius);

/// Uniform per-task driver over the three learners.
class Learner {
public:
    Learner(LearnerConfig config, const Vector& w0);

    /// Learns the next task; the stage counter advances by one per call.
    void learn(const TaskData& task);

    const Vector& estimate() const noexcept { return state_.w; }
    const Matrix& information() const noexcept { return state_.Q; }
    const LearnerState& state() const noexcept { return state_; }
    std::size_t stage() const noexcept { return stage_; }
    bool diverged() const noexcept { return diverged_; }
    std::string name() const;
    const LearnerConfig& config() const noexcept { return config_; }

private:
    LearnerConfig config_;
    LearnerState state_;
    std::size_t stage_ = 0;
    bool diverged_ = false;
};

} // namespace conlearn
