#include "conlearn/algorithms.hpp"

#include "conlearn/errors.hpp"

#include <cmath>
#include <limits>

namespace conlearn {

namespace {

constexpr double kDivergenceNorm = 1e8;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

void check_task_dim(const LearnerState& state, const TaskData& task, const char* who)
{
    if (task.size() > 0 && task.dim() != state.w.size()) {
        throw InvalidArgument(std::string(who) + ": task dimension does not match the estimate");
    }
}

// ||(Q + lambda I)^{-1} Q x||
Vector shrink(const Matrix& Q, const Vector& Qx, double lambda)
{
    Matrix shifted = Q;
    shifted.diagonal().array() += lambda;
    return solve_spd(shifted, Qx);
}

} // namespace

LearnerState LearnerState::initial(Eigen::Index dim)
{
    return initial(Vector::Zero(dim));
}

LearnerState LearnerState::initial(const Vector& w0)
{
    return {w0, Matrix::Identity(w0.size(), w0.size()), 0};
}

Vector project_q_ball(const Vector& x, const Matrix& Q, double radius)
{
    if (Q.rows() != x.size() || Q.cols() != x.size()) {
        throw InvalidArgument("project_q_ball: dimension mismatch");
    }
    if (!(radius > 0.0)) {
        throw InvalidArgument("project_q_ball: radius must be > 0");
    }
    if (!x.allFinite()) {
        throw InvalidArgument("project_q_ball: non-finite point");
    }
    if (x.norm() <= radius) {
        return x;
    }

    // phi(lambda) = ||w(lambda)|| - radius is strictly decreasing for SPD Q and tends to
    // -radius, so doubling finds a bracket and bisection the unique root.
    const Vector Qx = Q * x;
    double lo = 0.0;
    double hi = 1.0;
    Vector w_hi = shrink(Q, Qx, hi);
    while (w_hi.norm() > radius) {
        lo = hi;
        hi *= 2.0;
        if (!std::isfinite(hi) || hi > 1e300) {
            throw NumericalError("project_q_ball: failed to bracket the multiplier");
        }
        w_hi = shrink(Q, Qx, hi);
    }
    for (int iter = 0; iter < 400; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (hi - lo <= 1e-12 * std::max(1.0, hi) || mid <= lo || mid >= hi) {
            break;
        }
        Vector w_mid = shrink(Q, Qx, mid);
        if (w_mid.norm() > radius) {
            lo = mid;
        } else {
            hi = mid;
            w_hi = std::move(w_mid);
        }
    }
    // The feasible end of the bracket.
    return w_hi;
}

LearnerState alg1_update(const LearnerState& state, const TaskData& task, const Alg1Config& cfg)
{
    check_task_dim(state, task, "alg1_update");
    if (task.size() == 0) {
        return state;
    }
    const Eigen::Index d = state.w.size();
    CompensatedGram gram(d);
    CompensatedVector grad(d);
    for (Eigen::Index i = 0; i < task.size(); ++i) {
        const Vector x = task.features.row(i).transpose();
        const double slope = g1(cfg.family, x.dot(state.w), task.outputs[i]);
        if (!std::isfinite(slope)) {
            throw DataError("alg1_update: non-finite loss derivative in task " + std::to_string(task.index));
        }
        gram.add_outer(x);
        grad.add_scaled(x, slope);
    }

    LearnerState next;
    next.Q = state.Q + (cfg.mu * cfg.mu) * gram.value();
    const Vector candidate = state.w - solve_spd(next.Q, grad.value());
    next.w = project_q_ball(candidate, next.Q, cfg.radius);
    next.t = state.t + 1;
    return next;
}

LearnerState alg2_update(const LearnerState& state, const TaskData& task, double beta)
{
    check_task_dim(state, task, "alg2_update");
    if (!(beta >= 0.0) || !std::isfinite(beta)) {
        throw InvalidArgument("alg2_update: beta must be finite and >= 0");
    }
    if (task.size() == 0 || beta == 0.0) {
        return state;
    }
    const Eigen::Index d = state.w.size();
    CompensatedGram gram(d);
    CompensatedVector innovation(d);
    for (Eigen::Index i = 0; i < task.size(); ++i) {
        const Vector x = task.features.row(i).transpose();
        const double residual = task.outputs[i] - x.dot(state.w);
        if (!std::isfinite(residual)) {
            throw DataError("alg2_update: non-finite residual in task " + std::to_string(task.index));
        }
        gram.add_outer(x);
        innovation.add_scaled(x, residual);
    }

    LearnerState next;
    next.Q = state.Q + beta * gram.value();
    next.w = state.w + solve_spd(next.Q, beta * innovation.value());
    next.t = state.t + 1;
    return next;
}

double beta_schedule(std::size_t t, double delta)
{
    if (t == 0) {
        throw InvalidArgument("beta_schedule: stages start at 1");
    }
    if (!(delta >= 0.0 && delta < 0.5)) {
        throw InvalidArgument("beta_schedule: delta must lie in [0, 1/2)");
    }
    return std::pow(static_cast<double>(t), -delta);
}

SgdResult sgd_update(const Vector& w, const TaskData& task, const LossFamily& family, double lr, int passes)
{
    if (!(lr >= 0.0) || !std::isfinite(lr)) {
        throw InvalidArgument("sgd_update: learning rate must be finite and >= 0");
    }
    if (passes < 1) {
        throw InvalidArgument("sgd_update: passes must be >= 1");
    }
    if (task.size() > 0 && task.dim() != w.size()) {
        throw InvalidArgument("sgd_update: task dimension does not match the estimate");
    }
    SgdResult out{w, false};
    for (int pass = 0; pass < passes; ++pass) {
        for (Eigen::Index i = 0; i < task.size(); ++i) {
            const auto x = task.features.row(i).transpose();
            const double slope = g1(family, x.dot(out.w), task.outputs[i]);
            out.w -= (lr * slope) * x;
            if (!out.w.allFinite() || out.w.norm() > kDivergenceNorm) {
                out.diverged = true;
                return out;
            }
        }
    }
    return out;
}

double default_alg1_gain(const LossFamily& family, double feature_bound, double radius)
{
    if (std::holds_alternative<LinearLoss>(family)) {
        return 1.0;
    }
    if (!std::isfinite(feature_bound)) {
        throw InvalidArgument("default_alg1_gain: unbounded features need an explicit gain");
    }
    return std::sqrt(curvature_bounds(family, feature_bound * radius).mu_lower);
}

Learner::Learner(LearnerConfig config, const Vector& w0)
    : config_(std::move(config)), state_(LearnerState::initial(w0))
{
    std::visit(overloaded{
                   [](const Alg1Config& c) {
                       if (!(c.mu > 0.0) || !(c.radius > 0.0)) {
                           throw InvalidArgument("alg1: mu and radius must be > 0");
                       }
                       validate_family(c.family);
                   },
                   [](const Alg2Config& c) {
                       if (!(c.delta >= 0.0 && c.delta < 0.5)) {
                           throw InvalidArgument("alg2: delta must lie in [0, 1/2)");
                       }
                       for (double b : c.betas) {
                           if (!(b > 0.0) || !std::isfinite(b)) {
                               throw InvalidArgument("alg2: explicit betas must be finite and > 0");
                           }
                       }
                   },
                   [](const SgdConfig& c) {
                       if (!(c.lr > 0.0) || c.passes < 1) {
                           throw InvalidArgument("sgd: lr must be > 0 and passes >= 1");
                       }
                       validate_family(c.family);
                   },
               },
               config_);
}

void Learner::learn(const TaskData& task)
{
    ++stage_;
    std::visit(overloaded{
                   [&](const Alg1Config& c) { state_ = alg1_update(state_, task, c); },
                   [&](const Alg2Config& c) {
                       double beta = 0.0;
                       if (!c.betas.empty()) {
                           if (stage_ > c.betas.size()) {
                               throw InvalidArgument("alg2: explicit betas shorter than the stream");
                           }
                           beta = c.betas[stage_ - 1];
                       } else {
                           beta = beta_schedule(stage_, c.delta);
                       }
                       state_ = alg2_update(state_, task, beta);
                   },
                   [&](const SgdConfig& c) {
                       if (diverged_) {
                           return;
                       }
                       auto r = sgd_update(state_.w, task, c.family, c.lr, c.passes);
                       state_.w = std::move(r.w);
                       state_.t += 1;
                       diverged_ = r.diverged;
                   },
               },
               config_);
}

std::string Learner::name() const
{
    return std::visit(overloaded{
                          [](const Alg1Config&) { return std::string("alg1"); },
                          [](const Alg2Config&) { return std::string("alg2"); },
                          [](const SgdConfig&) { return std::string("sgd"); },
                      },
                      config_);
}

} // namespace conlearn
