#include "conlearn/models.hpp"

#include "conlearn/errors.hpp"
#include "conlearn/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace conlearn {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

// Uniform in the open ball of the given radius.
Vector uniform_in_ball(CounterRng& rng, Eigen::Index dim, double radius)
{
    std::normal_distribution<double> normal;
    Vector dir(dim);
    double norm = 0.0;
    do {
        for (Eigen::Index j = 0; j < dim; ++j) {
            dir[j] = normal(rng);
        }
        norm = dir.norm();
    } while (norm == 0.0);
    // rng.uniform() < 1, hence ||result|| < radius strictly.
    const double r = radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(dim));
    return dir * (r / norm);
}

double draw_noise(const NoiseSpec& noise, CounterRng& rng)
{
    return std::visit(overloaded{
                          [&](const GaussianNoise& g) { return g.sigma * std::normal_distribution<double>{}(rng); },
                          [&](const UniformNoise& u) { return u.halfwidth * (2.0 * rng.uniform() - 1.0); },
                          [&](const StudentTNoise& t) {
                              return t.scale * std::student_t_distribution<double>{t.dof}(rng);
                          },
                      },
                      noise);
}

} // namespace

void validate_noise(const NoiseSpec& noise)
{
    std::visit(overloaded{
                   [](const GaussianNoise& g) {
                       if (!(g.sigma >= 0.0) || !std::isfinite(g.sigma)) {
                           throw InvalidArgument("gaussian noise: sigma must be finite and >= 0");
                       }
                   },
                   [](const UniformNoise& u) {
                       if (!(u.halfwidth >= 0.0) || !std::isfinite(u.halfwidth)) {
                           throw InvalidArgument("uniform noise: halfwidth must be finite and >= 0");
                       }
                   },
                   [](const StudentTNoise& t) {
                       if (!(t.dof > 2.0)) {
                           throw InvalidArgument("student_t noise: dof must exceed 2");
                       }
                       if (!(t.scale >= 0.0) || !std::isfinite(t.scale)) {
                           throw InvalidArgument("student_t noise: scale must be finite and >= 0");
                       }
                   },
               },
               noise);
}

void validate_regime(const FeatureRegime& regime, Eigen::Index dim)
{
    if (dim < 1) {
        throw InvalidArgument("feature regime: dimension must be >= 1");
    }
    std::visit(overloaded{
                   [](const BoundedUniformFeatures& b) {
                       if (!(b.bound > 0.0) || !std::isfinite(b.bound)) {
                           throw InvalidArgument("bounded_uniform: bound must be finite and > 0");
                       }
                   },
                   [&](const GaussianFeatures& g) {
                       if (g.covariance.rows() != dim || g.covariance.cols() != dim) {
                           throw InvalidArgument("gaussian features: covariance must be d x d");
                       }
                       if (!is_symmetric(g.covariance, 1e-12) || Eigen::LLT<Matrix>(g.covariance).info() != Eigen::Success) {
                           throw InvalidArgument("gaussian features: covariance must be symmetric positive definite");
                       }
                   },
                   [](const LowExcitationFeatures& l) {
                       if (!(l.bound > 0.0) || !std::isfinite(l.bound)) {
                           throw InvalidArgument("low_excitation: bound must be finite and > 0");
                       }
                       if (!(l.rho > 0.0 && l.rho < 1.0)) {
                           throw InvalidArgument("low_excitation: rho must lie in (0, 1)");
                       }
                   },
               },
               regime);
}

double feature_bound(const FeatureRegime& regime) noexcept
{
    return std::visit(overloaded{
                          [](const BoundedUniformFeatures& b) { return b.bound; },
                          [](const GaussianFeatures&) { return std::numeric_limits<double>::infinity(); },
                          [](const LowExcitationFeatures& l) { return l.bound; },
                      },
                      regime);
}

TaskData generate_task(const LossFamily& family, const Vector& w_true, Eigen::Index n,
                       const FeatureRegime& regime, const NoiseSpec& noise, std::uint64_t seed,
                       std::uint64_t task_index, const GenerationOptions& options)
{
    const Eigen::Index d = w_true.size();
    if (n < 0) {
        throw InvalidArgument("generate_task: negative sample count");
    }
    if (!w_true.allFinite()) {
        throw InvalidArgument("generate_task: non-finite parameter");
    }
    validate_family(family);
    validate_regime(regime, d);
    validate_noise(noise);

    TaskData task;
    task.features.resize(n, d);
    task.outputs.resize(n);
    task.w_true = w_true;
    task.index = task_index;

    Matrix chol;
    if (const auto* g = std::get_if<GaussianFeatures>(&regime)) {
        chol = Eigen::LLT<Matrix>(g->covariance).matrixL();
    }
    bool excite = false;
    if (const auto* l = std::get_if<LowExcitationFeatures>(&regime)) {
        CounterRng coin(make_key(seed, StreamTag::Excitation, task_index));
        const double t = static_cast<double>(std::max<std::uint64_t>(task_index, 1));
        excite = coin.uniform() < std::pow(t, l->rho - 1.0);
    }

    const bool saturated = std::holds_alternative<SaturatedLoss>(family);
    double noise_sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto sample = static_cast<std::uint64_t>(i);
        CounterRng feat_rng(make_key(seed, StreamTag::Features, task_index, sample));
        CounterRng noise_rng(make_key(seed, StreamTag::Noise, task_index, sample));

        Vector x = std::visit(overloaded{
                                  [&](const BoundedUniformFeatures& b) { return uniform_in_ball(feat_rng, d, b.bound); },
                                  [&](const GaussianFeatures&) {
                                      std::normal_distribution<double> normal;
                                      Vector e(d);
                                      for (Eigen::Index j = 0; j < d; ++j) {
                                          e[j] = normal(feat_rng);
                                      }
                                      return Vector(chol * e);
                                  },
                                  [&](const LowExcitationFeatures& l) {
                                      Vector v = Vector::Zero(d);
                                      v[0] = 0.5 * l.bound;
                                      if (excite && d > 1) {
                                          v.tail(d - 1) = uniform_in_ball(feat_rng, d - 1, 0.5 * l.bound);
                                      }
                                      return v;
                                  },
                              },
                              regime);

        const double xi = x.dot(w_true);
        double y = 0.0;
        double z = 0.0;
        if (saturated) {
            const auto& s = std::get<SaturatedLoss>(family);
            z = std::normal_distribution<double>{}(noise_rng);
            const double latent = xi + z;
            if (latent >= s.upper) {
                y = s.ceiling_out;
            } else if (latent <= s.lower) {
                y = s.floor_out;
            } else {
                y = latent;
            }
        } else if (std::holds_alternative<LogisticLoss>(family)) {
            const double p = sigmoid(xi);
            if (options.logistic_noise == LogisticNoiseMode::Bernoulli) {
                y = noise_rng.uniform() < p ? 1.0 : 0.0;
                z = y - p;
            } else {
                z = draw_noise(noise, noise_rng);
                y = std::clamp(p + z, 0.0, 1.0);
                z = y - p;
            }
        } else {
            z = draw_noise(noise, noise_rng);
            y = xi + z;
        }
        task.features.row(i) = x.transpose();
        task.outputs[i] = y;
        noise_sum += z;
    }
    task.noise_sum = noise_sum;
    return task;
}

double moment_check(std::span<const double> samples, double order)
{
    if (samples.empty()) {
        throw InvalidArgument("moment_check: empty sample");
    }
    if (!(order > 0.0)) {
        throw InvalidArgument("moment_check: order must be > 0");
    }
    double acc = 0.0;
    for (double s : samples) {
        acc += std::pow(std::abs(s), order);
    }
    return acc / static_cast<double>(samples.size());
}

} // namespace conlearn
