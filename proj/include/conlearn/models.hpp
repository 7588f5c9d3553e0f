#pragma once

// Synthetic data for a single task: feature draws under a chosen regime,
// zero-mean noise, and outputs produced through the loss family's link.

#include "conlearn/losses.hpp"
#include "conlearn/numkit.hpp"

#include <cstdint>
#include <span>
#include <variant>

namespace conlearn {

struct GaussianNoise {
    double sigma = 1.0;
};

struct UniformNoise {
    double halfwidth = 1.0;
};

/// scale * t_dof; dof > 2 keeps the variance (and a >2 moment) finite.
struct StudentTNoise {
    double dof = 5.0;
    double scale = 1.0;
};

using NoiseSpec = std::variant<GaussianNoise, UniformNoise, StudentTNoise>;

/// Uniform in the open ball of radius `bound`, so every draw has norm < bound.
struct BoundedUniformFeatures {
    double bound = 1.0;
};

/// N(0, covariance).
struct GaussianFeatures {
    Matrix covariance;
};

/// Every sample carries (bound/2) e1. The remaining coordinates are drawn (uniform in the
/// (d-1)-ball of radius bound/2) only on tasks whose coin fires, with probability t^(rho-1)
/// for the 1-based task index t. The accumulated Gram matrix then has its smallest
/// eigenvalue growing like m^rho: slower than linear, faster than log m.
struct LowExcitationFeatures {
    double bound = 1.0;
    double rho = 0.6;
};

using FeatureRegime = std::variant<BoundedUniformFeatures, GaussianFeatures, LowExcitationFeatures>;

enum class LogisticNoiseMode {
    Bernoulli,          ///< y ~ Bernoulli(sigmoid(xi)); z = y - sigmoid(xi)
    TruncatedAdditive,  ///< y = clamp(sigmoid(xi) + z, 0, 1)
};

struct TaskData {
    Matrix features;        ///< n x d, one sample per row
    Vector outputs;         ///< n
    Vector w_true;          ///< generating parameter
    double noise_sum = 0.0; ///< sum of the per-sample noise, kept for diagnostics
    std::uint64_t index = 0;
    int group = -1;         ///< meta-parameter group, -1 when not applicable

    Eigen::Index size() const noexcept { return outputs.size(); }
    Eigen::Index dim() const noexcept { return features.cols(); }
};

struct GenerationOptions {
    LogisticNoiseMode logistic_noise = LogisticNoiseMode::Bernoulli;
};

/// Throws InvalidArgument for non-positive scales or unsupported parameters.
void validate_noise(const NoiseSpec& noise);
void validate_regime(const FeatureRegime& regime, Eigen::Index dim);

/// Generates one task. Deterministic in (seed, task_index, all parameters); each sample draws
/// from its own (seed, task, sample) substream. Saturated families always use N(0, 1) noise.
TaskData generate_task(const LossFamily& family, const Vector& w_true, Eigen::Index n,
                       const FeatureRegime& regime, const NoiseSpec& noise, std::uint64_t seed,
                       std::uint64_t task_index, const GenerationOptions& options = {});

/// Mean of |s|^order.
double moment_check(std::span<const double> samples, double order);

/// Sup of ||x|| under the regime, or +inf if unbounded.
double feature_bound(const FeatureRegime& regime) noexcept;

} // namespace conlearn
