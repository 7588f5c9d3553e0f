#pragma once

// Whole task streams. Case 1: every task shares one generating parameter.
// Case 2: each task draws a meta parameter and adds a Gaussian perturbation,
// so tasks only share an approximate (mean) minimizer.

#include "conlearn/losses.hpp"
#include "conlearn/models.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace conlearn {

enum class StreamCase { Shared = 1, Drifting = 2 };

/// How Case-2 tasks pick their meta parameter.
enum class GroupAssignment {
    Uniform,  ///< independent uniform choice per task
    Balanced, ///< round-robin over the metas by generation index
};

struct SequentialOrder {};

struct RandomOrder {
    std::optional<std::uint64_t> seed; ///< defaults to a value derived from the stream seed
};

using TaskOrder = std::variant<SequentialOrder, RandomOrder>;

struct StreamSpec {
    StreamCase stream_case = StreamCase::Shared;
    Eigen::Index dim = 2;
    std::size_t num_tasks = 1;
    Eigen::Index samples_per_task = 1;
    LossFamily family = LinearLoss{};
    FeatureRegime regime = BoundedUniformFeatures{1.0};
    NoiseSpec noise = GaussianNoise{0.1};
    GenerationOptions generation;

    Vector w_star;                       ///< Case 1 shared parameter
    std::vector<Vector> meta;            ///< Case 2 meta parameters (equal weights)
    double perturbation_sigma = 0.0;     ///< Case 2 per-coordinate std of the perturbation
    GroupAssignment assignment = GroupAssignment::Uniform;

    TaskOrder order = SequentialOrder{};
    std::uint64_t seed = 0;
};

struct TaskStream {
    std::vector<TaskData> tasks;        ///< in visitation order
    Vector w_star;                      ///< shared (Case 1) or mean (Case 2) minimizer
    std::vector<Vector> per_task_w;     ///< generating parameter of tasks[k]
    std::vector<std::uint64_t> visit;   ///< generation index (1-based) of tasks[k]
};

/// Throws InvalidArgument describing the first inconsistency.
void validate_stream_spec(const StreamSpec& spec);

/// Builds the stream. Task data depends only on (seed, generation index), never on the order.
TaskStream build_stream(const StreamSpec& spec);

/// The fixed w* the learners are measured against.
Vector effective_target(const TaskStream& stream);

/// Analytic target for a spec without generating data.
Vector analytic_target(const StreamSpec& spec);

/// Generation indices 1..m in the order they are visited.
std::vector<std::uint64_t> visit_order(const StreamSpec& spec, const std::vector<int>& groups);

/// Largest plausible ||w*_t|| under the spec (used for the default projection radius).
double parameter_norm_bound(const StreamSpec& spec);

} // namespace conlearn
