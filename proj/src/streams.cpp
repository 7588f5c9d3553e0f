#include "conlearn/streams.hpp"

#include "conlearn/errors.hpp"
#include "conlearn/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace conlearn {

namespace {

// Order seed used when a random order does not name one.
constexpr std::uint64_t kOrderSalt = 0x6f72646572ULL;

struct TaskParameter {
    Vector w;
    int group = -1;
};

TaskParameter task_parameter(const StreamSpec& spec, std::uint64_t k)
{
    if (spec.stream_case == StreamCase::Shared) {
        return {spec.w_star, -1};
    }
    const auto groups = static_cast<std::uint64_t>(spec.meta.size());
    int group = 0;
    if (spec.assignment == GroupAssignment::Balanced) {
        group = static_cast<int>((k - 1) % groups);
    } else {
        CounterRng pick(make_key(spec.seed, StreamTag::TaskParameter, k, 0));
        group = static_cast<int>(std::min<std::uint64_t>(groups - 1, static_cast<std::uint64_t>(pick.uniform() * groups)));
    }
    Vector w = spec.meta[static_cast<std::size_t>(group)];
    if (spec.perturbation_sigma > 0.0) {
        CounterRng perturb(make_key(spec.seed, StreamTag::TaskParameter, k, 1));
        std::normal_distribution<double> normal;
        for (Eigen::Index j = 0; j < w.size(); ++j) {
            w[j] += spec.perturbation_sigma * normal(perturb);
        }
    }
    return {w, group};
}

} // namespace

void validate_stream_spec(const StreamSpec& spec)
{
    if (spec.dim < 1) {
        throw InvalidArgument("stream: dim must be >= 1");
    }
    if (spec.num_tasks < 1) {
        throw InvalidArgument("stream: num_tasks must be >= 1");
    }
    if (spec.samples_per_task < 0) {
        throw InvalidArgument("stream: samples_per_task must be >= 0");
    }
    validate_family(spec.family);
    validate_regime(spec.regime, spec.dim);
    validate_noise(spec.noise);
    if (spec.stream_case == StreamCase::Shared) {
        if (spec.w_star.size() != spec.dim || !spec.w_star.allFinite()) {
            throw InvalidArgument("stream: case 1 needs a finite w_star of length dim");
        }
    } else {
        if (spec.meta.empty()) {
            throw InvalidArgument("stream: case 2 needs at least one meta parameter");
        }
        for (const auto& m : spec.meta) {
            if (m.size() != spec.dim || !m.allFinite()) {
                throw InvalidArgument("stream: every meta parameter must be finite with length dim");
            }
        }
        if (!(spec.perturbation_sigma >= 0.0) || !std::isfinite(spec.perturbation_sigma)) {
            throw InvalidArgument("stream: perturbation_sigma must be finite and >= 0");
        }
    }
}

Vector analytic_target(const StreamSpec& spec)
{
    if (spec.stream_case == StreamCase::Shared) {
        return spec.w_star;
    }
    Vector mean = Vector::Zero(spec.dim);
    for (const auto& m : spec.meta) {
        mean += m;
    }
    return mean / static_cast<double>(spec.meta.size());
}

double parameter_norm_bound(const StreamSpec& spec)
{
    if (spec.stream_case == StreamCase::Shared) {
        return spec.w_star.norm();
    }
    double largest = 0.0;
    for (const auto& m : spec.meta) {
        largest = std::max(largest, m.norm());
    }
    return largest + 3.0 * spec.perturbation_sigma * std::sqrt(static_cast<double>(spec.dim));
}

std::vector<std::uint64_t> visit_order(const StreamSpec& spec, const std::vector<int>& groups)
{
    std::vector<std::uint64_t> order(spec.num_tasks);
    std::iota(order.begin(), order.end(), std::uint64_t{1});
    if (std::holds_alternative<SequentialOrder>(spec.order)) {
        if (spec.stream_case == StreamCase::Drifting) {
            std::stable_sort(order.begin(), order.end(), [&](std::uint64_t a, std::uint64_t b) {
                return groups[a - 1] < groups[b - 1];
            });
        }
        return order;
    }
    const auto& random = std::get<RandomOrder>(spec.order);
    const std::uint64_t order_seed = random.seed.value_or(mix64(spec.seed ^ kOrderSalt));
    CounterRng rng(make_key(order_seed, StreamTag::Order));
    // Fisher-Yates spelled out so the permutation does not depend on the standard library.
    for (std::size_t i = order.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng() % i);
        std::swap(order[i - 1], order[j]);
    }
    return order;
}

TaskStream build_stream(const StreamSpec& spec)
{
    validate_stream_spec(spec);

    std::vector<TaskParameter> params;
    params.reserve(spec.num_tasks);
    std::vector<int> groups;
    groups.reserve(spec.num_tasks);
    for (std::uint64_t k = 1; k <= spec.num_tasks; ++k) {
        params.push_back(task_parameter(spec, k));
        groups.push_back(params.back().group);
    }

    TaskStream stream;
    stream.w_star = analytic_target(spec);
    stream.visit = visit_order(spec, groups);
    stream.tasks.reserve(spec.num_tasks);
    stream.per_task_w.reserve(spec.num_tasks);
    for (std::uint64_t k : stream.visit) {
        const auto& p = params[k - 1];
        TaskData task = generate_task(spec.family, p.w, spec.samples_per_task, spec.regime, spec.noise, spec.seed, k,
                                      spec.generation);
        task.group = p.group;
        stream.per_task_w.push_back(p.w);
        stream.tasks.push_back(std::move(task));
    }
    return stream;
}

Vector effective_target(const TaskStream& stream)
{
    if (stream.tasks.empty()) {
        throw InvalidArgument("effective_target: empty stream");
    }
    return stream.w_star;
}

} // namespace conlearn
