#pragma once

// Experiment configuration: a strict JSON document with sections
// stream / learner / checkpoints / output / replicate_seeds.
// Unknown keys are rejected with the offending field path.

#include "conlearn/algorithms.hpp"
#include "conlearn/streams.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace conlearn {

struct CheckpointSpec {
    std::size_t every = 0; ///< 0 picks every stage for m <= 200, else ceil(m / 200)
};

struct ExperimentConfig {
    StreamSpec stream;
    LearnerConfig learner = Alg1Config{};
    CheckpointSpec checkpoints;
    std::string output = "out";
    std::vector<std::uint64_t> replicate_seeds;
};

/// Parses and validates; fills learner defaults (alg1 gain and radius) from the stream.
/// Throws ConfigError naming the field path.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);

/// Fully resolved config; parse_config(config_to_json(c)) reproduces c.
nlohmann::json config_to_json(const ExperimentConfig& cfg);

/// Cross-field checks (learner/family compatibility, radius covering w*). Throws ConfigError.
void validate_config(const ExperimentConfig& cfg);

/// Resolved checkpoint interval for a stream of m tasks.
std::size_t checkpoint_interval(const CheckpointSpec& spec, std::size_t num_tasks);

/// Default projection radius: 10x the a-priori parameter norm bound (1 if that bound is 0).
double default_radius(const StreamSpec& stream);

/// Seeds to run: replicate_seeds, or the stream seed when that list is empty.
std::vector<std::uint64_t> resolved_seeds(const ExperimentConfig& cfg);

} // namespace conlearn
