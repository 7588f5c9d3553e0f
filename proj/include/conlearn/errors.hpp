#pragma once

#include <stdexcept>
#include <string>

namespace conlearn {

/// Precondition violated by the caller (bad dimension, out-of-range argument).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Factorization or root-finding broke down.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Observation inconsistent with the loss family (e.g. a saturated output outside the censor structure).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Experiment configuration failed validation. The message carries the field path.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string path, const std::string& what)
        : std::runtime_error(path + ": " + what), path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

} // namespace conlearn
