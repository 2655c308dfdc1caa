#pragma once

#include <stdexcept>
#include <string>

namespace graphsurv {

// Error taxonomy mirrored by the C API status codes and the CLI exit codes.

struct InputError : std::runtime_error {
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed row in a delimited event file; carries the 1-based line number.
struct ParseError : InputError {
    ParseError(const std::string& what, std::size_t line)
        : InputError(what + " (line " + std::to_string(line) + ")"), line_number(line) {}
    std::size_t line_number;
};

struct TrainingError : std::runtime_error {
    explicit TrainingError(const std::string& what, double last_finite_loss = 0.0)
        : std::runtime_error(what), last_finite_loss(last_finite_loss) {}
    double last_finite_loss;
};

struct CheckpointError : std::runtime_error {
    explicit CheckpointError(const std::string& what) : std::runtime_error(what) {}
};

struct EvalError : std::runtime_error {
    explicit EvalError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace graphsurv
