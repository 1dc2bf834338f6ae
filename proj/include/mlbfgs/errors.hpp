#pragma once

#include <stdexcept>
#include <string>

namespace mlbfgs {

// Thrown when two vectors (or a vector and a layout) disagree on dimension.
struct DimensionMismatchError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown for malformed block layouts (empty block, bad cover, unknown index).
struct InvalidLayoutError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown when a curvature pair would break positive-definiteness (s'y <= 0).
struct CurvatureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when a Hessian-vector product is requested with no stored pairs.
struct EmptyHistoryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Configuration / schema problems; `field` names the offending entry.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& field, const std::string& what)
        : std::runtime_error(field + ": " + what), field(field) {}
    std::string field;
};

// CSV / file ingestion problems; `line` is 1-based.
struct ParseError : std::runtime_error {
    ParseError(long line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line(line) {}
    long line;
};

// Raised when the distributed simulation detects inconsistent replica state.
struct SimulationIntegrityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace mlbfgs
