#pragma once
//
// Exception hierarchy shared by every rmor module.
//

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

namespace rmor {

struct Error : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

// non-finite entries, malformed arguments
struct InvalidInputError : Error
{
    using Error::Error;
};

struct ShapeError : Error
{
    using Error::Error;
};

// argument outside the mathematical domain of a formula
struct DomainError : Error
{
    using Error::Error;
};

struct DecompositionError : Error
{
    using Error::Error;
};

struct RankError : Error
{
    using Error::Error;
};

struct BasisError : Error
{
    using Error::Error;
};

/// Bad run configuration (bench harness); maps to CLI exit code 2.
struct ConfigError : Error
{
    using Error::Error;
};

/// Singular or numerically singular linear system. Carries an estimate of
/// the 2-norm condition number (infinity when the matrix is exactly singular).
struct SingularityError : Error
{
    SingularityError(const std::string& what, double condition_estimate)
        : Error(what), condition(condition_estimate)
    {}

    double condition;
};

/// Newton (or any fixed-point) iteration ran out of iterations.
struct ConvergenceError : Error
{
    ConvergenceError(const std::string& what, double last_residual, int iterations_done)
        : Error(what), residual(last_residual), iterations(iterations_done)
    {}

    double residual;
    int    iterations;
};

/// Time integration produced a non-finite state.
struct DivergenceError : Error
{
    DivergenceError(const std::string& what, std::size_t step_index)
        : Error(what), step(step_index)
    {}

    std::size_t step;
};

struct ParseError : Error
{
    ParseError(const std::string& what, std::size_t byte_offset)
        : Error(what + " (at byte " + std::to_string(byte_offset) + ")"), offset(byte_offset)
    {}

    std::size_t offset;
};

struct FormatError : Error
{
    using Error::Error;
};

} // namespace rmor
