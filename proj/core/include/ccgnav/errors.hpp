#pragma once

#include <stdexcept>
#include <string>

namespace ccgnav {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand dimensions do not line up.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// The set described by a CCG is empty (inconsistent constraints, no feasible generator).
class EmptySetError : public Error {
public:
    using Error::Error;
};

/// Iterative solver did not converge or a factorization broke down.
class SolverFailure : public Error {
public:
    using Error::Error;
};

/// Invalid or unsupported configuration (scenario files, rank-deficient flows, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// The agent is not strictly inside the safe set where the scheme requires it.
class SafetyViolation : public Error {
public:
    using Error::Error;
};

}  // namespace ccgnav
