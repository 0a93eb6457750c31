#pragma once

#include <stdexcept>
#include <string>

namespace ioncavity {

// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid inputs: bad quantum numbers, dimension mismatches, bad parameters.
class InputError : public Error {
public:
    using Error::Error;
};

// Configuration file / parameter validation problems.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Linear-algebra or integration failures (singular systems, stiffness).
class SolverError : public Error {
public:
    using Error::Error;
};

// Post-processing failures: fits that do not converge, degenerate data.
class AnalysisError : public Error {
public:
    using Error::Error;
};

} // namespace ioncavity
