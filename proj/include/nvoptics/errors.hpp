#pragma once

#include <stdexcept>
#include <string>

namespace nvoptics {

// Failure classes map one-to-one onto CLI exit codes:
// ValidationError -> 2, NumericalError -> 3, IoError -> 4.

// Input data, configuration, or preconditions violated.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-convergence, degeneracy, or other numerical failure.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem and serialization failures.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace nvoptics
