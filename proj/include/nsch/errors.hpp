#pragma once
// ============================================================================
// Error taxonomy for the solver library.
//
// The command line driver maps these onto process exit codes:
//   ConfigError -> 2   (invalid or inconsistent configuration)
//   SolverError -> 3   (iteration failure, breakdown, incompatible data)
//   IoError     -> 4   (filesystem / format problems)
// ============================================================================

#include <stdexcept>
#include <string>

namespace nsch {

/// Invalid or inconsistent user-supplied configuration.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure: non-convergence, NaN breakdown, incompatible data.
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

/// Filesystem or file-format failure.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace nsch
