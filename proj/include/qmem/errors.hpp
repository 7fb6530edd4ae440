#pragma once

#include <stdexcept>
#include <string>

namespace qmem {

// Invalid arguments to an operation: bad state labels, out-of-range windows,
// malformed inputs. Maps to CLI exit code 1.
struct UsageError : std::invalid_argument {
    explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

// Malformed or inconsistent configuration files. Maps to CLI exit code 1.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical analysis failure on otherwise well-formed inputs: degenerate
// counts, infeasible bound targets, fits that cannot converge. Exit code 2.
struct AnalysisError : std::runtime_error {
    explicit AnalysisError(const std::string& what) : std::runtime_error(what) {}
};

// Memory scheduling contract violations: reading a cell that was never
// written, holds exceeding the spin lifetime.
struct ScheduleError : std::runtime_error {
    explicit ScheduleError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace qmem
