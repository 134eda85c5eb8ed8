#pragma once

#include <stdexcept>
#include <string>

namespace regolith {

/// Input outside an operation's stated domain (negative speed, slope beyond
/// the model validity window, ...).
struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Query or write outside the terrain grid.
struct BoundsError : std::runtime_error {
  explicit BoundsError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Rank-deficient or otherwise unsolvable regression problem.
struct FitError : std::runtime_error {
  explicit FitError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Non-finite state encountered during integration.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

/// File read/write failure.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid scenario/configuration value. The message names the offending key.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Telemetry analysis cannot proceed (e.g. no steady-state samples).
struct AnalysisError : std::runtime_error {
  explicit AnalysisError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace regolith
