#pragma once

#include <stdexcept>
#include <string>

namespace gfflab {

/// Requested computation exceeds a documented resource limit (memory, dense
/// solver size, ...). Distinct from std::domain_error so callers can map it
/// to a dedicated exit code.
class CapacityError : public std::runtime_error {
 public:
  explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

/// A configured bound (e.g. loop-length truncation residual) is violated.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Rejection sampling ran out of attempts; carries the empirical rate.
class AcceptanceError : public std::runtime_error {
 public:
  AcceptanceError(const std::string& what, std::uint64_t attempts,
                  std::uint64_t accepted)
      : std::runtime_error(what), attempts(attempts), accepted(accepted) {}
  std::uint64_t attempts = 0;
  std::uint64_t accepted = 0;
};

}  // namespace gfflab
