#pragma once

#include <stdexcept>
#include <string>

namespace netload {

// Input/schema problems: bad config, malformed data, violated preconditions
// that a caller can fix. CLI maps these to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// An iterative solver failed to reach its documented tolerance within its
// iteration cap. CLI maps these to exit code 3.
class ConvergenceError : public std::runtime_error {
 public:
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace netload
