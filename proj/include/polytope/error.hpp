#pragma once

#include <stdexcept>
#include <string>

namespace polytope {

// Raised when inputs violate an operation's preconditions (bad dimensions,
// malformed files, invalid parameters). The CLI maps these to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// Raised when a computation fails at runtime on otherwise valid inputs
// (diverged training, unwritable output). The CLI maps these to exit code 1.
class RuntimeFailure : public std::runtime_error {
 public:
  explicit RuntimeFailure(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace polytope
