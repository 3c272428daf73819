#pragma once

#include <stdexcept>
#include <string>

namespace certiloc {

// Bad input data: unreadable files, schema violations, inconsistent graphs.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failures that the caller cannot fix by changing flags:
// non-convex quadratic part, fully degenerate measurement sets, singular
// recovery systems.
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace certiloc
