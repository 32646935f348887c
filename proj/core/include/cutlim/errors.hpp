#pragma once

#include <stdexcept>
#include <string>

namespace cutlim {

// Thrown when an operation refuses an input because it exceeds the
// documented exact-computation bounds. Callers are expected to fall back
// to a heuristic or sampled mode instead.
class SizeLimitError : public std::runtime_error {
 public:
  explicit SizeLimitError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when an iterative numeric routine fails to reach its target
// (should not happen for in-contract inputs).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cutlim
