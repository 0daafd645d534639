#pragma once

#include <stdexcept>
#include <string>

namespace magnifier {

/// Thrown when a state's support reaches the window boundary and a step
/// would truncate amplitude. Callers should retry with a larger window.
class WindowOverflowError : public std::runtime_error {
public:
  explicit WindowOverflowError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when an iterative method exhausts its budget without meeting
/// its tolerance.
class ConvergenceError : public std::runtime_error {
public:
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when a closed-form expression evaluates outside its proven range
/// by more than floating-point noise.
class NumericalConsistencyError : public std::runtime_error {
public:
  explicit NumericalConsistencyError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace magnifier
