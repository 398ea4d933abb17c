#pragma once

#include <stdexcept>
#include <string>

namespace ricci {

/// Thrown when an evaluation point lies outside the object's domain.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Thrown when construction parameters violate a documented precondition.
class ParameterError : public std::invalid_argument {
 public:
  explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

/// Thrown when a numerical procedure cannot complete (no bracket, disconnected
/// graph, failed internal consistency check).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ricci
