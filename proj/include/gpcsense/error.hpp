#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace gpcsense {

/// Bad arguments, inconsistent configuration, or malformed input files.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the domain of a mathematical function.
class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A numerical result that cannot be formed (constant surrogate, zero data).
class DegenerateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failure of the external black-box evaluator. Carries the request index
/// the failure was attributed to, when one is known.
class EvaluatorError : public std::runtime_error {
 public:
  EvaluatorError(const std::string& what, std::optional<std::size_t> index)
      : std::runtime_error(index ? what + " (request index " + std::to_string(*index) + ")" : what),
        index_(index) {}

  std::optional<std::size_t> index() const { return index_; }

 private:
  std::optional<std::size_t> index_;
};

}  // namespace gpcsense
