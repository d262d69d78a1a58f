#pragma once

#include <stdexcept>
#include <string>

namespace c4out {

// Categories map onto CLI exit codes: usage 1, data 2, numeric 3.
enum class ErrorCategory { usage, data, numeric };

class Error : public std::runtime_error
{
public:
  Error(ErrorCategory category, const std::string& what)
    : std::runtime_error(what), category_(category)
  {
  }

  ErrorCategory category() const noexcept { return category_; }

private:
  ErrorCategory category_;
};

struct UsageError : Error
{
  explicit UsageError(const std::string& what) : Error(ErrorCategory::usage, what) {}
};

// Parameter outside its mathematical domain, malformed input data.
struct DomainError : Error
{
  explicit DomainError(const std::string& what) : Error(ErrorCategory::data, what) {}
};

struct InvalidOrderError : DomainError
{
  explicit InvalidOrderError(int order)
    : DomainError("invalid tensor order " + std::to_string(order) + " (expected 2, 3 or 4)")
  {
  }
};

struct InsufficientDataError : DomainError
{
  using DomainError::DomainError;
};

struct InvalidMatrixError : DomainError
{
  using DomainError::DomainError;
};

struct IngestionError : DomainError
{
  using DomainError::DomainError;
};

// Failure of a numerical procedure on otherwise well-formed input.
struct NumericError : Error
{
  explicit NumericError(const std::string& what) : Error(ErrorCategory::numeric, what) {}
};

struct SingularCovarianceError : NumericError
{
  using NumericError::NumericError;
};

inline const char* category_name(ErrorCategory c)
{
  switch (c) {
    case ErrorCategory::usage: return "usage";
    case ErrorCategory::data: return "data";
    case ErrorCategory::numeric: return "numeric";
  }
  return "unknown";
}

inline int exit_code(ErrorCategory c)
{
  switch (c) {
    case ErrorCategory::usage: return 1;
    case ErrorCategory::data: return 2;
    case ErrorCategory::numeric: return 3;
  }
  return 1;
}

} // namespace c4out
