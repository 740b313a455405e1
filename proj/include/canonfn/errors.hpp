#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace canonfn {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AmalgamationFailure : Error {
  using Error::Error;
};

struct ArityLimitExceeded : Error {
  ArityLimitExceeded(int arity, int limit)
      : Error("arity " + std::to_string(arity) + " exceeds the configured limit " + std::to_string(limit)) {}
};

struct TypeMismatch : Error {
  using Error::Error;
};

// A function oracle was asked for a point outside its domain.
struct DomainGap : Error {
  using Error::Error;
};

struct NotCanonical : Error {
  using Error::Error;
};

struct DensityProbeFailure : Error {
  using Error::Error;
};

struct BudgetExhausted : Error {
  using Error::Error;
};

struct FormatError : Error {
  FormatError(std::size_t line, const std::string& reason)
      : Error("line " + std::to_string(line) + ": " + reason), line_(line) {}
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

struct UsageError : Error {
  UsageError(std::size_t position, const std::string& token, const std::string& expected)
      : Error("usage error at position " + std::to_string(position) + " near '" + token + "': expected " + expected),
        position_(position) {}
  std::size_t position() const { return position_; }

private:
  std::size_t position_;
};

// Global guardrail for type enumeration; CANONFN_ARITY_LIMIT overrides the
// default of 6.
int arity_limit();
void set_arity_limit(int limit);
void require_arity(int arity);

}  // namespace canonfn
