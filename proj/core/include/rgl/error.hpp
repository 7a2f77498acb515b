#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace rgl {

// Failure categories. The split matters to callers: `contract` carries
// evidence that a documented precondition was violated by the *input*
// (e.g. a joinedness witness), `budget_exhausted` and `retries_exhausted`
// mean the search gave up without a verdict, and `no_valid_leaf` /
// `stage_failure` signal that an embedding hypothesis does not hold on this
// host at this scale — a reportable outcome, not a bug.
enum class ErrorKind {
  invalid_input,
  parameter,
  size_hypothesis,
  contract,
  budget_exhausted,
  no_valid_leaf,
  stage_failure,
  retries_exhausted,
  parse,
  io,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::invalid_input: return "invalid_input";
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::size_hypothesis: return "size_hypothesis";
    case ErrorKind::contract: return "contract";
    case ErrorKind::budget_exhausted: return "budget_exhausted";
    case ErrorKind::no_valid_leaf: return "no_valid_leaf";
    case ErrorKind::stage_failure: return "stage_failure";
    case ErrorKind::retries_exhausted: return "retries_exhausted";
    case ErrorKind::parse: return "parse";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::string detail = {})
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind),
        detail_(std::move(detail)) {}

  ErrorKind kind() const { return kind_; }

  // Optional machine-readable payload (JSON text): witness sets, failing
  // indices, precondition audits. Empty when there is nothing to attach.
  const std::string& detail() const { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace rgl
