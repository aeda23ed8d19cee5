#pragma once

#include <stdexcept>
#include <string>

namespace chorc {

// Malformed DSL input; carries a 1-based source position.
struct ParseError : std::runtime_error {
  int line;
  int column;
  ParseError(const std::string& msg, int line_, int column_)
      : std::runtime_error("parse error at " + std::to_string(line_) + ":" +
                           std::to_string(column_) + ": " + msg),
        line(line_),
        column(column_) {}
};

// Enumeration or rewriting would exceed a configured budget.
struct CapExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidPath : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An operation was invoked on a term that does not match its precondition.
struct PreconditionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyChoreography : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoCommonSender : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The amend driver ran out of rounds with violations left.
struct NonConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace chorc
