#pragma once

#include <string>

namespace fimikit {

struct SandboxCheck {
  bool ok = false;
  std::string reason;  // empty when ok
  std::string token;   // offending token when rejected for a token
};

// Lexical gate for provider-supplied SQL. Accepts exactly one statement that
// begins with SELECT (optionally WITH-prefixed); rejects mutation verbs, DDL,
// PRAGMA, ATTACH and friends, and anything multi-statement. String literals,
// quoted identifiers and comments are skipped, so forbidden words inside
// them do not trigger.
//
// This is the first of three layers: accepted queries additionally run on a
// read-only connection with an authorizer installed.
SandboxCheck check_readonly_sql(const std::string& sql);

}  // namespace fimikit
