#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace fimikit {

// ---------------------------------------------------------------------------
// Errors. Callers distinguish operator mistakes (bad input, bad config) from
// internal failures via the exception type; the CLI maps them to exit codes
// 1 and 2 respectively.
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad operator input: malformed files, unknown ids, invalid flags.
class UserError : public Error {
 public:
  using Error::Error;
};

// Input failed structural validation; carries one message per offending entry.
class ValidationError : public UserError {
 public:
  ValidationError(const std::string& what, std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

// A query was rejected by the read-only gate; carries the offending token.
class SandboxError : public Error {
 public:
  SandboxError(const std::string& reason, std::string token);
  const std::string& token() const { return token_; }

 private:
  std::string token_;
};

class StoreError : public Error {
 public:
  using Error::Error;
};

// Provider output broke the contract (bad schema, id outside candidates,
// exhausted repair rounds). Aborts the iteration, not the run.
class ProviderError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Query results. Cells mirror the storage engine's dynamic types; monostate
// is NULL.
// ---------------------------------------------------------------------------

using Cell = std::variant<std::monostate, std::int64_t, double, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  bool truncated = false;  // row limit hit; result is a prefix

  // Index of a named column, or -1.
  int column_index(const std::string& name) const;
};

bool cell_is_null(const Cell& c);
// Numeric view of a cell: ints and reals directly, numeric strings parsed,
// everything else absent.
std::optional<double> cell_as_number(const Cell& c);
std::string cell_to_string(const Cell& c);

// ---------------------------------------------------------------------------
// Time. All timestamps are UTC seconds since the epoch; the canonical text
// rendering is "YYYY-MM-DD HH:MM:SS" (UTC, no zone suffix).
// ---------------------------------------------------------------------------

// Accepts epoch seconds, "YYYY-MM-DD HH:MM:SS", ISO-8601 with 'T' and an
// optional 'Z' or +hh:mm offset, or a bare date.
std::optional<std::int64_t> parse_timestamp(const std::string& text);
std::string format_timestamp(std::int64_t epoch_seconds);
std::int64_t now_epoch_seconds();

// ---------------------------------------------------------------------------
// Misc
// ---------------------------------------------------------------------------

// Round half-up to one decimal place. Fixed rule so scores and published
// percentages reproduce bit-for-bit everywhere.
double round_half_up_1(double x);

std::uint64_t fnv1a64(const void* data, std::size_t len);
std::uint64_t fnv1a64(const std::string& s);
std::string to_hex(std::uint64_t v);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

// Canonical number rendering for text substitution: integral values without
// a decimal point, everything else shortest round-trip form.
std::string format_number(double v);

}  // namespace fimikit
