#include "fimikit/sandbox.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace fimikit {

namespace {

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return s;
}

const std::set<std::string>& forbidden_keywords() {
  // END is absent on purpose: as a statement it is already blocked by the
  // SELECT-first rule, and CASE ... END must stay legal.
  static const std::set<std::string> kw = {
      "INSERT",  "UPDATE",   "DELETE",  "REPLACE",   "DROP",    "CREATE",   "ALTER",
      "PRAGMA",  "ATTACH",   "DETACH",  "VACUUM",    "REINDEX", "ANALYZE",  "BEGIN",
      "COMMIT",  "ROLLBACK", "SAVEPOINT", "RELEASE", "TRANSACTION"};
  return kw;
}

// Functions with side effects or filesystem reach.
const std::set<std::string>& forbidden_functions() {
  static const std::set<std::string> fn = {"LOAD_EXTENSION", "READFILE", "WRITEFILE",
                                           "FTS3_TOKENIZER", "EDIT"};
  return fn;
}

SandboxCheck reject(const std::string& reason, const std::string& token = "") {
  SandboxCheck c;
  c.ok = false;
  c.reason = reason;
  c.token = token;
  return c;
}

}  // namespace

SandboxCheck check_readonly_sql(const std::string& sql) {
  std::size_t i = 0;
  const std::size_t n = sql.size();
  bool first_token_seen = false;
  bool statement_finished = false;  // a trailing ';' was consumed

  while (i < n) {
    const char c = sql[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    // line comment
    if (c == '-' && i + 1 < n && sql[i + 1] == '-') {
      while (i < n && sql[i] != '\n') ++i;
      continue;
    }
    // block comment
    if (c == '/' && i + 1 < n && sql[i + 1] == '*') {
      const std::size_t end = sql.find("*/", i + 2);
      if (end == std::string::npos) return reject("unterminated block comment");
      i = end + 2;
      continue;
    }
    if (statement_finished) {
      return reject("multiple statements are not allowed", std::string(1, c));
    }
    // string literal, '' escapes
    if (c == '\'') {
      ++i;
      while (true) {
        if (i >= n) return reject("unterminated string literal");
        if (sql[i] == '\'') {
          if (i + 1 < n && sql[i + 1] == '\'') {
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        ++i;
      }
      if (!first_token_seen) return reject("statement must begin with SELECT or WITH", "'");
      continue;
    }
    // quoted identifiers
    if (c == '"' || c == '`' || c == '[') {
      const char close = c == '[' ? ']' : c;
      ++i;
      while (i < n && sql[i] != close) ++i;
      if (i >= n) return reject("unterminated quoted identifier");
      ++i;
      if (!first_token_seen) return reject("statement must begin with SELECT or WITH");
      continue;
    }
    if (c == ';') {
      if (!first_token_seen) return reject("empty statement before ';'", ";");
      statement_finished = true;
      ++i;
      continue;
    }
    if (is_ident_start(c)) {
      std::size_t j = i;
      while (j < n && is_ident_char(sql[j])) ++j;
      const std::string word = sql.substr(i, j - i);
      const std::string up = upper(word);
      if (!first_token_seen) {
        if (up != "SELECT" && up != "WITH") {
          return reject("statement must begin with SELECT or WITH", word);
        }
        first_token_seen = true;
      }
      if (forbidden_keywords().count(up)) {
        return reject("forbidden keyword", word);
      }
      if (forbidden_functions().count(up)) {
        return reject("forbidden function", word);
      }
      i = j;
      continue;
    }
    // operators, numbers, parens
    if (!first_token_seen && !std::isdigit(static_cast<unsigned char>(c))) {
      // allow leading '(' for "(SELECT ...)"? Keep strict: plans emit plain SELECT.
      return reject("statement must begin with SELECT or WITH", std::string(1, c));
    }
    ++i;
  }

  if (!first_token_seen) return reject("empty statement");
  SandboxCheck ok;
  ok.ok = true;
  return ok;
}

}  // namespace fimikit
