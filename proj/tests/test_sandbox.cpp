#include <catch2/catch_amalgamated.hpp>

#include "fimikit/sandbox.hpp"

using namespace fimikit;

TEST_CASE("gate accepts plain SELECT and WITH-prefixed SELECT") {
  CHECK(check_readonly_sql("SELECT 1").ok);
  CHECK(check_readonly_sql("select count(*) from messages").ok);
  CHECK(check_readonly_sql("  WITH t AS (SELECT 1 AS x) SELECT x FROM t").ok);
  CHECK(check_readonly_sql("WITH RECURSIVE c(x) AS (SELECT 1) SELECT * FROM c").ok);
  CHECK(check_readonly_sql("SELECT 1;").ok);        // single trailing semicolon
  CHECK(check_readonly_sql("SELECT 1; -- done").ok);
}

TEST_CASE("gate rejects mutation verbs with the offending token") {
  const auto del = check_readonly_sql("DELETE FROM messages");
  CHECK_FALSE(del.ok);
  CHECK(del.token == "DELETE");

  CHECK_FALSE(check_readonly_sql("INSERT INTO messages VALUES (1)").ok);
  CHECK_FALSE(check_readonly_sql("UPDATE accounts SET label='x'").ok);
  CHECK_FALSE(check_readonly_sql("DROP TABLE messages").ok);
  CHECK_FALSE(check_readonly_sql("CREATE TABLE t(x)").ok);
  CHECK_FALSE(check_readonly_sql("REPLACE INTO t VALUES (1)").ok);
}

TEST_CASE("gate rejects mutation hidden behind a leading SELECT") {
  const auto c = check_readonly_sql("SELECT 1; DELETE FROM messages");
  CHECK_FALSE(c.ok);
}

TEST_CASE("gate rejects DDL-ish statements and session control") {
  CHECK_FALSE(check_readonly_sql("PRAGMA journal_mode=DELETE").ok);
  CHECK_FALSE(check_readonly_sql("ATTACH DATABASE '/tmp/x.db' AS other").ok);
  CHECK_FALSE(check_readonly_sql("DETACH DATABASE other").ok);
  CHECK_FALSE(check_readonly_sql("VACUUM").ok);
  CHECK_FALSE(check_readonly_sql("BEGIN").ok);
  CHECK_FALSE(check_readonly_sql("ANALYZE").ok);
}

TEST_CASE("gate rejects forbidden words even deep inside a SELECT") {
  CHECK_FALSE(check_readonly_sql("SELECT * FROM messages WHERE 1=1 UNION SELECT 1 FROM x; ATTACH DATABASE 'y' AS z").ok);
  CHECK_FALSE(check_readonly_sql("SELECT load_extension('evil')").ok);
}

TEST_CASE("forbidden words inside string literals and comments do not trigger") {
  CHECK(check_readonly_sql("SELECT * FROM messages WHERE text = 'DELETE FROM hope'").ok);
  CHECK(check_readonly_sql("SELECT 'it''s a DROP TABLE joke'").ok);
  CHECK(check_readonly_sql("SELECT 1 -- DROP TABLE messages").ok);
  CHECK(check_readonly_sql("SELECT /* DELETE */ 1").ok);
  CHECK(check_readonly_sql("SELECT \"delete\" FROM messages").ok);  // quoted identifier
}

TEST_CASE("gate rejects statements that do not start with SELECT or WITH") {
  const auto c = check_readonly_sql("EXPLAIN SELECT 1");
  CHECK_FALSE(c.ok);
  CHECK(c.token == "EXPLAIN");
  CHECK_FALSE(check_readonly_sql("VALUES (1)").ok);
}

TEST_CASE("gate rejects malformed and empty text") {
  CHECK_FALSE(check_readonly_sql("").ok);
  CHECK_FALSE(check_readonly_sql("   \n\t").ok);
  CHECK_FALSE(check_readonly_sql("SELECT 'unterminated").ok);
  CHECK_FALSE(check_readonly_sql("SELECT /* unterminated").ok);
  CHECK_FALSE(check_readonly_sql(";").ok);
}
