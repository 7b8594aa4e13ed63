#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "fimikit/common.hpp"
#include "fimikit/store.hpp"
#include "support.hpp"

using namespace fimikit;
using nlohmann::json;
using testsupport::TempDir;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

CliResult run_cli(const TempDir& dir, const std::string& args) {
  const std::string out = dir.file("cli_output.txt");
  const std::string cmd = std::string(FIMIKIT_CLI_PATH) + " " + args + " > " + out + " 2>&1";
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.output = read_file(out);
  return r;
}

// Writes a campaign spec + config wired to paths inside `dir`.
void write_fixture_configs(const TempDir& dir, std::uint64_t seed, bool with_patterns) {
  json patterns = json::array();
  if (with_patterns) {
    patterns.push_back({{"type", "creation_burst"},
                        {"window", {{"start", "2025-06-10 00:00:00"}, {"end", "2025-06-11 00:00:00"}}},
                        {"share_positive", 0.97},
                        {"coverage", 0.9}});
    patterns.push_back({{"type", "duplicate_comments"}, {"rate", 0.3}, {"min_length", 12}});
  }
  const json spec = {{"name", "clidemo"},
                     {"seed", seed},
                     {"platform", "microblog"},
                     {"accounts", {{"positive", 40}, {"negative", 140}}},
                     {"messages", {{"total", 3000}}},
                     {"time_range", {{"start", "2025-06-01 00:00:00"}, {"end", "2025-08-30 00:00:00"}}},
                     {"patterns", patterns}};
  write_file(dir.file("spec.json"), spec.dump(2));

  const json config = {{"store", dir.file("store.db")},
                       {"taxonomy", std::string(FIMIKIT_DATA_DIR) + "/taxonomy.json"},
                       {"dataset", "clidemo"},
                       {"run", {{"max_iterations", 15}, {"seed", seed}}},
                       {"provider",
                        {{"kind", "scripted"},
                         {"playbook", std::string(FIMIKIT_DATA_DIR) + "/playbook.json"}}}};
  write_file(dir.file("config.json"), config.dump(2));
}

}  // namespace

TEST_CASE("cli: full sequence synth -> ingest -> run -> verify -> report") {
  TempDir dir;
  write_fixture_configs(dir, 42, true);

  auto r = run_cli(dir, "synth --spec " + dir.file("spec.json") + " --out " + dir.file("data"));
  REQUIRE(r.exit_code == 0);

  r = run_cli(dir, "ingest --store " + dir.file("store.db") + " --manifest " +
                       dir.file("data/manifest.json") + " --accounts " +
                       dir.file("data/accounts.jsonl") + " --messages " +
                       dir.file("data/messages.jsonl"));
  REQUIRE(r.exit_code == 0);
  CHECK(json::parse(r.output)["accounts"]["accepted"] == 180);

  r = run_cli(dir, "run --config " + dir.file("config.json"));
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.find("15 iteration(s)") != std::string::npos);

  r = run_cli(dir, "verify --config " + dir.file("config.json") + " --run-id 1");
  REQUIRE(r.exit_code == 0);

  r = run_cli(dir, "report --config " + dir.file("config.json") +
                       " --run-id 1 --format structured --out " + dir.file("report.json"));
  REQUIRE(r.exit_code == 0);
  const json report = json::parse(read_file(dir.file("report.json")));
  CHECK(report["run"]["run_id"] == 1);
  CHECK(report["iterations"].size() == 15);
  CHECK_FALSE(report["verifications"].empty());
  CHECK(report["cost"]["wall_ms"].get<double>() > 0.0);

  r = run_cli(dir, "report --config " + dir.file("config.json") + " --run-id 1 --out " +
                       dir.file("report.md"));
  REQUIRE(r.exit_code == 0);
  CHECK(read_file(dir.file("report.md")).find("# Investigation Report") != std::string::npos);

  // trace the first claim end to end
  r = run_cli(dir, "trace --config " + dir.file("config.json") + " --evidence-id 1");
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.find("-> technique") != std::string::npos);
}

TEST_CASE("cli: run --auto-verify --auto-report equals the spelled-out sequence") {
  TempDir manual, combined;
  write_fixture_configs(manual, 7, true);
  write_fixture_configs(combined, 7, true);

  auto prep = [&](const TempDir& dir) {
    REQUIRE(run_cli(dir, "synth --spec " + dir.file("spec.json") + " --out " + dir.file("data"))
                .exit_code == 0);
    REQUIRE(run_cli(dir, "ingest --store " + dir.file("store.db") + " --manifest " +
                             dir.file("data/manifest.json") + " --accounts " +
                             dir.file("data/accounts.jsonl") + " --messages " +
                             dir.file("data/messages.jsonl"))
                .exit_code == 0);
  };
  prep(manual);
  prep(combined);

  REQUIRE(run_cli(manual, "run --config " + manual.file("config.json")).exit_code == 0);
  REQUIRE(run_cli(manual, "verify --config " + manual.file("config.json") + " --run-id 1")
              .exit_code == 0);
  REQUIRE(run_cli(manual, "report --config " + manual.file("config.json") +
                              " --run-id 1 --format structured --out " + manual.file("out.json"))
              .exit_code == 0);

  REQUIRE(run_cli(combined, "run --config " + combined.file("config.json") +
                                " --auto-verify --auto-report --out " + combined.file("out.md"))
              .exit_code == 0);
  REQUIRE(run_cli(combined, "report --config " + combined.file("config.json") +
                                " --run-id 1 --format structured --out " + combined.file("out.json"))
              .exit_code == 0);

  // identical investigation state either way (timings aside)
  const json a = json::parse(read_file(manual.file("out.json")));
  const json b = json::parse(read_file(combined.file("out.json")));
  auto strip = [](json doc) {
    for (auto& it : doc["iterations"]) it.erase("duration_ms");
    for (auto& f : doc["findings"]) {
      for (auto& entry : f["query_log"]) entry["duration_ms"] = 0.0;
    }
    doc["run"].erase("wall_ms");
    doc["cost"].erase("wall_ms");
    doc.erase("provider_calls");
    doc["cost"].erase("provider_calls");
    return doc;
  };
  CHECK(strip(a) == strip(b));
}

TEST_CASE("cli: resume completes an interrupted run") {
  TempDir dir;
  write_fixture_configs(dir, 13, true);
  REQUIRE(run_cli(dir, "synth --spec " + dir.file("spec.json") + " --out " + dir.file("data"))
              .exit_code == 0);
  REQUIRE(run_cli(dir, "ingest --store " + dir.file("store.db") + " --manifest " +
                           dir.file("data/manifest.json") + " --accounts " +
                           dir.file("data/accounts.jsonl") + " --messages " +
                           dir.file("data/messages.jsonl"))
              .exit_code == 0);

  auto r = run_cli(dir, "run --config " + dir.file("config.json") + " --stop-after 6");
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.find("6 iteration(s)") != std::string::npos);

  r = run_cli(dir, "resume --config " + dir.file("config.json") + " --run-id 1");
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.find("15 iteration(s)") != std::string::npos);

  // resuming again: no-op notice
  r = run_cli(dir, "resume --config " + dir.file("config.json") + " --run-id 1");
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.find("already complete") != std::string::npos);
}

TEST_CASE("cli: taxonomy-check validates the shipped fixture") {
  TempDir dir;
  auto r = run_cli(dir, "taxonomy-check --taxonomy " + std::string(FIMIKIT_DATA_DIR) +
                            "/taxonomy.json");
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.find("taxonomy ok") != std::string::npos);
}

TEST_CASE("cli: --help documents the subcommands and exits 0") {
  TempDir dir;
  const auto r = run_cli(dir, "--help");
  CHECK(r.exit_code == 0);
  for (const char* sub : {"ingest", "run", "resume", "verify", "report", "synth", "trace",
                          "taxonomy-check"}) {
    CHECK(r.output.find(sub) != std::string::npos);
  }
}

TEST_CASE("cli: user errors exit 1") {
  TempDir dir;

  // unknown subcommand
  auto r = run_cli(dir, "frobnicate");
  CHECK(r.exit_code == 1);

  // missing config file
  r = run_cli(dir, "run --config " + dir.file("missing.json"));
  CHECK(r.exit_code == 1);

  // remote provider without its credential env var: startup error naming it
  const json config = {{"store", dir.file("store.db")},
                       {"taxonomy", std::string(FIMIKIT_DATA_DIR) + "/taxonomy.json"},
                       {"dataset", "any"},
                       {"provider",
                        {{"kind", "remote"},
                         {"endpoint", "https://example.invalid/v1/chat/completions"},
                         {"model", "m"},
                         {"api_key_env", "FIMIKIT_ABSENT_KEY"}}}};
  write_file(dir.file("remote.json"), config.dump());
  unsetenv("FIMIKIT_ABSENT_KEY");
  r = run_cli(dir, "run --config " + dir.file("remote.json"));
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("FIMIKIT_ABSENT_KEY") != std::string::npos);
}
