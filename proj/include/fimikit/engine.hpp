#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fimikit/provider.hpp"
#include "fimikit/store.hpp"
#include "fimikit/taxonomy.hpp"

namespace fimikit {

struct RunConfig {
  int max_iterations = 15;       // iteration 1 is EDA, 2..N are rounds
  double pass_threshold = 7.0;   // score >= pass -> PASS
  double fail_threshold = 4.0;   // score <  fail -> FAIL
  double explore_fraction = 0.5; // share of rounds spent in explore mode
  int atomic_cap = 3;            // claims per round
  std::uint64_t seed = 0;
  std::string provider_kind = "scripted";  // scripted | remote
  std::string dataset;
  int top_k = 3;  // promising techniques carried into exploit mode

  void validate() const;  // throws UserError
  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& doc);
};

struct RunSummary {
  std::int64_t run_id = 0;
  int iterations_executed = 0;
  int findings_pass = 0;
  int findings_inconclusive = 0;
  int findings_fail = 0;
  int failed_iterations = 0;
  int claims = 0;
  bool completed = false;
  std::string notice;
};

// explore for the first ceil(explore_fraction * (max_iterations - 1)) rounds,
// exploit afterwards.
Mode select_mode(int iteration_index, const RunConfig& config);

// Candidate arms for the provider to choose within.
//   explore: untested techniques only (all techniques when none are left)
//   exploit: top-k tested techniques by max signal (desc, then id asc) plus
//            all their sub-techniques; all techniques when none are tested
std::vector<Technique> candidate_arms(const Taxonomy& taxonomy,
                                      const std::map<std::string, TechniqueStat>& stats,
                                      Mode mode, int top_k);

// Drives runs iteration by iteration. Each iteration reads everything it
// needs from the store, computes in memory, and commits its results in one
// transaction; no state survives between iterations outside the store.
class Engine {
 public:
  Engine(Store& store, const Taxonomy& taxonomy, Provider& provider, RunConfig config,
         QueryLimits limits, std::string config_hash);

  // Creates a run and executes iterations until max_iterations (or the
  // stop-after mark). Individual iteration failures are recorded and do not
  // stop the loop.
  RunSummary run();

  // Continues an interrupted run at its next_iteration; completed runs are a
  // no-op with a notice. Throws UserError when the active config does not
  // hash to the one frozen in the run record.
  RunSummary resume(std::int64_t run_id);

  // Executes exactly the run's next iteration.
  IterationRow run_iteration(std::int64_t run_id);

  // Stop the loop once this iteration has committed (interruption harness /
  // operational splitting). 0 disables.
  void set_stop_after(int iteration) { stop_after_ = iteration; }

  RunSummary summarize(std::int64_t run_id);

 private:
  void execute_round(const RunRow& run, IterationCommit& commit);

  Store& store_;
  const Taxonomy& taxonomy_;
  Provider& provider_;
  RunConfig config_;
  QueryLimits limits_;
  std::string config_hash_;
  int stop_after_ = 0;
};

}  // namespace fimikit
