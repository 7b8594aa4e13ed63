#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fimikit/evidence.hpp"
#include "fimikit/plan.hpp"
#include "fimikit/taxonomy.hpp"

namespace fimikit {

// The "analyst brain": chooses a technique from engine-supplied candidates,
// drafts an investigation plan, and decomposes findings into atomic claims.
// The engine validates every output before it touches the store; nothing a
// provider returns is trusted.
class Provider {
 public:
  virtual ~Provider() = default;

  virtual std::string name() const = 0;

  // Chosen id must be one of `candidates`; anything else is a contract
  // violation and aborts the iteration.
  virtual TechniqueChoice select_technique(const InvestigationContext& context,
                                           const std::vector<Technique>& candidates) = 0;

  virtual InvestigationPlan draft_plan(const Technique& technique,
                                       const InvestigationContext& context) = 0;

  // At most atomic_cap drafts survive (the engine truncates); every condition
  // must compile. Throws ProviderError when nothing usable can be produced.
  virtual std::vector<AtomicClaimDraft> extract_atomic_claims(const Finding& finding) = 0;

  // Accounting hook; the engine persists one row per recorded call.
  using CallRecorder = std::function<void(const ProviderCallRecord&)>;
  void set_recorder(CallRecorder recorder) { recorder_ = std::move(recorder); }

 protected:
  void record(const ProviderCallRecord& rec) {
    if (recorder_) recorder_(rec);
  }

 private:
  CallRecorder recorder_;
};

// One canned playbook entry: a plan template plus claim templates. Claim
// templates may reference computed metrics as "{{metric:NAME}}" inside
// strings (and as a whole-string threshold), resolved against the finding at
// extraction time. A template whose metric is unavailable is skipped.
struct PlaybookEntry {
  std::string evidence_type;
  std::string justification;
  nlohmann::json plan;                   // InvestigationPlan sans technique_id
  std::vector<nlohmann::json> claims;    // AtomicClaimDraft templates
};

// Deterministic per-technique script. "*" is the fallback entry used for
// techniques without a specific one.
struct Playbook {
  std::map<std::string, PlaybookEntry> entries;

  static Playbook load_file(const std::string& path);
  static Playbook from_json(const nlohmann::json& doc);

  const PlaybookEntry* entry_for(const std::string& technique_id) const;
  bool has_specific_entry(const std::string& technique_id) const;
};

// Fully deterministic provider driven by a playbook file. Selection policy:
// candidates with a specific playbook entry are preferred; in explore mode
// the lowest id wins, in exploit mode untested sub-techniques win first
// (specificity), then untested techniques, then the lowest id.
class ScriptedProvider : public Provider {
 public:
  // Plans omitting thresholds inherit the run config's defaults.
  explicit ScriptedProvider(Playbook playbook, double default_pass = 7.0,
                            double default_fail = 4.0);

  std::string name() const override { return "scripted"; }
  TechniqueChoice select_technique(const InvestigationContext& context,
                                   const std::vector<Technique>& candidates) override;
  InvestigationPlan draft_plan(const Technique& technique,
                               const InvestigationContext& context) override;
  std::vector<AtomicClaimDraft> extract_atomic_claims(const Finding& finding) override;

 private:
  Playbook playbook_;
  double default_pass_;
  double default_fail_;
};

// Substitutes {{metric:NAME}} placeholders in every string of a JSON claim
// template from the finding's metric values; returns nothing when a
// referenced metric is unavailable. Exposed for tests.
std::optional<nlohmann::json> instantiate_claim_template(const nlohmann::json& tpl,
                                                         const MetricOutcome& metrics);

}  // namespace fimikit
