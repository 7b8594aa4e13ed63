#pragma once

#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fimikit/provider.hpp"

namespace fimikit {

struct RemoteOptions {
  // Full chat-completions URL, e.g. "https://api.example.com/v1/chat/completions".
  std::string endpoint;
  std::string model;
  std::string api_key_env = "FIMIKIT_API_KEY";
  int transport_retries = 3;  // attempts per request
  int repair_rounds = 2;      // schema-repair round-trips before giving up
  int request_timeout_ms = 60000;
  int backoff_ms = 250;  // doubled per retry
};

// Chat-completions backend honoring the same contract as the scripted
// provider. Every HTTP attempt is recorded (status, latency, token usage);
// request bodies never contain the credential, which travels only in the
// Authorization header.
class RemoteProvider : public Provider {
 public:
  // Requires the credential env var to be set; throws UserError otherwise.
  RemoteProvider(RemoteOptions options, const Taxonomy* taxonomy);

  std::string name() const override { return "remote"; }
  TechniqueChoice select_technique(const InvestigationContext& context,
                                   const std::vector<Technique>& candidates) override;
  InvestigationPlan draft_plan(const Technique& technique,
                               const InvestigationContext& context) override;
  std::vector<AtomicClaimDraft> extract_atomic_claims(const Finding& finding) override;

  // Validator returns one message per problem; empty means accepted. On
  // problems the model is re-asked up to repair_rounds times with the
  // validation messages; ProviderError after that.
  using Validator = std::function<std::vector<std::string>(const nlohmann::json&)>;
  nlohmann::json call_remote_model(const std::string& phase, const std::string& system_prompt,
                                   const std::string& user_prompt, const Validator& validate);

 private:
  nlohmann::json post_chat(const std::string& phase, const nlohmann::json& payload);

  RemoteOptions options_;
  const Taxonomy* taxonomy_;
  std::string api_key_;
};

// Pulls the first JSON object/array out of a model reply, tolerating ```json
// fences and prose around it. Exposed for tests.
nlohmann::json extract_json_content(const std::string& content);

}  // namespace fimikit
