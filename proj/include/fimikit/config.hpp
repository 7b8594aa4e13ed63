#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "fimikit/engine.hpp"
#include "fimikit/remote_provider.hpp"
#include "fimikit/report.hpp"
#include "fimikit/store.hpp"

namespace fimikit {

// Single source of run parameters. Flags override individual fields per
// invocation; the effective run-relevant subset is hashed into the run
// record so a resume with a changed config (or playbook/taxonomy content)
// fails instead of silently diverging.
struct AppConfig {
  std::string store_path = "fimikit.db";
  std::string taxonomy_path;
  RunConfig run;
  std::string playbook_path;  // scripted provider
  RemoteOptions remote;       // remote provider
  QueryLimits limits;
  CostPricing pricing;

  static AppConfig load_file(const std::string& path);
  static AppConfig from_json(const nlohmann::json& doc);

  // Throws UserError when referenced files are missing or the provider
  // selection is inconsistent.
  void validate() const;

  // Hash of the frozen run identity: run config, dataset, taxonomy file
  // content, and the provider identity (playbook content for scripted,
  // endpoint+model for remote).
  std::string run_config_hash() const;
};

}  // namespace fimikit
