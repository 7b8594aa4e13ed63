#include "fimikit/config.hpp"

#include <filesystem>

#include "fimikit/common.hpp"

namespace fimikit {

using nlohmann::json;

AppConfig AppConfig::load_file(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw UserError("config " + path + " is not valid JSON: " + e.what());
  }
  AppConfig cfg = from_json(doc);
  // Relative paths in the config resolve against the config file's directory.
  const auto base = std::filesystem::path(path).parent_path();
  auto resolve = [&](std::string& p) {
    if (!p.empty() && std::filesystem::path(p).is_relative()) {
      p = (base / p).lexically_normal().string();
    }
  };
  resolve(cfg.store_path);
  resolve(cfg.taxonomy_path);
  resolve(cfg.playbook_path);
  return cfg;
}

AppConfig AppConfig::from_json(const json& doc) {
  if (!doc.is_object()) throw UserError("config must be a JSON object");
  AppConfig cfg;
  cfg.store_path = doc.value("store", "fimikit.db");
  cfg.taxonomy_path = doc.value("taxonomy", "");
  if (doc.contains("run") && doc["run"].is_object()) {
    cfg.run = RunConfig::from_json(doc["run"]);
  }
  cfg.run.dataset = doc.value("dataset", cfg.run.dataset);
  if (doc.contains("provider") && doc["provider"].is_object()) {
    const json& p = doc["provider"];
    cfg.run.provider_kind = p.value("kind", cfg.run.provider_kind);
    cfg.playbook_path = p.value("playbook", "");
    cfg.remote.endpoint = p.value("endpoint", "");
    cfg.remote.model = p.value("model", "");
    cfg.remote.api_key_env = p.value("api_key_env", cfg.remote.api_key_env);
    cfg.remote.transport_retries = p.value("transport_retries", cfg.remote.transport_retries);
    cfg.remote.repair_rounds = p.value("repair_rounds", cfg.remote.repair_rounds);
    cfg.remote.request_timeout_ms = p.value("request_timeout_ms", cfg.remote.request_timeout_ms);
    cfg.remote.backoff_ms = p.value("backoff_ms", cfg.remote.backoff_ms);
    if (p.contains("pricing") && p["pricing"].is_object()) {
      cfg.pricing.prompt_usd_per_1m = p["pricing"].value("prompt_usd_per_1m", 0.0);
      cfg.pricing.completion_usd_per_1m = p["pricing"].value("completion_usd_per_1m", 0.0);
    }
  }
  if (doc.contains("limits") && doc["limits"].is_object()) {
    cfg.limits.timeout_ms = doc["limits"].value("query_timeout_ms", cfg.limits.timeout_ms);
    cfg.limits.max_rows = doc["limits"].value("max_rows", cfg.limits.max_rows);
  }
  return cfg;
}

void AppConfig::validate() const {
  if (taxonomy_path.empty()) throw UserError("config: taxonomy path is required");
  if (!std::filesystem::exists(taxonomy_path)) {
    throw UserError("config: taxonomy file does not exist: " + taxonomy_path);
  }
  if (run.provider_kind == "scripted") {
    if (playbook_path.empty()) {
      throw UserError("config: scripted provider requires provider.playbook");
    }
    if (!std::filesystem::exists(playbook_path)) {
      throw UserError("config: playbook file does not exist: " + playbook_path);
    }
  } else if (run.provider_kind == "remote") {
    if (remote.endpoint.empty() || remote.model.empty()) {
      throw UserError("config: remote provider requires provider.endpoint and provider.model");
    }
  } else {
    throw UserError("config: provider.kind must be scripted or remote");
  }
  const auto parent = std::filesystem::path(store_path).parent_path();
  if (!parent.empty() && !std::filesystem::exists(parent)) {
    throw UserError("config: store directory does not exist: " + parent.string());
  }
}

std::string AppConfig::run_config_hash() const {
  std::string identity = run.to_json().dump();
  identity += "|taxonomy:" + to_hex(fnv1a64(read_file(taxonomy_path)));
  if (run.provider_kind == "scripted") {
    identity += "|playbook:" + to_hex(fnv1a64(read_file(playbook_path)));
  } else {
    identity += "|remote:" + remote.endpoint + "/" + remote.model;
  }
  return to_hex(fnv1a64(identity));
}

}  // namespace fimikit
