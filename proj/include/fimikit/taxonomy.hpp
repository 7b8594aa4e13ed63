#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace fimikit {

// One DISARM technique or sub-technique. Sub-techniques carry a dotted id
// ("T0049.003") and always name their parent.
struct Technique {
  std::string id;
  std::string name;
  std::string tactic_id;
  std::optional<std::string> parent_id;
  std::string description;
  std::vector<std::string> summary_tags;

  bool is_sub_technique() const { return id.find('.') != std::string::npos; }
};

// Matches ^T[0-9]{4}(\.[0-9]{3})?$
bool valid_technique_id(const std::string& id);

// Immutable after load; safe for concurrent reads.
class Taxonomy {
 public:
  Taxonomy() = default;

  // Parses and validates a taxonomy file. The file is either a bare JSON
  // array of technique objects or {"version": ..., "techniques": [...]}.
  // Unknown object keys are tolerated; a warning per key is appended to
  // `warnings` when provided. Throws ValidationError listing every offending
  // entry (bad id, duplicate, dangling or mismatched parent).
  static Taxonomy load_file(const std::string& path, std::vector<std::string>* warnings = nullptr);
  static Taxonomy from_json(const nlohmann::json& doc, std::vector<std::string>* warnings = nullptr);

  const Technique* lookup(const std::string& id) const;
  // Direct sub-techniques of `id`, ascending id order. Unknown or leaf id
  // yields an empty list.
  std::vector<Technique> children(const std::string& id) const;

  const std::map<std::string, Technique>& techniques() const { return techniques_; }
  const std::string& version() const { return version_; }
  std::size_t size() const { return techniques_.size(); }
  bool empty() const { return techniques_.empty(); }

  nlohmann::json to_json() const;

 private:
  std::map<std::string, Technique> techniques_;
  std::string version_;
};

}  // namespace fimikit
