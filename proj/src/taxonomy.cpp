#include "fimikit/taxonomy.hpp"

#include <cctype>
#include <set>

#include <nlohmann/json.hpp>

#include "fimikit/common.hpp"

namespace fimikit {

using nlohmann::json;

bool valid_technique_id(const std::string& id) {
  auto digits = [](const std::string& s, std::size_t from, std::size_t count) {
    for (std::size_t i = from; i < from + count; ++i) {
      if (i >= s.size() || !std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    }
    return true;
  };
  if (id.size() != 5 && id.size() != 9) return false;
  if (id[0] != 'T' || !digits(id, 1, 4)) return false;
  if (id.size() == 9) {
    if (id[5] != '.' || !digits(id, 6, 3)) return false;
  }
  return true;
}

static std::string parent_prefix(const std::string& sub_id) { return sub_id.substr(0, 5); }

Taxonomy Taxonomy::load_file(const std::string& path, std::vector<std::string>* warnings) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw UserError("taxonomy file " + path + " is not valid JSON: " + e.what());
  }
  return from_json(doc, warnings);
}

Taxonomy Taxonomy::from_json(const json& doc, std::vector<std::string>* warnings) {
  static const std::set<std::string> known_keys = {"id",          "name",        "tactic_id",
                                                   "parent_id",   "description", "summary_tags"};
  const json* entries = nullptr;
  Taxonomy tax;
  if (doc.is_array()) {
    entries = &doc;
  } else if (doc.is_object() && doc.contains("techniques") && doc["techniques"].is_array()) {
    entries = &doc["techniques"];
    if (doc.contains("version") && doc["version"].is_string()) {
      tax.version_ = doc["version"].get<std::string>();
    }
  } else {
    throw UserError("taxonomy document must be an array or {version, techniques}");
  }

  std::vector<std::string> problems;
  for (std::size_t i = 0; i < entries->size(); ++i) {
    const json& e = (*entries)[i];
    if (!e.is_object()) {
      problems.push_back("entry " + std::to_string(i) + ": not an object");
      continue;
    }
    Technique t;
    t.id = e.value("id", "");
    t.name = e.value("name", "");
    t.tactic_id = e.value("tactic_id", "");
    t.description = e.value("description", "");
    if (e.contains("parent_id") && e["parent_id"].is_string()) {
      t.parent_id = e["parent_id"].get<std::string>();
    }
    if (e.contains("summary_tags") && e["summary_tags"].is_array()) {
      for (const auto& tag : e["summary_tags"]) {
        if (tag.is_string()) t.summary_tags.push_back(tag.get<std::string>());
      }
    }
    if (warnings) {
      for (const auto& [key, _] : e.items()) {
        if (!known_keys.count(key)) {
          warnings->push_back("technique " + (t.id.empty() ? "#" + std::to_string(i) : t.id) +
                              ": ignoring unknown field '" + key + "'");
        }
      }
    }

    if (!valid_technique_id(t.id)) {
      problems.push_back("entry " + std::to_string(i) + ": invalid technique id '" + t.id + "'");
      continue;
    }
    if (t.is_sub_technique() != t.parent_id.has_value()) {
      problems.push_back("technique " + t.id +
                         (t.is_sub_technique() ? ": sub-technique missing parent_id"
                                               : ": parent_id only allowed on sub-techniques"));
      continue;
    }
    if (t.parent_id && *t.parent_id != parent_prefix(t.id)) {
      problems.push_back("technique " + t.id + ": parent_id '" + *t.parent_id +
                         "' does not match id prefix");
      continue;
    }
    if (tax.techniques_.count(t.id)) {
      problems.push_back("technique " + t.id + ": duplicate id");
      continue;
    }
    tax.techniques_.emplace(t.id, std::move(t));
  }

  // Parents must exist after the whole file is read.
  for (const auto& [id, t] : tax.techniques_) {
    if (t.parent_id && !tax.techniques_.count(*t.parent_id)) {
      problems.push_back("technique " + id + ": parent '" + *t.parent_id + "' not found");
    }
  }

  if (!problems.empty()) {
    throw ValidationError("taxonomy validation failed (" + std::to_string(problems.size()) +
                              " problem(s)): " + problems.front(),
                          problems);
  }
  return tax;
}

const Technique* Taxonomy::lookup(const std::string& id) const {
  auto it = techniques_.find(id);
  return it == techniques_.end() ? nullptr : &it->second;
}

std::vector<Technique> Taxonomy::children(const std::string& id) const {
  std::vector<Technique> out;
  // std::map iteration is already ascending by id.
  for (const auto& [tid, t] : techniques_) {
    if (t.parent_id && *t.parent_id == id) out.push_back(t);
  }
  return out;
}

json Taxonomy::to_json() const {
  json arr = json::array();
  for (const auto& [id, t] : techniques_) {
    json e = {{"id", t.id},
              {"name", t.name},
              {"tactic_id", t.tactic_id},
              {"description", t.description}};
    if (t.parent_id) e["parent_id"] = *t.parent_id;
    if (!t.summary_tags.empty()) e["summary_tags"] = t.summary_tags;
    arr.push_back(std::move(e));
  }
  return json{{"version", version_}, {"techniques", std::move(arr)}};
}

}  // namespace fimikit
