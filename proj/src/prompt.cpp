#include "kgforge/prompt.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "kgforge/errors.hpp"

namespace kgforge::prompt {
namespace {

constexpr std::string_view kPlaceholders[] = {kEntityNamePlaceholder, kRelationNamePlaceholder,
                                              kEntityDescriptionPlaceholder};

struct Located {
  std::size_t pos;
  std::string_view placeholder;
};

// Finds the single placeholder in a template. Throws unless exactly one
// placeholder occurrence exists.
Located locate_placeholder(std::string_view key, std::string_view text) {
  std::optional<Located> found;
  for (auto ph : kPlaceholders) {
    for (std::size_t pos = text.find(ph); pos != std::string_view::npos;
         pos = text.find(ph, pos + ph.size())) {
      if (found) {
        throw FormatError("template '" + std::string(key) + "' has more than one placeholder");
      }
      found = Located{pos, ph};
    }
  }
  if (!found) throw FormatError("template '" + std::string(key) + "' has no placeholder");
  return *found;
}

}  // namespace

std::string_view strategy_key(Strategy s) {
  switch (s) {
    case Strategy::kEntityExpand: return "entity_expand";
    case Strategy::kRelationGlobal: return "relation_global";
    case Strategy::kRelationLocal: return "relation_local";
    case Strategy::kRelationReverse: return "relation_reverse";
    case Strategy::kStructureKeywords: return "structure_keywords";
  }
  return "";
}

std::optional<Strategy> parse_strategy(std::string_view key) {
  for (Strategy s : kAllStrategies) {
    if (strategy_key(s) == key) return s;
  }
  return std::nullopt;
}

std::string_view relation_mode_name(RelationMode m) {
  switch (m) {
    case RelationMode::kGlobal: return "global";
    case RelationMode::kLocal: return "local";
    case RelationMode::kReverse: return "reverse";
  }
  return "";
}

std::optional<RelationMode> parse_relation_mode(std::string_view name) {
  std::string lower(name);
  for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (RelationMode m : kAllRelationModes) {
    if (relation_mode_name(m) == lower) return m;
  }
  if (lower == "g") return RelationMode::kGlobal;
  if (lower == "l") return RelationMode::kLocal;
  if (lower == "r") return RelationMode::kReverse;
  return std::nullopt;
}

Strategy strategy_for(RelationMode m) {
  switch (m) {
    case RelationMode::kGlobal: return Strategy::kRelationGlobal;
    case RelationMode::kLocal: return Strategy::kRelationLocal;
    case RelationMode::kReverse: return Strategy::kRelationReverse;
  }
  return Strategy::kRelationGlobal;
}

const TemplateSet& TemplateSet::defaults() {
  static const TemplateSet instance = [] {
    TemplateSet t;
    t.set(std::string(strategy_key(Strategy::kEntityExpand)),
          "Please provide all information about {Entity Name}. "
          "Give the rationale before answering:");
    t.set(std::string(strategy_key(Strategy::kRelationGlobal)),
          "Please provide an explanation of the significance of the relation {Relation Name} "
          "in a knowledge graph with one sentence:");
    t.set(std::string(strategy_key(Strategy::kRelationLocal)),
          "Please provide an explanation of the meaning of the triplet (head entity, "
          "{Relation Name}, tail entity) and rephrase it into a sentence:");
    t.set(std::string(strategy_key(Strategy::kRelationReverse)),
          "Please convert the relation {Relation Name} into a verb form and provide a "
          "statement in the passive voice:");
    t.set(std::string(strategy_key(Strategy::kStructureKeywords)),
          "Please extract the five most representative keywords from the following text: "
          "{Entity Description}. Keywords:");
    return t;
  }();
  return instance;
}

void TemplateSet::set(std::string key, std::string text) {
  if (key.empty()) throw FormatError("template key must be non-empty");
  locate_placeholder(key, text);
  templates_[std::move(key)] = std::move(text);
}

TemplateSet TemplateSet::parse(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("template file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("templates") || !doc["templates"].is_object()) {
    throw FormatError("template file must be an object with a 'templates' object");
  }
  TemplateSet out = defaults();
  if (doc.contains("version")) {
    if (!doc["version"].is_number_integer()) throw FormatError("template 'version' must be an integer");
    out.version_ = doc["version"].get<int>();
  }
  for (const auto& [key, value] : doc["templates"].items()) {
    if (!value.is_string()) throw FormatError("template '" + key + "' must be a string");
    out.set(key, value.get<std::string>());
  }
  return out;
}

TemplateSet TemplateSet::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("missing file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

bool TemplateSet::contains(std::string_view key) const { return templates_.find(key) != templates_.end(); }

const std::string& TemplateSet::template_for(std::string_view key) const {
  auto it = templates_.find(key);
  if (it == templates_.end()) throw InvalidArgument("unknown template key: " + std::string(key));
  return it->second;
}

RenderedPrompt TemplateSet::render(std::string_view key, std::string_view value,
                                   std::string_view subject_id) const {
  const std::string& tmpl = template_for(key);
  Located at = locate_placeholder(key, tmpl);
  if (value.empty()) {
    throw InvalidArgument("cannot render '" + std::string(key) + "': empty " +
                          std::string(at.placeholder));
  }
  std::string text;
  text.reserve(tmpl.size() + value.size());
  text.append(tmpl, 0, at.pos);
  text.append(value);
  text.append(tmpl, at.pos + at.placeholder.size());
  return {std::string(key), std::string(subject_id), std::move(text)};
}

std::string TemplateSet::to_json() const {
  nlohmann::json doc;
  doc["version"] = version_;
  doc["templates"] = nlohmann::json::object();
  for (const auto& [k, v] : templates_) doc["templates"][k] = v;
  return doc.dump(2) + "\n";
}

RenderedPrompt render_entity_prompt(std::string_view name, std::string_view entity_id) {
  return TemplateSet::defaults().render(strategy_key(Strategy::kEntityExpand), name, entity_id);
}

RenderedPrompt render_relation_prompt(std::string_view name, RelationMode mode,
                                      std::string_view relation_id) {
  return TemplateSet::defaults().render(strategy_key(strategy_for(mode)), name, relation_id);
}

RenderedPrompt render_keyword_prompt(std::string_view description, std::string_view entity_id) {
  return TemplateSet::defaults().render(strategy_key(Strategy::kStructureKeywords), description,
                                        entity_id);
}

}  // namespace kgforge::prompt
