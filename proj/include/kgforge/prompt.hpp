#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace kgforge::prompt {

enum class Strategy {
  kEntityExpand,
  kRelationGlobal,
  kRelationLocal,
  kRelationReverse,
  kStructureKeywords,
};

inline constexpr std::array<Strategy, 5> kAllStrategies = {
    Strategy::kEntityExpand, Strategy::kRelationGlobal, Strategy::kRelationLocal,
    Strategy::kRelationReverse, Strategy::kStructureKeywords};

std::string_view strategy_key(Strategy s);
std::optional<Strategy> parse_strategy(std::string_view key);

// Relation explanation perspectives. Declaration order is the canonical
// composition order.
enum class RelationMode { kGlobal, kLocal, kReverse };

inline constexpr std::array<RelationMode, 3> kAllRelationModes = {
    RelationMode::kGlobal, RelationMode::kLocal, RelationMode::kReverse};

std::string_view relation_mode_name(RelationMode m);
std::optional<RelationMode> parse_relation_mode(std::string_view name);
Strategy strategy_for(RelationMode m);

inline constexpr std::string_view kEntityNamePlaceholder = "{Entity Name}";
inline constexpr std::string_view kRelationNamePlaceholder = "{Relation Name}";
inline constexpr std::string_view kEntityDescriptionPlaceholder = "{Entity Description}";

struct RenderedPrompt {
  std::string strategy;    // template key
  std::string subject_id;  // entity or relation id the prompt is about
  std::string text;

  friend bool operator==(const RenderedPrompt&, const RenderedPrompt&) = default;
};

// Template strings keyed by strategy. Every template holds exactly one
// placeholder. A template file is JSON:
//   {"version": 1, "templates": {"entity_expand": "...", ...}}
// Keys in a file override or extend the built-in five.
class TemplateSet {
 public:
  static const TemplateSet& defaults();
  static TemplateSet parse(std::string_view json_text);
  static TemplateSet load(const std::filesystem::path& path);

  int version() const { return version_; }
  bool contains(std::string_view key) const;
  const std::string& template_for(std::string_view key) const;
  const std::map<std::string, std::string, std::less<>>& templates() const { return templates_; }

  RenderedPrompt render(std::string_view key, std::string_view value,
                        std::string_view subject_id = {}) const;

  std::string to_json() const;

 private:
  void set(std::string key, std::string text);

  int version_ = 1;
  std::map<std::string, std::string, std::less<>> templates_;
};

RenderedPrompt render_entity_prompt(std::string_view name, std::string_view entity_id = {});
RenderedPrompt render_relation_prompt(std::string_view name, RelationMode mode,
                                      std::string_view relation_id = {});
RenderedPrompt render_keyword_prompt(std::string_view description,
                                     std::string_view entity_id = {});

}  // namespace kgforge::prompt
