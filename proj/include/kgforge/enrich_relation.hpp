#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kgforge/enrich_types.hpp"
#include "kgforge/graph.hpp"
#include "kgforge/llm.hpp"
#include "kgforge/prompt.hpp"

namespace kgforge::enrich {

inline constexpr std::string_view kSeparator = " [SEP] ";

struct RelationAugmentation {
  kg::RelationId relation;
  std::map<prompt::RelationMode, std::string> texts;  // raw responses
  std::map<prompt::RelationMode, std::string> prompt_hashes;
  std::string composed;
};

struct RelationBundle {
  std::string fingerprint;
  std::vector<prompt::RelationMode> modes;
  std::vector<RelationAugmentation> items;  // relation load order
  std::vector<ItemError> errors;
};

// Collapses whitespace and rewrites a literal "[SEP]" as "[SEP ]" so the
// joined text splits back into its parts.
std::string sanitize_relation_text(std::string_view text);

// name, a space, then the texts in Global, Local, Reverse order joined by
// " [SEP] ". Absent or empty texts are skipped; a repeated mode keeps its
// first text.
std::string compose_relation_text(
    std::string_view name, std::span<const std::pair<prompt::RelationMode, std::string>> texts);

RelationBundle describe_relations(const kg::KnowledgeGraph& kg, llm::Gateway& gateway,
                                  std::span<const prompt::RelationMode> modes,
                                  const llm::GenerationParams& params = {},
                                  const prompt::TemplateSet& templates = prompt::TemplateSet::defaults());

}  // namespace kgforge::enrich
