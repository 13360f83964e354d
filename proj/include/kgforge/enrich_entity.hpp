#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "kgforge/enrich_types.hpp"
#include "kgforge/graph.hpp"
#include "kgforge/llm.hpp"
#include "kgforge/prompt.hpp"

namespace kgforge::enrich {

// Budget defaults in whitespace tokens.
inline constexpr std::size_t kFreebaseBudgetTokens = 70;
inline constexpr std::size_t kWordNetBudgetTokens = 50;

struct EntityAugmentation {
  kg::EntityId entity;
  std::string prompt_hash;
  std::string generated;  // raw response, kept for audit
  std::string merged;
  std::size_t budget_tokens = 0;
  bool empty_generation = false;
};

struct EntityBundle {
  std::string fingerprint;
  std::size_t budget_tokens = 0;
  std::vector<EntityAugmentation> items;  // entity load order
  std::vector<ItemError> errors;
};

// The original text, a single space, then the generated text with its
// whitespace collapsed; cut after `budget_tokens` whitespace tokens. The
// original is kept byte-for-byte when it fits the budget.
std::string merge_entity_text(std::string_view original, std::string_view generated,
                              std::size_t budget_tokens);

EntityBundle expand_descriptions(const kg::KnowledgeGraph& kg, llm::Gateway& gateway,
                                 std::size_t budget_tokens,
                                 const llm::GenerationParams& params = {},
                                 const prompt::TemplateSet& templates = prompt::TemplateSet::defaults());

}  // namespace kgforge::enrich
