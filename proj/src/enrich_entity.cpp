#include "kgforge/enrich_entity.hpp"

#include "kgforge/errors.hpp"
#include "kgforge/text_util.hpp"

namespace kgforge::enrich {

std::string merge_entity_text(std::string_view original, std::string_view generated,
                              std::size_t budget_tokens) {
  if (budget_tokens < 1) throw InvalidArgument("budget_tokens must be >= 1");

  const auto original_tokens = text::whitespace_tokens(original);
  if (original_tokens.size() >= budget_tokens) {
    // Keep the original verbatim up to the end of its last admissible token.
    const std::string_view last = original_tokens[budget_tokens - 1];
    if (original_tokens.size() == budget_tokens) return std::string(original);
    return std::string(original.substr(0, static_cast<std::size_t>(last.data() - original.data()) + last.size()));
  }

  std::size_t remaining = budget_tokens - original_tokens.size();
  std::string tail;
  for (auto tok : text::whitespace_tokens(generated)) {
    if (remaining == 0) break;
    if (!tail.empty()) tail += ' ';
    tail += tok;
    --remaining;
  }
  if (tail.empty()) return std::string(original);
  if (original.empty()) return tail;
  std::string merged(original);
  merged += ' ';
  merged += tail;
  return merged;
}

EntityBundle expand_descriptions(const kg::KnowledgeGraph& kg, llm::Gateway& gateway,
                                 std::size_t budget_tokens, const llm::GenerationParams& params,
                                 const prompt::TemplateSet& templates) {
  if (budget_tokens < 1) throw InvalidArgument("budget_tokens must be >= 1");
  const auto key = prompt::strategy_key(prompt::Strategy::kEntityExpand);

  std::vector<prompt::RenderedPrompt> prompts;
  prompts.reserve(kg.entity_count());
  for (kg::EntityIndex e = 0; e < kg.entity_count(); ++e) {
    if (kg.entity_name(e).empty()) {
      throw InvalidArgument("entity '" + kg.entity_id(e) + "' has no name");
    }
    prompts.push_back(templates.render(key, kg.entity_name(e), kg.entity_id(e)));
  }

  EntityBundle bundle;
  bundle.fingerprint = kg::dataset_fingerprint(kg);
  bundle.budget_tokens = budget_tokens;
  auto results = gateway.batch_query(prompts, params);
  for (kg::EntityIndex e = 0; e < kg.entity_count(); ++e) {
    auto& r = results[e];
    if (!r.ok()) {
      bundle.errors.push_back({kg.entity_id(e), "", r.key, r.error});
      continue;
    }
    EntityAugmentation aug;
    aug.entity = kg.entity_id(e);
    aug.prompt_hash = r.key;
    aug.generated = r.exchange->response;
    aug.budget_tokens = budget_tokens;
    aug.empty_generation = text::token_count(aug.generated) == 0;
    aug.merged = aug.empty_generation
                     ? std::string(kg.entity_description(e))
                     : merge_entity_text(kg.entity_description(e), aug.generated, budget_tokens);
    bundle.items.push_back(std::move(aug));
  }
  return bundle;
}

}  // namespace kgforge::enrich
