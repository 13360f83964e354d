#include "kgforge/enrich_relation.hpp"

#include <algorithm>
#include <set>

#include "kgforge/errors.hpp"
#include "kgforge/text_util.hpp"

namespace kgforge::enrich {

std::string sanitize_relation_text(std::string_view text) {
  std::string s = text::collapse_whitespace(text);
  static constexpr std::string_view kRaw = "[SEP]";
  static constexpr std::string_view kEscaped = "[SEP ]";
  std::string out;
  out.reserve(s.size());
  std::size_t pos = 0;
  for (std::size_t hit = s.find(kRaw); hit != std::string::npos; hit = s.find(kRaw, pos)) {
    out.append(s, pos, hit - pos);
    out += kEscaped;
    pos = hit + kRaw.size();
  }
  out.append(s, pos);
  return out;
}

std::string compose_relation_text(
    std::string_view name, std::span<const std::pair<prompt::RelationMode, std::string>> texts) {
  std::string out(name);
  bool first = true;
  for (prompt::RelationMode mode : prompt::kAllRelationModes) {
    auto it = std::find_if(texts.begin(), texts.end(),
                           [&](const auto& entry) { return entry.first == mode; });
    if (it == texts.end()) continue;
    std::string part = sanitize_relation_text(it->second);
    if (part.empty()) continue;
    out += first ? std::string_view(" ") : kSeparator;
    out += part;
    first = false;
  }
  return out;
}

RelationBundle describe_relations(const kg::KnowledgeGraph& kg, llm::Gateway& gateway,
                                  std::span<const prompt::RelationMode> modes,
                                  const llm::GenerationParams& params,
                                  const prompt::TemplateSet& templates) {
  if (modes.empty()) throw InvalidArgument("at least one relation mode is required");
  std::set<prompt::RelationMode> wanted(modes.begin(), modes.end());
  std::vector<prompt::RelationMode> ordered(wanted.begin(), wanted.end());

  std::vector<prompt::RenderedPrompt> prompts;
  for (kg::RelationIndex r = 0; r < kg.relation_count(); ++r) {
    if (kg.relation_name(r).empty()) {
      throw InvalidArgument("relation '" + kg.relation_id(r) + "' has no name");
    }
    for (auto mode : ordered) {
      prompts.push_back(templates.render(prompt::strategy_key(prompt::strategy_for(mode)),
                                         kg.relation_name(r), kg.relation_id(r)));
    }
  }

  RelationBundle bundle;
  bundle.fingerprint = kg::dataset_fingerprint(kg);
  bundle.modes = ordered;
  auto results = gateway.batch_query(prompts, params);
  std::size_t i = 0;
  for (kg::RelationIndex r = 0; r < kg.relation_count(); ++r) {
    RelationAugmentation aug;
    aug.relation = kg.relation_id(r);
    std::vector<std::pair<prompt::RelationMode, std::string>> texts;
    for (auto mode : ordered) {
      auto& res = results[i++];
      if (!res.ok()) {
        bundle.errors.push_back({aug.relation, std::string(prompt::relation_mode_name(mode)),
                                 res.key, res.error});
        continue;
      }
      aug.texts[mode] = res.exchange->response;
      aug.prompt_hashes[mode] = res.key;
      texts.emplace_back(mode, res.exchange->response);
    }
    if (aug.texts.empty()) continue;
    aug.composed = compose_relation_text(kg.relation_name(r), texts);
    bundle.items.push_back(std::move(aug));
  }
  return bundle;
}

}  // namespace kgforge::enrich
