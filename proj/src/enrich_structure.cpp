#include "kgforge/enrich_structure.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <unordered_set>

#include "kgforge/errors.hpp"
#include "kgforge/text_util.hpp"

namespace kgforge::enrich {
namespace {

bool is_ascii_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) != prefix[i]) return false;
  }
  return true;
}

// Removes one leading list marker: "12." / "3)" followed by a space or the
// end, or a bullet character.
bool strip_marker(std::string_view& s) {
  std::size_t digits = 0;
  while (digits < s.size() && std::isdigit(static_cast<unsigned char>(s[digits]))) ++digits;
  if (digits > 0 && digits < s.size() && (s[digits] == '.' || s[digits] == ')') &&
      (digits + 1 == s.size() || text::is_space(s[digits + 1]))) {
    s.remove_prefix(digits + 1);
    return true;
  }
  if (!s.empty() && (s.front() == '-' || s.front() == '*')) {
    s.remove_prefix(1);
    return true;
  }
  static constexpr std::string_view kBullet = "\xE2\x80\xA2";
  if (s.substr(0, kBullet.size()) == kBullet) {
    s.remove_prefix(kBullet.size());
    return true;
  }
  return false;
}

std::string normalize_keyword(std::string_view piece) {
  std::string_view s = text::trim(piece);
  if (starts_with_ci(s, "keywords:")) s = text::trim(s.substr(9));
  while (strip_marker(s)) s = text::trim(s);
  while (!s.empty() && (is_ascii_punct(s.front()) || text::is_space(s.front()))) s.remove_prefix(1);
  while (!s.empty() && (is_ascii_punct(s.back()) || text::is_space(s.back()))) s.remove_suffix(1);
  return text::to_lower_ascii(text::collapse_whitespace(s));
}

bool ranks_before(const MatchScore& a, const MatchScore& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.tail < b.tail;
}

}  // namespace

KeywordSet parse_keywords(std::string_view raw, kg::EntityId entity) {
  KeywordSet out{std::move(entity), {}};
  std::unordered_set<std::string> seen;
  std::size_t pos = 0;
  while (pos <= raw.size()) {
    std::size_t end = raw.find_first_of(",;\n", pos);
    if (end == std::string_view::npos) end = raw.size();
    std::string kw = normalize_keyword(raw.substr(pos, end - pos));
    if (!kw.empty() && seen.insert(kw).second) out.keywords.push_back(std::move(kw));
    pos = end + 1;
  }
  if (out.keywords.empty()) throw InvalidArgument("no keywords recoverable from response");
  return out;
}

KeywordSet make_keyword_set(kg::EntityId entity, std::span<const std::string> words) {
  KeywordSet out{std::move(entity), {}};
  std::unordered_set<std::string> seen;
  for (const auto& w : words) {
    std::string kw = text::to_lower_ascii(text::collapse_whitespace(w));
    if (!kw.empty() && seen.insert(kw).second) out.keywords.push_back(std::move(kw));
  }
  return out;
}

MatchScore match_score(const KeywordSet& head, const KeywordSet& tail) {
  if (head.keywords.empty() || tail.keywords.empty()) {
    throw InvalidArgument("match_score needs two non-empty keyword sets");
  }
  if (!head.entity.empty() && head.entity == tail.entity) {
    throw InvalidArgument("match_score of an entity with itself: " + head.entity);
  }
  std::size_t matched = 0;
  for (const auto& kw : head.keywords) {
    if (std::find(tail.keywords.begin(), tail.keywords.end(), kw) != tail.keywords.end()) ++matched;
  }
  const std::size_t denom = std::min(head.keywords.size(), tail.keywords.size());
  return {head.entity, tail.entity, static_cast<double>(matched) / static_cast<double>(denom),
          matched};
}

TopKResult top_k_pairs(std::span<const KeywordSet> keyword_sets, const StructureConfig& cfg) {
  TopKResult result;
  if (cfg.k == 0) return result;

  // Inverted index keyword -> entity positions. Only entities sharing at
  // least one keyword can score above zero, and zero scores are never kept.
  std::unordered_map<std::string, std::vector<std::size_t>> postings;
  std::unordered_set<std::string> ids;
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < keyword_sets.size(); ++i) {
    const auto& ks = keyword_sets[i];
    if (!ids.insert(ks.entity).second) {
      throw InvalidArgument("duplicate entity in keyword sets: " + ks.entity);
    }
    if (ks.keywords.empty()) {
      ++result.skipped_entities;
      continue;
    }
    active.push_back(i);
    for (const auto& kw : ks.keywords) postings[kw].push_back(i);
  }

  std::vector<std::size_t> overlap(keyword_sets.size(), 0);
  std::vector<std::size_t> touched;
  std::vector<MatchScore> candidates;
  for (std::size_t h : active) {
    const auto& head = keyword_sets[h];
    touched.clear();
    for (const auto& kw : head.keywords) {
      for (std::size_t t : postings[kw]) {
        if (t == h) continue;
        if (overlap[t]++ == 0) touched.push_back(t);
      }
    }
    candidates.clear();
    for (std::size_t t : touched) {
      const auto& tail = keyword_sets[t];
      const std::size_t denom = std::min(head.keywords.size(), tail.keywords.size());
      candidates.push_back({head.entity, tail.entity,
                            static_cast<double>(overlap[t]) / static_cast<double>(denom),
                            overlap[t]});
      overlap[t] = 0;
    }
    const std::size_t keep = std::min(cfg.k, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                      candidates.end(), ranks_before);
    result.pairs.insert(result.pairs.end(), candidates.begin(),
                        candidates.begin() + static_cast<std::ptrdiff_t>(keep));
  }
  return result;
}

std::vector<kg::NamedTriple> synthesize_triples(std::span<const MatchScore> pairs,
                                                const kg::KnowledgeGraph& kg,
                                                std::span<const KeywordSet> keyword_sets,
                                                const StructureConfig& cfg) {
  if (cfg.same_as_relation.empty()) throw InvalidArgument("same_as_relation must be non-empty");
  if (kg.find_relation(cfg.same_as_relation)) {
    throw InvalidArgument("relation '" + cfg.same_as_relation +
                          "' already exists in the graph; choose another same_as_relation");
  }
  std::vector<kg::NamedTriple> out;
  std::set<kg::NamedTriple> seen;
  auto emit = [&](const kg::EntityId& h, const kg::EntityId& t) {
    kg::NamedTriple triple{h, cfg.same_as_relation, t};
    if (seen.insert(triple).second) out.push_back(std::move(triple));
  };
  for (const auto& p : pairs) emit(p.head, p.tail);
  if (cfg.self_loop) {
    std::unordered_set<std::string> with_keywords;
    for (const auto& ks : keyword_sets) {
      if (!ks.keywords.empty()) with_keywords.insert(ks.entity);
    }
    for (const auto& id : kg.entity_ids()) {
      if (with_keywords.count(id)) emit(id, id);
    }
  }
  return out;
}

kg::KnowledgeGraph augment_training_set(
    const kg::KnowledgeGraph& kg, std::span<const kg::NamedTriple> triples,
    const std::unordered_map<std::string, std::string>& new_relation_names) {
  kg::KnowledgeGraph out = kg;
  for (const auto& t : triples) {
    auto h = out.find_entity(t.head);
    auto tl = out.find_entity(t.tail);
    if (!h || !tl) {
      throw DanglingReferenceError("appended triple references unknown entity '" +
                                   (!h ? t.head : t.tail) + "'");
    }
    auto r = out.find_relation(t.relation);
    if (!r) {
      r = out.add_relation(t.relation);
      auto named = new_relation_names.find(t.relation);
      out.set_relation_name(*r, named != new_relation_names.end() ? named->second : t.relation);
    }
    out.add_triple(kg::Split::kTrain, kg::Triple{*h, *r, *tl}, out.train().labeled() ? 1 : 0);
  }
  return out;
}

KeywordExtraction extract_keywords(const kg::KnowledgeGraph& kg, llm::Gateway& gateway,
                                   const llm::GenerationParams& params,
                                   const prompt::TemplateSet& templates) {
  const auto key = prompt::strategy_key(prompt::Strategy::kStructureKeywords);
  KeywordExtraction out;

  std::vector<prompt::RenderedPrompt> prompts;
  std::vector<kg::EntityIndex> subjects;
  std::vector<std::string> sources;
  for (kg::EntityIndex e = 0; e < kg.entity_count(); ++e) {
    const bool use_desc = !text::trim(kg.entity_description(e)).empty();
    const std::string& source_text = use_desc ? kg.entity_description(e) : kg.entity_name(e);
    if (text::trim(source_text).empty()) {
      out.errors.push_back({kg.entity_id(e), "", "", "entity has neither description nor name"});
      continue;
    }
    prompts.push_back(templates.render(key, source_text, kg.entity_id(e)));
    subjects.push_back(e);
    sources.emplace_back(use_desc ? "description" : "name");
  }

  auto results = gateway.batch_query(prompts, params);
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& id = kg.entity_id(subjects[i]);
    auto& r = results[i];
    if (!r.ok()) {
      out.errors.push_back({id, "", r.key, r.error});
      continue;
    }
    KeywordRecord rec{id, sources[i], r.key, r.exchange->response, {}};
    try {
      KeywordSet ks = parse_keywords(r.exchange->response, id);
      rec.keywords = ks.keywords;
      out.sets.push_back(std::move(ks));
    } catch (const InvalidArgument& e) {
      out.errors.push_back({id, "", r.key, e.what()});
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

StructureBundle extract_structure(const kg::KnowledgeGraph& kg, llm::Gateway& gateway,
                                  const StructureConfig& cfg, const llm::GenerationParams& params,
                                  const prompt::TemplateSet& templates) {
  StructureBundle bundle;
  bundle.fingerprint = kg::dataset_fingerprint(kg);
  bundle.config = cfg;
  bundle.keywords = extract_keywords(kg, gateway, params, templates);
  auto top = top_k_pairs(bundle.keywords.sets, cfg);
  bundle.pairs = std::move(top.pairs);
  bundle.skipped_entities = kg.entity_count() - bundle.keywords.sets.size();
  bundle.triples = synthesize_triples(bundle.pairs, kg, bundle.keywords.sets, cfg);
  return bundle;
}

}  // namespace kgforge::enrich
