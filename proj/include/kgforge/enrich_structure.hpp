#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kgforge/enrich_types.hpp"
#include "kgforge/graph.hpp"
#include "kgforge/llm.hpp"
#include "kgforge/prompt.hpp"

namespace kgforge::enrich {

// Lowercase keywords in first-seen order, no duplicates.
struct KeywordSet {
  kg::EntityId entity;
  std::vector<std::string> keywords;

  friend bool operator==(const KeywordSet&, const KeywordSet&) = default;
};

struct MatchScore {
  kg::EntityId head;
  kg::EntityId tail;
  double score = 0.0;  // n_matched / min(|k_head|, |k_tail|)
  std::size_t n_matched = 0;

  friend bool operator==(const MatchScore&, const MatchScore&) = default;
};

struct StructureConfig {
  std::size_t k = 1;  // partners kept per head entity
  bool self_loop = true;
  kg::RelationId same_as_relation = "SameAs";
  std::string same_as_text = "Same As";
};

// Parses an LLM keyword answer. Splits on commas, semicolons and newlines,
// drops enumeration markers ("1.", "2)", "-", "*") and surrounding
// punctuation, lowercases, removes duplicates. A leading "Keywords:" label is
// ignored. Throws InvalidArgument when nothing usable remains.
KeywordSet parse_keywords(std::string_view raw, kg::EntityId entity = {});

// Normalizes an arbitrary word list into a KeywordSet (lowercase, deduped).
KeywordSet make_keyword_set(kg::EntityId entity, std::span<const std::string> words);

// Throws InvalidArgument on an empty set or when both sets name the same
// entity.
MatchScore match_score(const KeywordSet& head, const KeywordSet& tail);

struct TopKResult {
  std::vector<MatchScore> pairs;
  std::size_t skipped_entities = 0;  // inputs with no keywords
};

// For every head (input order) keeps its k best partners by score
// descending, then partner id ascending. Zero-score partners are never kept.
TopKResult top_k_pairs(std::span<const KeywordSet> keyword_sets, const StructureConfig& cfg);

// (head, SameAs, tail) per pair in pair order, then (e, SameAs, e) for every
// entity with keywords in graph order when self_loop is set. Exact duplicates
// are dropped. Throws InvalidArgument if the graph already has the SameAs
// relation.
std::vector<kg::NamedTriple> synthesize_triples(std::span<const MatchScore> pairs,
                                                const kg::KnowledgeGraph& kg,
                                                std::span<const KeywordSet> keyword_sets,
                                                const StructureConfig& cfg);

// Train split gets the triples appended; valid/test are untouched. Unknown
// entities raise DanglingReferenceError. Unknown relations are added, named
// from `new_relation_names` or after their id.
kg::KnowledgeGraph augment_training_set(
    const kg::KnowledgeGraph& kg, std::span<const kg::NamedTriple> triples,
    const std::unordered_map<std::string, std::string>& new_relation_names = {});

struct KeywordRecord {
  kg::EntityId entity;
  std::string source;  // "description" or "name"
  std::string prompt_hash;
  std::string response;
  std::vector<std::string> keywords;
};

struct KeywordExtraction {
  std::vector<KeywordSet> sets;        // entities with keywords, graph order
  std::vector<KeywordRecord> records;  // every successful query
  std::vector<ItemError> errors;
};

// Queries keywords for each entity from its description, or from its name
// when the description is empty.
KeywordExtraction extract_keywords(const kg::KnowledgeGraph& kg, llm::Gateway& gateway,
                                   const llm::GenerationParams& params = {},
                                   const prompt::TemplateSet& templates = prompt::TemplateSet::defaults());

struct StructureBundle {
  std::string fingerprint;
  StructureConfig config;
  KeywordExtraction keywords;
  std::vector<MatchScore> pairs;
  std::size_t skipped_entities = 0;
  std::vector<kg::NamedTriple> triples;
};

StructureBundle extract_structure(const kg::KnowledgeGraph& kg, llm::Gateway& gateway,
                                  const StructureConfig& cfg,
                                  const llm::GenerationParams& params = {},
                                  const prompt::TemplateSet& templates = prompt::TemplateSet::defaults());

}  // namespace kgforge::enrich
