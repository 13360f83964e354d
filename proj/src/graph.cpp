#include "kgforge/graph.hpp"

#include <set>
#include <stdexcept>

#include "kgforge/errors.hpp"

namespace kgforge::kg {

std::string_view split_name(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kValid: return "valid";
    case Split::kTest: return "test";
  }
  return "unknown";
}

std::vector<Triple> SplitData::positives() const {
  if (labels.empty()) return triples;
  std::vector<Triple> out;
  out.reserve(triples.size());
  for (std::size_t i = 0; i < triples.size(); ++i) {
    if (labels[i] > 0) out.push_back(triples[i]);
  }
  return out;
}

EntityIndex KnowledgeGraph::add_entity(const EntityId& id) {
  if (id.empty()) throw InvalidArgument("entity id must be non-empty");
  auto [it, inserted] = entity_index_.emplace(id, static_cast<EntityIndex>(entity_ids_.size()));
  if (!inserted) throw InvalidArgument("duplicate entity id: " + id);
  entity_ids_.push_back(id);
  entity_names_.emplace_back();
  entity_descs_.emplace_back();
  return it->second;
}

RelationIndex KnowledgeGraph::add_relation(const RelationId& id) {
  if (id.empty()) throw InvalidArgument("relation id must be non-empty");
  auto [it, inserted] =
      relation_index_.emplace(id, static_cast<RelationIndex>(relation_ids_.size()));
  if (!inserted) throw InvalidArgument("duplicate relation id: " + id);
  relation_ids_.push_back(id);
  relation_names_.emplace_back();
  return it->second;
}

void KnowledgeGraph::add_triple(Split split, Triple triple, std::int8_t label) {
  if (triple.head >= entity_count() || triple.tail >= entity_count() ||
      triple.relation >= relation_count()) {
    throw DanglingReferenceError("triple references an index outside the graph");
  }
  SplitData& data = mutable_split(split);
  // Earlier unlabeled triples count as positives once a label shows up.
  const bool labeled = data.labeled() || label != 0;
  if (labeled && !data.labeled()) data.labels.assign(data.triples.size(), 1);
  data.triples.push_back(triple);
  if (labeled) data.labels.push_back(label == 0 ? std::int8_t{1} : label);
}

std::optional<EntityIndex> KnowledgeGraph::find_entity(std::string_view id) const {
  auto it = entity_index_.find(std::string(id));
  if (it == entity_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<RelationIndex> KnowledgeGraph::find_relation(std::string_view id) const {
  auto it = relation_index_.find(std::string(id));
  if (it == relation_index_.end()) return std::nullopt;
  return it->second;
}

const SplitData& KnowledgeGraph::split(Split s) const {
  switch (s) {
    case Split::kTrain: return train_;
    case Split::kValid: return valid_;
    case Split::kTest: return test_;
  }
  throw std::logic_error("bad split");
}

SplitData& KnowledgeGraph::mutable_split(Split s) {
  return const_cast<SplitData&>(static_cast<const KnowledgeGraph&>(*this).split(s));
}

void KnowledgeGraph::set_entity_description(EntityIndex e, std::string text) {
  entity_descs_.at(e) = std::move(text);
  has_descriptions_ = true;
}

NamedTriple KnowledgeGraph::named(const Triple& t) const {
  return {entity_id(t.head), relation_id(t.relation), entity_id(t.tail)};
}

bool operator==(const KnowledgeGraph& a, const KnowledgeGraph& b) {
  return a.entity_ids_ == b.entity_ids_ && a.relation_ids_ == b.relation_ids_ &&
         a.entity_names_ == b.entity_names_ && a.entity_descs_ == b.entity_descs_ &&
         a.relation_names_ == b.relation_names_ &&
         a.has_descriptions_ == b.has_descriptions_ && a.train_ == b.train_ &&
         a.valid_ == b.valid_ && a.test_ == b.test_;
}

DatasetStats dataset_stats(const KnowledgeGraph& kg) {
  return {kg.entity_count(), kg.relation_count(), kg.train().size(), kg.valid().size(),
          kg.test().size()};
}

}  // namespace kgforge::kg
