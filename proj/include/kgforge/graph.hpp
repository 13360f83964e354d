#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace kgforge::kg {

using EntityId = std::string;
using RelationId = std::string;
using EntityIndex = std::uint32_t;
using RelationIndex = std::uint32_t;

struct Triple {
  EntityIndex head = 0;
  RelationIndex relation = 0;
  EntityIndex tail = 0;

  friend auto operator<=>(const Triple&, const Triple&) = default;
};

// A triple addressed by ids rather than graph indices. Used for triples that
// are produced outside a graph (synthesized edges) before they are resolved.
struct NamedTriple {
  EntityId head;
  RelationId relation;
  EntityId tail;

  friend auto operator<=>(const NamedTriple&, const NamedTriple&) = default;
};

enum class Split { kTrain, kValid, kTest };
std::string_view split_name(Split split);

// One split in load order. `labels` is empty for positive-only splits;
// classification datasets carry +1/-1 per triple.
struct SplitData {
  std::vector<Triple> triples;
  std::vector<std::int8_t> labels;

  std::size_t size() const { return triples.size(); }
  bool labeled() const { return !labels.empty(); }
  bool is_positive(std::size_t i) const { return labels.empty() || labels[i] > 0; }
  std::vector<Triple> positives() const;

  friend bool operator==(const SplitData&, const SplitData&) = default;
};

struct DatasetStats {
  std::size_t n_entities = 0;
  std::size_t n_relations = 0;
  std::size_t n_train = 0;
  std::size_t n_valid = 0;
  std::size_t n_test = 0;

  friend bool operator==(const DatasetStats&, const DatasetStats&) = default;
};

// Entities, relations, three triple splits and their attached texts.
// Built through the add_* methods by loaders and augmenters, then shared
// read-only.
class KnowledgeGraph {
 public:
  EntityIndex add_entity(const EntityId& id);
  RelationIndex add_relation(const RelationId& id);
  void add_triple(Split split, Triple triple, std::int8_t label = 0);

  std::size_t entity_count() const { return entity_ids_.size(); }
  std::size_t relation_count() const { return relation_ids_.size(); }

  const EntityId& entity_id(EntityIndex e) const { return entity_ids_.at(e); }
  const RelationId& relation_id(RelationIndex r) const { return relation_ids_.at(r); }
  std::span<const EntityId> entity_ids() const { return entity_ids_; }
  std::span<const RelationId> relation_ids() const { return relation_ids_; }
  std::optional<EntityIndex> find_entity(std::string_view id) const;
  std::optional<RelationIndex> find_relation(std::string_view id) const;

  const SplitData& split(Split s) const;
  SplitData& mutable_split(Split s);
  const SplitData& train() const { return train_; }
  const SplitData& valid() const { return valid_; }
  const SplitData& test() const { return test_; }

  // Texts. Names default to empty until set; loaders fill every name.
  const std::string& entity_name(EntityIndex e) const { return entity_names_.at(e); }
  const std::string& entity_description(EntityIndex e) const { return entity_descs_.at(e); }
  const std::string& relation_name(RelationIndex r) const { return relation_names_.at(r); }
  void set_entity_name(EntityIndex e, std::string text) { entity_names_.at(e) = std::move(text); }
  void set_entity_description(EntityIndex e, std::string text);
  void set_relation_name(RelationIndex r, std::string text) { relation_names_.at(r) = std::move(text); }

  // True when the dataset carries a description file. Name-only datasets
  // leave every description empty and write no description file.
  bool has_descriptions() const { return has_descriptions_; }
  void set_has_descriptions(bool v) { has_descriptions_ = v; }

  NamedTriple named(const Triple& t) const;

  friend bool operator==(const KnowledgeGraph& a, const KnowledgeGraph& b);

 private:
  std::vector<EntityId> entity_ids_;
  std::vector<RelationId> relation_ids_;
  std::unordered_map<std::string, EntityIndex> entity_index_;
  std::unordered_map<std::string, RelationIndex> relation_index_;
  std::vector<std::string> entity_names_;
  std::vector<std::string> entity_descs_;
  std::vector<std::string> relation_names_;
  bool has_descriptions_ = false;
  SplitData train_;
  SplitData valid_;
  SplitData test_;
};

DatasetStats dataset_stats(const KnowledgeGraph& kg);

// ---------------------------------------------------------------------------
// Dataset directory layout.
//
//   entities.txt         optional; one entity id per line, defines the set
//   relations.txt        optional; one relation id per line
//   entity2text.txt      id<TAB>name
//   entity2textlong.txt  optional; id<TAB>description
//   relation2text.txt    id<TAB>name
//   train.txt / valid.txt / test.txt
//                        head<TAB>relation<TAB>tail[<TAB>label]
//
// `.tsv` triple files and `dev.tsv` are accepted as aliases when reading.
// ---------------------------------------------------------------------------
namespace layout {
inline constexpr std::string_view kEntities = "entities.txt";
inline constexpr std::string_view kRelations = "relations.txt";
inline constexpr std::string_view kEntityText = "entity2text.txt";
inline constexpr std::string_view kEntityDescription = "entity2textlong.txt";
inline constexpr std::string_view kRelationText = "relation2text.txt";
inline constexpr std::string_view kTrain = "train.txt";
inline constexpr std::string_view kValid = "valid.txt";
inline constexpr std::string_view kTest = "test.txt";
}  // namespace layout

enum class LoadMode { kStrict, kLenient };

struct LoadResult {
  KnowledgeGraph graph;
  std::vector<std::string> warnings;
};

LoadResult load_dataset(const std::filesystem::path& root, LoadMode mode = LoadMode::kStrict);

// Canonical file contents of a graph, in a fixed file order. write_dataset
// emits exactly these bytes and the dataset fingerprint hashes them.
std::vector<std::pair<std::string, std::string>> serialize_dataset(const KnowledgeGraph& kg);

void write_dataset(const KnowledgeGraph& kg, const std::filesystem::path& root);

// Content hash of the canonical serialization.
std::string dataset_fingerprint(const KnowledgeGraph& kg);

// Serializes one split in the triple-file format.
std::string serialize_split(const KnowledgeGraph& kg, const SplitData& split);
std::string serialize_triples(std::span<const NamedTriple> triples);
std::vector<NamedTriple> parse_triple_file(const std::filesystem::path& path);

// id<TAB>text files. Duplicate ids are a FormatError.
std::vector<std::pair<std::string, std::string>> read_id_text_file(const std::filesystem::path& path);
std::string serialize_id_text(std::span<const std::pair<std::string, std::string>> rows);

}  // namespace kgforge::kg
