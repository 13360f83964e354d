#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>

#include "kgforge/enrich_entity.hpp"
#include "kgforge/enrich_relation.hpp"
#include "kgforge/enrich_structure.hpp"
#include "kgforge/graph.hpp"

namespace kgforge::bundle {

// On-disk augmentation bundles. Every bundle directory has a manifest.json
// naming its kind and the fingerprint of the dataset it was built from.
//
//   entity:    entity2textlong.txt, audit.json
//   relation:  relation2text.txt, audit.json
//   structure: synthesized.txt, train.txt (merged), keywords.json, audit.json
enum class Kind { kEntity, kRelation, kStructure };

std::string_view kind_name(Kind kind);

struct Manifest {
  Kind kind = Kind::kEntity;
  std::string fingerprint;
  std::size_t n_items = 0;
  std::size_t n_errors = 0;
  std::map<std::string, std::string> settings;
};

inline constexpr std::string_view kManifestFile = "manifest.json";
inline constexpr std::string_view kAuditFile = "audit.json";
inline constexpr std::string_view kKeywordsFile = "keywords.json";
inline constexpr std::string_view kSynthesizedFile = "synthesized.txt";

void write_entity_bundle(const enrich::EntityBundle& bundle, const std::filesystem::path& dir);
void write_relation_bundle(const enrich::RelationBundle& bundle, const std::filesystem::path& dir);
void write_structure_bundle(const enrich::StructureBundle& bundle, const kg::KnowledgeGraph& base,
                            const std::filesystem::path& dir);

Manifest read_manifest(const std::filesystem::path& dir);

// Applies bundles to `base`: entity descriptions, then relation names, then
// appended train triples, whatever order the directories are given in. At
// most one bundle per kind. Throws FingerprintMismatch when a bundle was
// built from a different dataset.
kg::KnowledgeGraph compose(const kg::KnowledgeGraph& base,
                           std::span<const std::filesystem::path> bundle_dirs);

}  // namespace kgforge::bundle
