#include "kgforge/bundle.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "kgforge/errors.hpp"

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace kgforge::bundle {
namespace {

void write_text(const fs::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

ojson errors_json(std::span<const enrich::ItemError> errors) {
  ojson arr = ojson::array();
  for (const auto& e : errors) {
    arr.push_back({{"subject", e.subject},
                   {"mode", e.mode},
                   {"prompt_hash", e.prompt_hash},
                   {"message", e.message}});
  }
  return arr;
}

void write_manifest(const fs::path& dir, Kind kind, const std::string& fingerprint,
                    std::size_t n_items, std::size_t n_errors, const ojson& settings) {
  ojson m;
  m["format"] = "kgforge-bundle";
  m["version"] = 1;
  m["kind"] = kind_name(kind);
  m["fingerprint"] = fingerprint;
  m["items"] = n_items;
  m["errors"] = n_errors;
  m["settings"] = settings;
  write_text(dir / kManifestFile, m.dump(2) + "\n");
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("missing file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

std::string_view kind_name(Kind kind) {
  switch (kind) {
    case Kind::kEntity: return "entity";
    case Kind::kRelation: return "relation";
    case Kind::kStructure: return "structure";
  }
  return "";
}

void write_entity_bundle(const enrich::EntityBundle& bundle, const fs::path& dir) {
  make_dir(dir);
  std::vector<std::pair<std::string, std::string>> rows;
  ojson items = ojson::array();
  for (const auto& a : bundle.items) {
    rows.emplace_back(a.entity, a.merged);
    ojson flags = ojson::array();
    if (a.empty_generation) flags.push_back("empty generation");
    items.push_back({{"entity", a.entity},
                     {"prompt_hash", a.prompt_hash},
                     {"response", a.generated},
                     {"merged", a.merged},
                     {"flags", flags}});
  }
  write_text(dir / kg::layout::kEntityDescription, kg::serialize_id_text(rows));
  ojson audit;
  audit["kind"] = "entity";
  audit["fingerprint"] = bundle.fingerprint;
  audit["budget_tokens"] = bundle.budget_tokens;
  audit["items"] = std::move(items);
  audit["errors"] = errors_json(bundle.errors);
  write_text(dir / kAuditFile, audit.dump(2) + "\n");
  write_manifest(dir, Kind::kEntity, bundle.fingerprint, bundle.items.size(), bundle.errors.size(),
                 {{"budget_tokens", std::to_string(bundle.budget_tokens)}});
}

void write_relation_bundle(const enrich::RelationBundle& bundle, const fs::path& dir) {
  make_dir(dir);
  std::vector<std::pair<std::string, std::string>> rows;
  ojson items = ojson::array();
  for (const auto& a : bundle.items) {
    rows.emplace_back(a.relation, a.composed);
    ojson texts = ojson::object();
    ojson hashes = ojson::object();
    for (const auto& [mode, t] : a.texts) texts[std::string(prompt::relation_mode_name(mode))] = t;
    for (const auto& [mode, h] : a.prompt_hashes) {
      hashes[std::string(prompt::relation_mode_name(mode))] = h;
    }
    items.push_back({{"relation", a.relation},
                     {"prompt_hashes", hashes},
                     {"responses", texts},
                     {"composed", a.composed}});
  }
  write_text(dir / kg::layout::kRelationText, kg::serialize_id_text(rows));
  std::string modes;
  for (auto m : bundle.modes) {
    if (!modes.empty()) modes += ',';
    modes += prompt::relation_mode_name(m);
  }
  ojson audit;
  audit["kind"] = "relation";
  audit["fingerprint"] = bundle.fingerprint;
  audit["modes"] = modes;
  audit["items"] = std::move(items);
  audit["errors"] = errors_json(bundle.errors);
  write_text(dir / kAuditFile, audit.dump(2) + "\n");
  write_manifest(dir, Kind::kRelation, bundle.fingerprint, bundle.items.size(),
                 bundle.errors.size(), {{"modes", modes}});
}

void write_structure_bundle(const enrich::StructureBundle& bundle, const kg::KnowledgeGraph& base,
                            const fs::path& dir) {
  make_dir(dir);
  write_text(dir / kSynthesizedFile, kg::serialize_triples(bundle.triples));
  kg::KnowledgeGraph merged = enrich::augment_training_set(
      base, bundle.triples, {{bundle.config.same_as_relation, bundle.config.same_as_text}});
  write_text(dir / kg::layout::kTrain, kg::serialize_split(merged, merged.train()));

  ojson kw = ojson::array();
  for (const auto& rec : bundle.keywords.records) {
    kw.push_back({{"entity", rec.entity},
                  {"source", rec.source},
                  {"prompt_hash", rec.prompt_hash},
                  {"response", rec.response},
                  {"keywords", rec.keywords}});
  }
  ojson kw_doc;
  kw_doc["kind"] = "structure-keywords";
  kw_doc["fingerprint"] = bundle.fingerprint;
  kw_doc["entities"] = std::move(kw);
  kw_doc["errors"] = errors_json(bundle.keywords.errors);
  write_text(dir / kKeywordsFile, kw_doc.dump(2) + "\n");

  ojson pairs = ojson::array();
  for (const auto& p : bundle.pairs) {
    pairs.push_back(
        {{"head", p.head}, {"tail", p.tail}, {"score", p.score}, {"n_matched", p.n_matched}});
  }
  const std::size_t self_loops = bundle.config.self_loop ? bundle.keywords.sets.size() : 0;
  ojson audit;
  audit["kind"] = "structure";
  audit["fingerprint"] = bundle.fingerprint;
  audit["k"] = bundle.config.k;
  audit["self_loop"] = bundle.config.self_loop;
  audit["entities_with_keywords"] = bundle.keywords.sets.size();
  audit["entities_skipped"] = bundle.skipped_entities;
  audit["pairs"] = std::move(pairs);
  audit["self_loops"] = self_loops;
  audit["synthesized_triples"] = bundle.triples.size();
  write_text(dir / kAuditFile, audit.dump(2) + "\n");

  write_manifest(dir, Kind::kStructure, bundle.fingerprint, bundle.triples.size(),
                 bundle.keywords.errors.size(),
                 {{"k", std::to_string(bundle.config.k)},
                  {"self_loop", bundle.config.self_loop ? "true" : "false"},
                  {"same_as_relation", bundle.config.same_as_relation},
                  {"same_as_text", bundle.config.same_as_text}});
}

Manifest read_manifest(const fs::path& dir) {
  const fs::path path = dir / kManifestFile;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("bad bundle manifest " + path.string() + ": " + e.what());
  }
  try {
    Manifest m;
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "entity") {
      m.kind = Kind::kEntity;
    } else if (kind == "relation") {
      m.kind = Kind::kRelation;
    } else if (kind == "structure") {
      m.kind = Kind::kStructure;
    } else {
      throw FormatError("unknown bundle kind '" + kind + "' in " + path.string());
    }
    m.fingerprint = j.at("fingerprint").get<std::string>();
    m.n_items = j.value("items", std::size_t{0});
    m.n_errors = j.value("errors", std::size_t{0});
    if (j.contains("settings")) {
      for (const auto& [k, v] : j["settings"].items()) m.settings[k] = v.get<std::string>();
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("bad bundle manifest " + path.string() + ": " + e.what());
  }
}

kg::KnowledgeGraph compose(const kg::KnowledgeGraph& base, std::span<const fs::path> bundle_dirs) {
  const std::string fingerprint = kg::dataset_fingerprint(base);
  std::vector<std::pair<Manifest, fs::path>> bundles;
  for (const auto& dir : bundle_dirs) {
    Manifest m = read_manifest(dir);
    if (m.fingerprint != fingerprint) {
      throw FingerprintMismatch("bundle " + dir.string() + " was built from dataset " +
                                m.fingerprint + ", base dataset is " + fingerprint);
    }
    for (const auto& [other, other_dir] : bundles) {
      if (other.kind == m.kind) {
        throw InvalidArgument("two " + std::string(kind_name(m.kind)) + " bundles: " +
                              other_dir.string() + " and " + dir.string());
      }
    }
    bundles.emplace_back(std::move(m), dir);
  }
  std::sort(bundles.begin(), bundles.end(),
            [](const auto& a, const auto& b) { return a.first.kind < b.first.kind; });

  kg::KnowledgeGraph out = base;
  for (const auto& [m, dir] : bundles) {
    switch (m.kind) {
      case Kind::kEntity:
        for (auto& [id, text] : kg::read_id_text_file(dir / kg::layout::kEntityDescription)) {
          auto e = out.find_entity(id);
          if (!e) throw DanglingReferenceError("entity bundle names unknown entity '" + id + "'");
          out.set_entity_description(*e, std::move(text));
        }
        out.set_has_descriptions(true);
        break;
      case Kind::kRelation:
        for (auto& [id, text] : kg::read_id_text_file(dir / kg::layout::kRelationText)) {
          auto r = out.find_relation(id);
          if (!r) throw DanglingReferenceError("relation bundle names unknown relation '" + id + "'");
          out.set_relation_name(*r, std::move(text));
        }
        break;
      case Kind::kStructure: {
        auto triples = kg::parse_triple_file(dir / kSynthesizedFile);
        std::unordered_map<std::string, std::string> names;
        auto rel = m.settings.find("same_as_relation");
        auto txt = m.settings.find("same_as_text");
        if (rel != m.settings.end() && txt != m.settings.end()) names[rel->second] = txt->second;
        out = enrich::augment_training_set(out, triples, names);
        break;
      }
    }
  }
  return out;
}

}  // namespace kgforge::bundle
