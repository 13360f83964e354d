#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "kgforge/errors.hpp"
#include "kgforge/graph.hpp"
#include "kgforge/hash.hpp"

namespace fs = std::filesystem;

namespace kgforge::kg {
namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("missing file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

// Calls fn(line_number, line) for each non-empty line, CR stripped.
template <typename Fn>
void for_each_line(std::string_view content, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    std::size_t end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    std::string_view line = content.substr(pos, end - pos);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) fn(line_no, line);
    pos = end + 1;
  }
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    std::size_t tab = line.find('\t', pos);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(pos));
      return fields;
    }
    fields.push_back(line.substr(pos, tab - pos));
    pos = tab + 1;
  }
}

std::string where(const fs::path& file, std::size_t line_no) {
  return file.filename().string() + ":" + std::to_string(line_no);
}

// id<TAB>text, split at the first tab so the text may itself contain tabs.
std::vector<std::pair<std::string, std::string>> read_text_file(const fs::path& path) {
  std::string content = read_file(path);
  std::vector<std::pair<std::string, std::string>> rows;
  std::unordered_set<std::string> seen;
  for_each_line(content, [&](std::size_t line_no, std::string_view line) {
    std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0) {
      throw FormatError("malformed line at " + where(path, line_no) +
                        ": expected id<TAB>text");
    }
    std::string id(line.substr(0, tab));
    if (!seen.insert(id).second) {
      throw FormatError("duplicate id '" + id + "' at " + where(path, line_no));
    }
    rows.emplace_back(std::move(id), std::string(line.substr(tab + 1)));
  });
  return rows;
}

std::vector<std::string> read_id_list(const fs::path& path) {
  std::string content = read_file(path);
  std::vector<std::string> ids;
  std::unordered_set<std::string> seen;
  for_each_line(content, [&](std::size_t line_no, std::string_view line) {
    if (line.find('\t') != std::string_view::npos) {
      throw FormatError("malformed line at " + where(path, line_no) + ": expected a single id");
    }
    std::string id(line);
    if (!seen.insert(id).second) {
      throw FormatError("duplicate id '" + id + "' at " + where(path, line_no));
    }
    ids.push_back(std::move(id));
  });
  return ids;
}

std::optional<fs::path> first_existing(const fs::path& root,
                                       std::initializer_list<std::string_view> names) {
  for (auto name : names) {
    fs::path p = root / name;
    if (fs::exists(p)) return p;
  }
  return std::nullopt;
}

fs::path require_one_of(const fs::path& root, std::initializer_list<std::string_view> names) {
  if (auto p = first_existing(root, names)) return *p;
  throw IoError("missing file: " + (root / *names.begin()).string());
}

struct RawTriple {
  std::size_t line_no;
  std::string head, relation, tail;
  std::int8_t label;
};

std::vector<RawTriple> read_triples(const fs::path& path) {
  std::string content = read_file(path);
  std::vector<RawTriple> rows;
  std::size_t width = 0;
  for_each_line(content, [&](std::size_t line_no, std::string_view line) {
    auto f = split_tabs(line);
    if (f.size() != 3 && f.size() != 4) {
      throw FormatError("malformed line at " + where(path, line_no) + ": expected 3 or 4 fields, got " +
                        std::to_string(f.size()));
    }
    if (width == 0) width = f.size();
    if (f.size() != width) {
      throw FormatError("malformed line at " + where(path, line_no) +
                        ": inconsistent field count in file");
    }
    if (f[0].empty() || f[1].empty() || f[2].empty()) {
      throw FormatError("malformed line at " + where(path, line_no) + ": empty id");
    }
    std::int8_t label = 0;
    if (f.size() == 4) {
      if (f[3] == "1") {
        label = 1;
      } else if (f[3] == "-1") {
        label = -1;
      } else {
        throw FormatError("malformed line at " + where(path, line_no) + ": label must be 1 or -1");
      }
    }
    rows.push_back({line_no, std::string(f[0]), std::string(f[1]), std::string(f[2]), label});
  });
  return rows;
}

void check_writable_text(std::string_view what, std::string_view text) {
  if (text.find('\n') != std::string_view::npos || text.find('\r') != std::string_view::npos) {
    throw FormatError(std::string(what) + " contains a line break and cannot be written");
  }
}

void check_writable_id(std::string_view id) {
  if (id.find('\t') != std::string_view::npos) {
    throw FormatError("id '" + std::string(id) + "' contains a tab and cannot be written");
  }
  check_writable_text("id", id);
}

}  // namespace

LoadResult load_dataset(const fs::path& root, LoadMode mode) {
  if (!fs::is_directory(root)) throw IoError("dataset root is not a directory: " + root.string());

  LoadResult result;
  KnowledgeGraph& kg = result.graph;
  auto& warnings = result.warnings;

  auto entity_texts = read_text_file(require_one_of(root, {layout::kEntityText}));
  auto relation_texts = read_text_file(require_one_of(root, {layout::kRelationText}));

  if (auto p = first_existing(root, {layout::kEntities})) {
    for (auto& id : read_id_list(*p)) kg.add_entity(id);
  } else {
    for (auto& [id, _] : entity_texts) kg.add_entity(id);
  }
  if (auto p = first_existing(root, {layout::kRelations})) {
    for (auto& id : read_id_list(*p)) kg.add_relation(id);
  } else {
    for (auto& [id, _] : relation_texts) kg.add_relation(id);
  }

  std::size_t ignored_texts = 0;
  std::vector<bool> named(kg.entity_count(), false);
  for (auto& [id, text] : entity_texts) {
    if (auto e = kg.find_entity(id)) {
      kg.set_entity_name(*e, std::move(text));
      named[*e] = true;
    } else {
      ++ignored_texts;
    }
  }
  for (EntityIndex e = 0; e < kg.entity_count(); ++e) {
    if (!named[e]) {
      kg.set_entity_name(e, kg.entity_id(e));
      warnings.push_back("entity '" + kg.entity_id(e) + "' has no name; using its id");
    }
  }

  std::vector<bool> rel_named(kg.relation_count(), false);
  for (auto& [id, text] : relation_texts) {
    if (auto r = kg.find_relation(id)) {
      kg.set_relation_name(*r, std::move(text));
      rel_named[*r] = true;
    } else {
      ++ignored_texts;
    }
  }
  for (RelationIndex r = 0; r < kg.relation_count(); ++r) {
    if (!rel_named[r]) {
      kg.set_relation_name(r, kg.relation_id(r));
      warnings.push_back("relation '" + kg.relation_id(r) + "' has no name; using its id");
    }
  }

  if (auto p = first_existing(root, {layout::kEntityDescription})) {
    for (auto& [id, text] : read_text_file(*p)) {
      if (auto e = kg.find_entity(id)) {
        kg.set_entity_description(*e, std::move(text));
      } else {
        ++ignored_texts;
      }
    }
    kg.set_has_descriptions(true);
  }
  if (ignored_texts > 0) {
    warnings.push_back("ignored " + std::to_string(ignored_texts) +
                       " text entries for ids outside the entity/relation sets");
  }

  const std::pair<Split, fs::path> split_files[] = {
      {Split::kTrain, require_one_of(root, {layout::kTrain, "train.tsv"})},
      {Split::kValid, require_one_of(root, {layout::kValid, "valid.tsv", "dev.tsv"})},
      {Split::kTest, require_one_of(root, {layout::kTest, "test.tsv"})},
  };
  for (const auto& [split, path] : split_files) {
    std::size_t dropped = 0;
    for (auto& raw : read_triples(path)) {
      auto h = kg.find_entity(raw.head);
      auto r = kg.find_relation(raw.relation);
      auto t = kg.find_entity(raw.tail);
      if (!h || !r || !t) {
        std::string missing = !h ? "entity '" + raw.head + "'"
                              : !r ? "relation '" + raw.relation + "'"
                                   : "entity '" + raw.tail + "'";
        std::string msg = "dangling reference to unknown " + missing + " at " +
                          where(path, raw.line_no);
        if (mode == LoadMode::kStrict) throw DanglingReferenceError(msg);
        warnings.push_back(msg + " (triple dropped)");
        ++dropped;
        continue;
      }
      kg.add_triple(split, Triple{*h, *r, *t}, raw.label);
    }
    if (dropped > 0) {
      warnings.push_back("dropped " + std::to_string(dropped) + " dangling triples from " +
                         path.filename().string());
    }
  }

  // Positive triples must not appear in two splits.
  std::set<Triple> seen_train(kg.train().triples.begin(), kg.train().triples.end());
  std::set<Triple> seen_valid;
  for (std::size_t i = 0; i < kg.valid().size(); ++i) {
    if (kg.valid().is_positive(i)) seen_valid.insert(kg.valid().triples[i]);
  }
  std::size_t overlaps = 0;
  for (const Triple& t : seen_valid) overlaps += seen_train.count(t);
  for (std::size_t i = 0; i < kg.test().size(); ++i) {
    if (!kg.test().is_positive(i)) continue;
    const Triple& t = kg.test().triples[i];
    overlaps += seen_train.count(t) + seen_valid.count(t);
  }
  if (overlaps > 0) {
    std::string msg = std::to_string(overlaps) + " positive triples appear in more than one split";
    if (mode == LoadMode::kStrict) throw FormatError(msg);
    warnings.push_back(msg);
  }
  return result;
}

std::string serialize_split(const KnowledgeGraph& kg, const SplitData& split) {
  std::string out;
  out.reserve(split.size() * 32);
  for (std::size_t i = 0; i < split.size(); ++i) {
    const Triple& t = split.triples[i];
    out += kg.entity_id(t.head);
    out += '\t';
    out += kg.relation_id(t.relation);
    out += '\t';
    out += kg.entity_id(t.tail);
    if (split.labeled()) out += split.labels[i] > 0 ? "\t1" : "\t-1";
    out += '\n';
  }
  return out;
}

std::string serialize_triples(std::span<const NamedTriple> triples) {
  std::string out;
  for (const auto& t : triples) {
    check_writable_id(t.head);
    check_writable_id(t.relation);
    check_writable_id(t.tail);
    out += t.head + '\t' + t.relation + '\t' + t.tail + '\n';
  }
  return out;
}

std::vector<NamedTriple> parse_triple_file(const fs::path& path) {
  std::vector<NamedTriple> out;
  for (auto& raw : read_triples(path)) {
    out.push_back({std::move(raw.head), std::move(raw.relation), std::move(raw.tail)});
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> read_id_text_file(const fs::path& path) {
  return read_text_file(path);
}

std::string serialize_id_text(std::span<const std::pair<std::string, std::string>> rows) {
  std::string out;
  for (const auto& [id, text] : rows) {
    check_writable_id(id);
    check_writable_text("text of " + id, text);
    out += id + '\t' + text + '\n';
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> serialize_dataset(const KnowledgeGraph& kg) {
  std::string entities, relations, entity_text, entity_desc, relation_text;
  for (EntityIndex e = 0; e < kg.entity_count(); ++e) {
    const auto& id = kg.entity_id(e);
    check_writable_id(id);
    check_writable_text("name of entity " + id, kg.entity_name(e));
    check_writable_text("description of entity " + id, kg.entity_description(e));
    entities += id + '\n';
    entity_text += id + '\t' + kg.entity_name(e) + '\n';
    if (!kg.entity_description(e).empty()) {
      entity_desc += id + '\t' + kg.entity_description(e) + '\n';
    }
  }
  for (RelationIndex r = 0; r < kg.relation_count(); ++r) {
    const auto& id = kg.relation_id(r);
    check_writable_id(id);
    check_writable_text("name of relation " + id, kg.relation_name(r));
    relations += id + '\n';
    relation_text += id + '\t' + kg.relation_name(r) + '\n';
  }

  std::vector<std::pair<std::string, std::string>> files;
  files.emplace_back(layout::kEntities, std::move(entities));
  files.emplace_back(layout::kRelations, std::move(relations));
  files.emplace_back(layout::kEntityText, std::move(entity_text));
  if (kg.has_descriptions()) files.emplace_back(layout::kEntityDescription, std::move(entity_desc));
  files.emplace_back(layout::kRelationText, std::move(relation_text));
  files.emplace_back(layout::kTrain, serialize_split(kg, kg.train()));
  files.emplace_back(layout::kValid, serialize_split(kg, kg.valid()));
  files.emplace_back(layout::kTest, serialize_split(kg, kg.test()));
  return files;
}

void write_dataset(const KnowledgeGraph& kg, const fs::path& root) {
  auto files = serialize_dataset(kg);
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw IoError("cannot create directory " + root.string() + ": " + ec.message());
  for (const auto& [name, content] : files) {
    fs::path p = root / name;
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + p.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed: " + p.string());
  }
  // A stale description file from an earlier write would be picked up on load.
  if (!kg.has_descriptions()) fs::remove(root / layout::kEntityDescription, ec);
}

std::string dataset_fingerprint(const KnowledgeGraph& kg) {
  Sha256 h;
  for (const auto& [name, content] : serialize_dataset(kg)) {
    h.update(name);
    h.update(std::string_view("\0", 1));
    h.update(std::to_string(content.size()));
    h.update(std::string_view("\0", 1));
    h.update(content);
  }
  return h.hex_digest();
}

}  // namespace kgforge::kg
