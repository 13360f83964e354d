#include <cstdio>
#include <fstream>
#include <set>

#include "json.hpp"
#include "kgforge/app.hpp"
#include "kgforge/errors.hpp"
#include "rng.hpp"

namespace kgforge::app {
namespace {

namespace fs = std::filesystem;

struct ToyEntity {
  const char* id;
  const char* name;
  const char* description;
  const char* expansion;
  const char* keywords;
};

// Michael Bay and Ian Bryce share 3 of their 5 keywords (score 0.6).
constexpr ToyEntity kToyEntities[] = {
    {"/m/0bxtg", "Michael Bay",
     "American film director and producer known for big-budget action films.",
     "Michael Bay is an American filmmaker born in 1965 in Los Angeles. He directed Armageddon "
     "and the Transformers series and is known for fast cutting and large practical explosions.",
     "director, producer, action film, transformers, armageddon"},
    {"/m/02q_cc", "Ian Bryce",
     "English-born film producer working in Hollywood.",
     "Ian Bryce is a film producer born in England who worked on Saving Private Ryan and "
     "produced several Transformers films.",
     "film producer, producer, action film, transformers, saving private ryan"},
    {"/m/0d9z_y", "Transformers",
     "2007 American science fiction action film directed by Michael Bay.",
     "Transformers is a 2007 science fiction action film based on the Hasbro toy line, directed "
     "by Michael Bay with Steven Spielberg as executive producer.",
     "science fiction, action film, robots, 2007 film, hasbro"},
    {"/m/0k4p0", "Armageddon",
     "1998 American science fiction disaster film directed by Michael Bay.",
     "Armageddon is a 1998 disaster film in which a team of oil drillers is sent to stop an "
     "asteroid on a collision course with Earth.",
     "disaster film, asteroid, 1998 film, nasa, space mission"},
    {"/m/06pj8", "Steven Spielberg",
     "American film director, producer and screenwriter.",
     "Steven Spielberg is an American director and producer, co-founder of DreamWorks, whose "
     "films include Jaws, Jurassic Park and Saving Private Ryan.",
     "filmmaker, screenwriter, dreamworks founder, jaws, academy award"},
    {"/m/07024", "Saving Private Ryan",
     "1998 American war film directed by Steven Spielberg.",
     "Saving Private Ryan is a 1998 war film set during the Normandy invasion of World War II, "
     "following a squad searching for a missing paratrooper.",
     "war film, world war ii, normandy, paratrooper, 1998 war drama"},
    {"/m/030qb3t", "Los Angeles",
     "City in Southern California and center of the American film industry.",
     "Los Angeles is the most populous city in California and home of Hollywood and many major "
     "film studios.",
     "california, city, hollywood, west coast, pacific"},
    {"/m/016tt2", "DreamWorks",
     "American film studio founded in 1994.",
     "DreamWorks Pictures is an American film studio founded in 1994 by Steven Spielberg, "
     "Jeffrey Katzenberg and David Geffen.",
     "film studio, production company, 1994 founding, distributor, entertainment"},
};

struct ToyRelation {
  const char* id;
  const char* name;
  const char* global;
  const char* local;
  const char* reverse;
};

constexpr ToyRelation kToyRelations[] = {
    {"/film/film/directed_by", "film directed by",
     "Links a film to the person who directed it.",
     "A film entity points to a person entity who held the director role.",
     "The reverse relation is director of film, linking a person to the films they directed."},
    {"/film/film/produced_by", "film produced by",
     "Links a film to a person or company that produced it.",
     "A film entity points to a person or studio that financed or managed the production.",
     "The reverse relation is producer of film, linking a producer to their films."},
    {"/location/based_in", "based in",
     "Links a person or organization to the place where they are based.",
     "A person or company entity points to a city or region entity.",
     "The reverse relation is home of, linking a place to people and organizations based there."},
};

struct ToyTriple {
  int head, relation, tail;
};

constexpr ToyTriple kToyTrain[] = {
    {2, 0, 0}, {3, 0, 0}, {5, 0, 4}, {2, 1, 1}, {5, 1, 1}, {2, 1, 4},
    {5, 1, 7}, {2, 1, 7}, {0, 2, 6}, {4, 2, 6}, {1, 2, 6}, {7, 2, 6},
};
constexpr ToyTriple kToyValid[] = {{5, 1, 4}, {3, 1, 0}};
constexpr ToyTriple kToyTest[] = {{3, 1, 1}, {2, 1, 0}};

llm::LlmExchange authored(const prompt::RenderedPrompt& p, std::string response) {
  llm::LlmExchange ex;
  ex.prompt = p.text;
  ex.response = std::move(response);
  ex.key = llm::cache_key(ex.prompt, ex.params);
  ex.backend = "authored";
  return ex;
}

std::string two_digits(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%02zu", i);
  return buf;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

nlohmann::ordered_json run_json(FixtureKind kind) {
  nlohmann::ordered_json j;
  j["dataset"] = "dataset";
  j["output_dir"] = "out";
  j["seed"] = 7;
  j["gateway"] = {{"backend", "replay"}, {"fixture", "fixture.jsonl"}, {"concurrency", 4}};
  if (kind == FixtureKind::kToy) {
    j["strategies"] = {"E", "R", "S"};
    j["relation_modes"] = {"global", "local", "reverse"};
    j["budget_tokens"] = 70;
    j["structure"] = {{"k", 1}, {"self_loop", true}};
    j["eval"] = {{"model", "TransE"}, {"dim", 16},        {"epochs", 200},   {"learning_rate", 0.05},
                 {"margin", 1.0},     {"batch_size", 16}, {"norm", "L1"},    {"n_seeds", 2}};
  } else {
    j["strategies"] = {"S"};
    j["structure"] = {{"k", 1}, {"self_loop", true}};
    j["eval"] = {{"model", "TransE"}, {"dim", 32},        {"epochs", 300},   {"learning_rate", 0.02},
                 {"margin", 1.0},     {"batch_size", 64}, {"norm", "L1"},    {"n_seeds", 5}};
  }
  return j;
}

}  // namespace

kg::KnowledgeGraph toy_graph() {
  kg::KnowledgeGraph g;
  for (const auto& e : kToyEntities) {
    auto i = g.add_entity(e.id);
    g.set_entity_name(i, e.name);
    g.set_entity_description(i, e.description);
  }
  for (const auto& r : kToyRelations) g.set_relation_name(g.add_relation(r.id), r.name);
  auto add = [&](kg::Split s, std::span<const ToyTriple> ts) {
    for (const auto& t : ts) {
      g.add_triple(s, kg::Triple{static_cast<kg::EntityIndex>(t.head),
                                 static_cast<kg::RelationIndex>(t.relation),
                                 static_cast<kg::EntityIndex>(t.tail)});
    }
  };
  add(kg::Split::kTrain, kToyTrain);
  add(kg::Split::kValid, kToyValid);
  add(kg::Split::kTest, kToyTest);
  return g;
}

std::vector<llm::LlmExchange> toy_fixture() {
  std::vector<llm::LlmExchange> out;
  for (const auto& e : kToyEntities) {
    out.push_back(authored(prompt::render_entity_prompt(e.name, e.id), e.expansion));
  }
  for (const auto& r : kToyRelations) {
    out.push_back(authored(prompt::render_relation_prompt(r.name, prompt::RelationMode::kGlobal, r.id),
                           r.global));
    out.push_back(authored(prompt::render_relation_prompt(r.name, prompt::RelationMode::kLocal, r.id),
                           r.local));
    out.push_back(authored(prompt::render_relation_prompt(r.name, prompt::RelationMode::kReverse, r.id),
                           r.reverse));
  }
  for (const auto& e : kToyEntities) {
    out.push_back(authored(prompt::render_keyword_prompt(e.description, e.id), e.keywords));
  }
  return out;
}

kg::KnowledgeGraph synthetic_alias_graph(const SyntheticSpec& spec) {
  const std::size_t n_alias = spec.n_alias_pairs * 2;
  if (spec.n_relations < 1) throw InvalidArgument("synthetic graph needs at least one relation");
  if (spec.neighbors_per_alias < 4 || spec.neighbors_per_alias % 2 != 0) {
    throw InvalidArgument("neighbors_per_alias must be even and >= 4");
  }
  if (spec.n_entities < n_alias + spec.neighbors_per_alias + 1) {
    throw InvalidArgument("too few entities for the requested alias pairs");
  }
  detail::Rng rng(spec.seed);
  kg::KnowledgeGraph g;
  for (std::size_t i = 0; i < spec.n_entities; ++i) {
    auto e = g.add_entity("e" + two_digits(i));
    g.set_entity_name(e, "entity " + two_digits(i));
    if (i < n_alias) {
      g.set_entity_description(e, "Record of concept " + two_digits(i / 2) +
                                      ", one of two entries for the same thing.");
    } else {
      g.set_entity_description(e, "Standalone object number " + two_digits(i) + ".");
    }
  }
  for (std::size_t r = 0; r < spec.n_relations; ++r) {
    g.set_relation_name(g.add_relation("r" + std::to_string(r)), "relation " + std::to_string(r));
  }

  const auto n_rel = static_cast<std::uint64_t>(spec.n_relations);
  const std::size_t n_plain = spec.n_entities - n_alias;
  auto plain = [&](std::uint64_t k) { return static_cast<kg::EntityIndex>(n_alias + k); };
  auto rel = [&] { return static_cast<kg::RelationIndex>(detail::uniform_index(rng, n_rel)); };

  // Background edges among non-alias entities.
  std::set<kg::Triple> background;
  for (std::size_t k = 0; k < n_plain; ++k) {
    for (std::size_t j = 0; j < spec.background_per_entity; ++j) {
      auto other = detail::uniform_index(rng, n_plain - 1);
      if (other >= k) ++other;
      kg::Triple t{plain(k), rel(), plain(other)};
      if (background.insert(t).second) g.add_triple(kg::Split::kTrain, t);
    }
  }

  // Each pair's neighborhood: first half on the even alias, second half on
  // the odd one. Held-out triples move a neighbor to the other alias.
  std::vector<std::uint64_t> pool(n_plain);
  for (std::size_t k = 0; k < n_plain; ++k) pool[k] = k;
  const std::size_t half = spec.neighbors_per_alias / 2;
  for (std::size_t p = 0; p < spec.n_alias_pairs; ++p) {
    const auto a = static_cast<kg::EntityIndex>(2 * p);
    const auto b = static_cast<kg::EntityIndex>(2 * p + 1);
    detail::shuffle(pool, rng);
    std::vector<std::pair<kg::EntityIndex, kg::RelationIndex>> nbrs;
    for (std::size_t j = 0; j < spec.neighbors_per_alias; ++j) nbrs.emplace_back(plain(pool[j]), rel());
    for (std::size_t j = 0; j < half; ++j) {
      g.add_triple(kg::Split::kTrain, {a, nbrs[j].second, nbrs[j].first});
      g.add_triple(kg::Split::kTrain, {b, nbrs[half + j].second, nbrs[half + j].first});
    }
    const std::size_t n_test = half / 2;
    for (std::size_t j = 0; j < half; ++j) {
      const auto split = j < n_test ? kg::Split::kTest : kg::Split::kValid;
      g.add_triple(split, {a, nbrs[half + j].second, nbrs[half + j].first});
      g.add_triple(split, {b, nbrs[j].second, nbrs[j].first});
    }
  }
  return g;
}

std::vector<llm::LlmExchange> synthetic_fixture(const kg::KnowledgeGraph& kg) {
  std::vector<llm::LlmExchange> out;
  std::set<std::string> seen;
  for (kg::EntityIndex e = 0; e < kg.entity_count(); ++e) {
    const std::string& desc = kg.entity_description(e);
    if (!seen.insert(desc).second) continue;
    const std::string& id = kg.entity_id(e);
    std::string response;
    if (desc.rfind("Record of concept ", 0) == 0) {
      const std::string n = desc.substr(18, 2);
      response = "concept " + n + ", shared record " + n + ", alias group " + n;
    } else {
      const std::string n = id.substr(1);
      response = "object " + n + ", marker " + n + ", standalone " + n;
    }
    out.push_back(authored(prompt::render_keyword_prompt(desc, id), std::move(response)));
  }
  return out;
}

void write_fixture_set(FixtureKind kind, const fs::path& dir) {
  const kg::KnowledgeGraph g = kind == FixtureKind::kToy ? toy_graph() : synthetic_alias_graph();
  const auto records = kind == FixtureKind::kToy ? toy_fixture() : synthetic_fixture(g);
  kg::write_dataset(g, dir / "dataset");
  std::string lines;
  for (const auto& r : records) lines += llm::to_fixture_line(r) + "\n";
  write_file(dir / "fixture.jsonl", lines);
  write_file(dir / "run.json", run_json(kind).dump(2) + "\n");
}

}  // namespace kgforge::app
