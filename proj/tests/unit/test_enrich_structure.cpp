#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "kgforge/app.hpp"
#include "kgforge/enrich_structure.hpp"
#include "kgforge/errors.hpp"

using namespace kgforge;
using namespace kgforge::enrich;

namespace {

KeywordSet ks(std::string id, std::vector<std::string> words) {
  return make_keyword_set(std::move(id), words);
}

std::vector<KeywordSet> random_sets(std::mt19937_64& rng, std::size_t n, std::size_t vocab, std::size_t max_kw) {
  std::vector<KeywordSet> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::string> w;
    const std::size_t m = rng() % (max_kw + 1);
    for (std::size_t j = 0; j < m; ++j) w.push_back("w" + std::to_string(rng() % vocab));
    out.push_back(ks("n" + std::to_string(i), w));
  }
  return out;
}

// Every ordered pair scored with std::set_intersection, sorted per head.
std::vector<MatchScore> brute_top_k(const std::vector<KeywordSet>& sets, std::size_t k) {
  std::vector<MatchScore> out;
  for (const auto& h : sets) {
    if (h.keywords.empty()) continue;
    std::set<std::string> hs(h.keywords.begin(), h.keywords.end());
    std::vector<MatchScore> row;
    for (const auto& t : sets) {
      if (&t == &h || t.keywords.empty()) continue;
      std::set<std::string> ts(t.keywords.begin(), t.keywords.end());
      std::vector<std::string> common;
      std::set_intersection(hs.begin(), hs.end(), ts.begin(), ts.end(), std::back_inserter(common));
      if (common.empty()) continue;
      row.push_back({h.entity, t.entity, double(common.size()) / double(std::min(hs.size(), ts.size())),
                     common.size()});
    }
    std::sort(row.begin(), row.end(), [](const MatchScore& a, const MatchScore& b) {
      return a.score != b.score ? a.score > b.score : a.tail < b.tail;
    });
    if (row.size() > k) row.resize(k);
    out.insert(out.end(), row.begin(), row.end());
  }
  return out;
}

}  // namespace

TEST(ParseKeywords, CommaList) {
  auto k = parse_keywords("Director, Producer, action film, director", "/m/x");
  EXPECT_EQ(k.entity, "/m/x");
  EXPECT_EQ(k.keywords, (std::vector<std::string>{"director", "producer", "action film"}));
}

TEST(ParseKeywords, NumberedAndBulletedLines) {
  auto k = parse_keywords("Keywords:\n1. Paris\n2) Eiffel  Tower.\n- France;\n* capital\n10. 2024 Olympics");
  EXPECT_EQ(k.keywords, (std::vector<std::string>{"paris", "eiffel tower", "france", "capital", "2024 olympics"}));
}

TEST(ParseKeywords, LabelOnSameLineAndQuotes) {
  auto k = parse_keywords("keywords: \"alpha\", 'beta gamma'");
  EXPECT_EQ(k.keywords, (std::vector<std::string>{"alpha", "beta gamma"}));
}

TEST(ParseKeywords, NumbersThatAreNotMarkersSurvive) {
  auto k = parse_keywords("1998 film, 3.5 stars");
  EXPECT_EQ(k.keywords, (std::vector<std::string>{"1998 film", "3.5 stars"}));
}

TEST(ParseKeywords, NothingUsable) {
  EXPECT_THROW(parse_keywords(""), InvalidArgument);
  EXPECT_THROW(parse_keywords(" , ;\n - "), InvalidArgument);
}

TEST(MatchScore, Examples) {
  auto a = ks("a", {"x", "y", "z"});
  auto b = ks("b", {"y", "z", "w", "v"});
  auto m = match_score(a, b);
  EXPECT_DOUBLE_EQ(m.score, 2.0 / 3.0);
  EXPECT_EQ(m.n_matched, 2u);
  EXPECT_DOUBLE_EQ(match_score(ks("a", {"x"}), ks("b", {"x", "q"})).score, 1.0);
  EXPECT_DOUBLE_EQ(match_score(ks("a", {"x"}), ks("b", {"q"})).score, 0.0);
  EXPECT_THROW(match_score(ks("a", {}), b), InvalidArgument);
  EXPECT_THROW(match_score(a, ks("a", {"x"})), InvalidArgument);
}

TEST(MatchScore, ToyPairFromFixture) {
  auto bay = parse_keywords("director, producer, action film, transformers, armageddon", "bay");
  auto bryce = parse_keywords("film producer, producer, action film, transformers, saving private ryan", "bryce");
  EXPECT_DOUBLE_EQ(match_score(bay, bryce).score, 0.6);
}

TEST(MatchScore, SymmetryAndOracleProperty) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 2000; ++i) {
    auto sets = random_sets(rng, 2, 10, 6);
    if (sets[0].keywords.empty() || sets[1].keywords.empty()) continue;
    auto ab = match_score(sets[0], sets[1]);
    auto ba = match_score(sets[1], sets[0]);
    ASSERT_EQ(ab.score, ba.score);
    ASSERT_GE(ab.score, 0.0);
    ASSERT_LE(ab.score, 1.0);
    std::set<std::string> x(sets[0].keywords.begin(), sets[0].keywords.end());
    std::set<std::string> y(sets[1].keywords.begin(), sets[1].keywords.end());
    const bool subset = std::includes(x.begin(), x.end(), y.begin(), y.end()) ||
                        std::includes(y.begin(), y.end(), x.begin(), x.end());
    ASSERT_EQ(ab.score == 1.0, subset);
  }
}

TEST(TopK, TieBreakOnPartnerId) {
  std::vector<KeywordSet> sets{ks("h", {"a", "b"}), ks("z", {"a"}), ks("m", {"b"}), ks("q", {"c"})};
  auto r = top_k_pairs(sets, {.k = 1});
  ASSERT_EQ(r.pairs.size(), 3u);
  EXPECT_EQ(r.pairs[0].head, "h");
  EXPECT_EQ(r.pairs[0].tail, "m");
  EXPECT_EQ(r.pairs[1].tail, "h");
  EXPECT_EQ(r.pairs[2].head, "m");
}

TEST(TopK, ZeroScoresAndEmptySets) {
  std::vector<KeywordSet> sets{ks("a", {"x"}), ks("b", {"y"}), ks("c", {})};
  auto r = top_k_pairs(sets, {.k = 3});
  EXPECT_TRUE(r.pairs.empty());
  EXPECT_EQ(r.skipped_entities, 1u);
  EXPECT_TRUE(top_k_pairs(sets, {.k = 0}).pairs.empty());
  std::vector<KeywordSet> dup{ks("a", {"x"}), ks("a", {"x"})};
  EXPECT_THROW(top_k_pairs(dup, {}), InvalidArgument);
}

TEST(TopK, BruteForceProperty) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 100; ++i) {
    auto sets = random_sets(rng, 1 + rng() % 30, 4 + rng() % 20, 7);
    const std::size_t k = 1 + rng() % 4;
    auto got = top_k_pairs(sets, {.k = k});
    ASSERT_EQ(got.pairs, brute_top_k(sets, k)) << "instance " << i;
  }
}

TEST(Synthesize, PairsThenSelfLoopsDeduped) {
  const auto g = app::toy_graph();
  std::vector<KeywordSet> sets{ks(g.entity_id(1), {"x"}), ks(g.entity_id(0), {"x"}), ks(g.entity_id(3), {})};
  std::vector<MatchScore> pairs{{g.entity_id(0), g.entity_id(1), 1.0, 1}, {g.entity_id(1), g.entity_id(0), 1.0, 1},
                                {g.entity_id(0), g.entity_id(1), 1.0, 1}};
  auto out = synthesize_triples(pairs, g, sets, {});
  ASSERT_EQ(out.size(), 4u);
  EXPECT_EQ(out[0], (kg::NamedTriple{g.entity_id(0), "SameAs", g.entity_id(1)}));
  EXPECT_EQ(out[1], (kg::NamedTriple{g.entity_id(1), "SameAs", g.entity_id(0)}));
  EXPECT_EQ(out[2], (kg::NamedTriple{g.entity_id(0), "SameAs", g.entity_id(0)}));
  EXPECT_EQ(out[3], (kg::NamedTriple{g.entity_id(1), "SameAs", g.entity_id(1)}));
  EXPECT_EQ(synthesize_triples(pairs, g, sets, {.self_loop = false}).size(), 2u);

  StructureConfig clash;
  clash.same_as_relation = g.relation_id(0);
  EXPECT_THROW(synthesize_triples(pairs, g, sets, clash), InvalidArgument);
}

TEST(Augment, AppendsToTrainOnly) {
  const auto g = app::toy_graph();
  std::vector<kg::NamedTriple> add{{g.entity_id(0), "SameAs", g.entity_id(1)}, {g.entity_id(2), "SameAs", g.entity_id(2)}};
  auto out = augment_training_set(g, add, {{"SameAs", "Same As"}});
  EXPECT_EQ(out.train().size(), g.train().size() + 2);
  EXPECT_EQ(out.valid(), g.valid());
  EXPECT_EQ(out.test(), g.test());
  EXPECT_EQ(out.relation_count(), g.relation_count() + 1);
  EXPECT_EQ(out.relation_name(*out.find_relation("SameAs")), "Same As");
  std::vector<kg::NamedTriple> bad{{"nobody", "SameAs", g.entity_id(0)}};
  EXPECT_THROW(augment_training_set(g, bad), DanglingReferenceError);
}

TEST(ExtractStructure, ToyFixtureAndCountLaw) {
  const auto g = app::toy_graph();
  for (bool self_loop : {true, false}) {
    llm::Gateway gw(std::make_unique<llm::ReplayBackend>(app::toy_fixture()));
    StructureConfig cfg;
    cfg.self_loop = self_loop;
    auto b = extract_structure(g, gw, cfg);
    EXPECT_TRUE(b.keywords.errors.empty());
    EXPECT_EQ(b.keywords.sets.size(), g.entity_count());
    std::size_t with_kw = 0;
    for (const auto& s : b.keywords.sets) with_kw += !s.keywords.empty();
    std::set<kg::NamedTriple> pair_triples;
    for (const auto& p : b.pairs) pair_triples.insert({p.head, cfg.same_as_relation, p.tail});
    EXPECT_EQ(b.triples.size(), pair_triples.size() + (self_loop ? with_kw : 0));

    // Bay and Bryce pick each other.
    auto has = [&](const std::string& h, const std::string& t) {
      return std::find(b.triples.begin(), b.triples.end(), kg::NamedTriple{h, "SameAs", t}) != b.triples.end();
    };
    EXPECT_TRUE(has("/m/0bxtg", "/m/02q_cc"));
    EXPECT_TRUE(has("/m/02q_cc", "/m/0bxtg"));
  }
}
