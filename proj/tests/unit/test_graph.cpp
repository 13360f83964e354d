#include <gtest/gtest.h>

#include <random>

#include "kgforge/app.hpp"
#include "kgforge/errors.hpp"
#include "kgforge/graph.hpp"
#include "kgforge/hash.hpp"
#include "test_support.hpp"

using namespace kgforge;
using kgforge::testing::TempDir;
using kgforge::testing::write_file;
using kgforge::testing::read_file;

namespace {

void write_minimal(const std::filesystem::path& root) {
  write_file(root / "entity2text.txt", "a\tAlpha\nb\tBeta\nc\tGamma\n");
  write_file(root / "relation2text.txt", "r\trel r\n");
  write_file(root / "train.txt", "a\tr\tb\nb\tr\tc\n");
  write_file(root / "valid.txt", "a\tr\tc\n");
  write_file(root / "test.txt", "c\tr\ta\n");
}

}  // namespace

TEST(Sha256, KnownVectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  Sha256 h;
  h.update("a");
  h.update("bc");
  EXPECT_EQ(h.hex_digest(), sha256_hex("abc"));
}

TEST(KnowledgeGraph, RejectsDuplicateAndEmptyIds) {
  kg::KnowledgeGraph g;
  g.add_entity("x");
  EXPECT_THROW(g.add_entity("x"), InvalidArgument);
  EXPECT_THROW(g.add_entity(""), InvalidArgument);
  g.add_relation("r");
  EXPECT_THROW(g.add_relation("r"), InvalidArgument);
  EXPECT_THROW(g.add_triple(kg::Split::kTrain, {0, 0, 5}), DanglingReferenceError);
}

TEST(LoadDataset, MinimalLayout) {
  TempDir dir;
  write_minimal(dir.path());
  auto res = kg::load_dataset(dir.path());
  EXPECT_TRUE(res.warnings.empty());
  const auto& g = res.graph;
  EXPECT_EQ(kg::dataset_stats(g), (kg::DatasetStats{3, 1, 2, 1, 1}));
  EXPECT_EQ(g.entity_name(*g.find_entity("b")), "Beta");
  EXPECT_EQ(g.relation_name(0), "rel r");
  EXPECT_FALSE(g.has_descriptions());
}

TEST(LoadDataset, EntityListDefinesTheSet) {
  TempDir dir;
  write_minimal(dir.path());
  write_file(dir / "entities.txt", "c\nb\na\nd\n");
  auto res = kg::load_dataset(dir.path());
  EXPECT_EQ(res.graph.entity_count(), 4u);
  EXPECT_EQ(res.graph.entity_id(0), "c");
  EXPECT_EQ(res.graph.entity_name(3), "d");
  ASSERT_EQ(res.warnings.size(), 1u);
  EXPECT_NE(res.warnings[0].find("'d' has no name"), std::string::npos);
}

TEST(LoadDataset, ExtraTextEntriesAreIgnoredWithWarning) {
  TempDir dir;
  write_minimal(dir.path());
  write_file(dir / "entities.txt", "a\nb\nc\n");
  write_file(dir / "entity2text.txt", "a\tAlpha\nb\tBeta\nc\tGamma\nz\tZeta\n");
  auto res = kg::load_dataset(dir.path());
  EXPECT_EQ(res.graph.entity_count(), 3u);
  ASSERT_EQ(res.warnings.size(), 1u);
  EXPECT_NE(res.warnings[0].find("ignored 1"), std::string::npos);
}

TEST(LoadDataset, DanglingStrictVersusLenient) {
  TempDir dir;
  write_minimal(dir.path());
  write_file(dir / "train.txt", "a\tr\tb\nb\tr\tq\n");
  try {
    kg::load_dataset(dir.path());
    FAIL() << "expected DanglingReferenceError";
  } catch (const DanglingReferenceError& e) {
    EXPECT_NE(std::string(e.what()).find("'q'"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("train.txt:2"), std::string::npos);
  }
  auto res = kg::load_dataset(dir.path(), kg::LoadMode::kLenient);
  EXPECT_EQ(res.graph.train().size(), 1u);
  EXPECT_EQ(res.warnings.size(), 2u);
}

TEST(LoadDataset, MalformedLines) {
  TempDir dir;
  write_minimal(dir.path());
  write_file(dir / "test.txt", "c\tr\n");
  EXPECT_THROW(kg::load_dataset(dir.path()), FormatError);
  write_file(dir / "test.txt", "c\tr\ta\t0\n");
  EXPECT_THROW(kg::load_dataset(dir.path()), FormatError);
  write_file(dir / "test.txt", "c\tr\ta\n");
  write_file(dir / "entity2text.txt", "a\tAlpha\na\tAgain\nb\tBeta\nc\tGamma\n");
  EXPECT_THROW(kg::load_dataset(dir.path()), FormatError);
}

TEST(LoadDataset, MissingFilesAndRoot) {
  TempDir dir;
  EXPECT_THROW(kg::load_dataset(dir / "nope"), IoError);
  write_minimal(dir.path());
  std::filesystem::remove(dir / "valid.txt");
  try {
    kg::load_dataset(dir.path());
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("valid.txt"), std::string::npos);
  }
}

TEST(LoadDataset, AcceptsTsvAliasesAndDev) {
  TempDir dir;
  write_minimal(dir.path());
  std::filesystem::rename(dir / "valid.txt", dir / "dev.tsv");
  std::filesystem::rename(dir / "train.txt", dir / "train.tsv");
  auto res = kg::load_dataset(dir.path());
  EXPECT_EQ(res.graph.valid().size(), 1u);
  EXPECT_EQ(res.graph.train().size(), 2u);
}

TEST(LoadDataset, LabeledSplits) {
  TempDir dir;
  write_minimal(dir.path());
  write_file(dir / "valid.txt", "a\tr\tc\t1\nc\tr\tb\t-1\n");
  write_file(dir / "test.txt", "c\tr\ta\t1\nb\tr\ta\t-1\n");
  auto res = kg::load_dataset(dir.path());
  const auto& v = res.graph.valid();
  ASSERT_TRUE(v.labeled());
  EXPECT_TRUE(v.is_positive(0));
  EXPECT_FALSE(v.is_positive(1));
  EXPECT_EQ(v.positives().size(), 1u);
  EXPECT_EQ(res.graph.test().size(), 2u);
}

TEST(LoadDataset, OverlapBetweenSplits) {
  TempDir dir;
  write_minimal(dir.path());
  write_file(dir / "test.txt", "a\tr\tb\n");
  EXPECT_THROW(kg::load_dataset(dir.path()), FormatError);
  auto res = kg::load_dataset(dir.path(), kg::LoadMode::kLenient);
  EXPECT_EQ(res.warnings.size(), 1u);
  // A negative that matches a train triple is not an overlap.
  write_file(dir / "test.txt", "a\tr\tb\t-1\nc\tr\ta\t1\n");
  EXPECT_NO_THROW(kg::load_dataset(dir.path()));
}

TEST(WriteDataset, RoundTripIsExact) {
  TempDir dir;
  const auto g = app::toy_graph();
  kg::write_dataset(g, dir / "out");
  auto back = kg::load_dataset(dir / "out");
  EXPECT_TRUE(back.warnings.empty());
  EXPECT_TRUE(back.graph == g);
  EXPECT_EQ(kg::dataset_fingerprint(back.graph), kg::dataset_fingerprint(g));
  kg::write_dataset(back.graph, dir / "again");
  EXPECT_EQ(kgforge::testing::snapshot_tree(dir / "out"), kgforge::testing::snapshot_tree(dir / "again"));
}

TEST(WriteDataset, RejectsUnwritableText) {
  TempDir dir;
  auto g = kgforge::testing::small_graph(2, 1);
  g.set_entity_name(0, "two\nlines");
  EXPECT_THROW(kg::write_dataset(g, dir / "out"), FormatError);
}

TEST(Fingerprint, SensitiveToEveryPart) {
  const auto base = app::toy_graph();
  const auto fp = kg::dataset_fingerprint(base);
  EXPECT_EQ(fp.size(), 64u);

  auto a = base;
  a.set_entity_name(0, "Someone Else");
  EXPECT_NE(kg::dataset_fingerprint(a), fp);

  auto b = base;
  b.set_entity_description(1, "changed");
  EXPECT_NE(kg::dataset_fingerprint(b), fp);

  auto c = base;
  c.add_triple(kg::Split::kTrain, {0, 0, 1});
  EXPECT_NE(kg::dataset_fingerprint(c), fp);

  auto d = base;
  d.set_relation_name(2, "located in");
  EXPECT_NE(kg::dataset_fingerprint(d), fp);
}

TEST(ToyGraph, AuthoredCounts) {
  EXPECT_EQ(kg::dataset_stats(app::toy_graph()), (kg::DatasetStats{8, 3, 12, 2, 2}));
}

// Random graphs survive write then load unchanged.
TEST(WriteDataset, RandomRoundTripProperty) {
  std::mt19937_64 rng(11);
  for (int iter = 0; iter < 30; ++iter) {
    const std::size_t n = 2 + rng() % 20, m = 1 + rng() % 5;
    auto g = kgforge::testing::small_graph(n, m);
    const bool descs = rng() % 2;
    g.set_has_descriptions(descs);
    if (descs) {
      for (kg::EntityIndex e = 0; e < n; ++e) g.set_entity_description(e, "desc " + std::to_string(rng() % 100));
    }
    std::set<kg::Triple> used;
    const bool labeled = rng() % 2;
    for (auto split : {kg::Split::kTrain, kg::Split::kValid, kg::Split::kTest}) {
      const std::size_t count = rng() % 15;
      for (std::size_t i = 0; i < count; ++i) {
        kg::Triple t{static_cast<kg::EntityIndex>(rng() % n), static_cast<kg::RelationIndex>(rng() % m),
                     static_cast<kg::EntityIndex>(rng() % n)};
        if (!used.insert(t).second) continue;
        std::int8_t label = 0;
        if (labeled && split != kg::Split::kTrain) label = rng() % 2 ? 1 : -1;
        g.add_triple(split, t, label);
      }
    }
    TempDir dir;
    kg::write_dataset(g, dir.path());
    auto back = kg::load_dataset(dir.path());
    ASSERT_TRUE(back.graph == g) << "iteration " << iter;
  }
}
