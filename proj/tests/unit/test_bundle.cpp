#include <gtest/gtest.h>

#include "kgforge/app.hpp"
#include "kgforge/bundle.hpp"
#include "kgforge/errors.hpp"
#include "test_support.hpp"

using namespace kgforge;
using kgforge::testing::TempDir;
namespace fs = std::filesystem;

namespace {

struct ToyBundles {
  TempDir dir;
  kg::KnowledgeGraph base = app::toy_graph();
  fs::path entity, relation, structure;
  enrich::StructureBundle structure_bundle;

  ToyBundles() {
    llm::Gateway gw(std::make_unique<llm::ReplayBackend>(app::toy_fixture()));
    entity = dir / "entity";
    relation = dir / "relation";
    structure = dir / "structure";
    bundle::write_entity_bundle(enrich::expand_descriptions(base, gw, 70), entity);
    bundle::write_relation_bundle(
        enrich::describe_relations(base, gw, prompt::kAllRelationModes), relation);
    structure_bundle = enrich::extract_structure(base, gw, {});
    bundle::write_structure_bundle(structure_bundle, base, structure);
  }
};

}  // namespace

TEST(Bundle, ManifestsRoundTrip) {
  ToyBundles t;
  auto m = bundle::read_manifest(t.structure);
  EXPECT_EQ(m.kind, bundle::Kind::kStructure);
  EXPECT_EQ(m.fingerprint, kg::dataset_fingerprint(t.base));
  EXPECT_EQ(m.settings.at("same_as_relation"), "SameAs");
  EXPECT_EQ(bundle::read_manifest(t.entity).kind, bundle::Kind::kEntity);
  EXPECT_EQ(bundle::read_manifest(t.relation).n_items, 3u);
  EXPECT_TRUE(fs::exists(t.structure / bundle::kKeywordsFile));
  EXPECT_TRUE(fs::exists(t.structure / bundle::kAuditFile));
  EXPECT_THROW(bundle::read_manifest(t.dir / "nowhere"), Error);
}

TEST(Compose, NoBundlesIsIdentity) {
  ToyBundles t;
  auto out = bundle::compose(t.base, {});
  EXPECT_TRUE(out == t.base);
  EXPECT_EQ(kg::dataset_fingerprint(out), kg::dataset_fingerprint(t.base));
}

TEST(Compose, AppliesEveryKind) {
  ToyBundles t;
  std::vector<fs::path> dirs{t.entity, t.relation, t.structure};
  auto out = bundle::compose(t.base, dirs);
  EXPECT_EQ(out.train().size(), t.base.train().size() + t.structure_bundle.triples.size());
  EXPECT_EQ(out.valid(), t.base.valid());
  EXPECT_EQ(out.test(), t.base.test());
  EXPECT_NE(out.entity_description(0), t.base.entity_description(0));
  EXPECT_EQ(out.entity_description(0).rfind(t.base.entity_description(0), 0), 0u);
  EXPECT_EQ(out.relation_name(0).rfind("film directed by ", 0), 0u);
  auto same_as = out.find_relation("SameAs");
  ASSERT_TRUE(same_as.has_value());
  EXPECT_EQ(out.relation_name(*same_as), "Same As");
}

TEST(Compose, OrderInsensitive) {
  ToyBundles t;
  std::vector<fs::path> a{t.entity, t.relation, t.structure};
  std::vector<fs::path> b{t.structure, t.entity, t.relation};
  std::vector<fs::path> c{t.relation, t.structure, t.entity};
  const auto fa = kg::dataset_fingerprint(bundle::compose(t.base, a));
  EXPECT_EQ(fa, kg::dataset_fingerprint(bundle::compose(t.base, b)));
  EXPECT_EQ(fa, kg::dataset_fingerprint(bundle::compose(t.base, c)));
}

TEST(Compose, WrittenResultReloadsIdentically) {
  ToyBundles t;
  std::vector<fs::path> dirs{t.entity, t.relation, t.structure};
  auto out = bundle::compose(t.base, dirs);
  kg::write_dataset(out, t.dir / "composed");
  auto back = kg::load_dataset(t.dir / "composed");
  EXPECT_TRUE(back.warnings.empty());
  EXPECT_TRUE(back.graph == out);
}

TEST(Compose, FingerprintMismatch) {
  ToyBundles t;
  auto other = t.base;
  other.set_entity_name(0, "Somebody");
  std::vector<fs::path> dirs{t.entity};
  try {
    bundle::compose(other, dirs);
    FAIL();
  } catch (const FingerprintMismatch& e) {
    EXPECT_NE(std::string(e.what()).find(t.entity.string()), std::string::npos);
  }
}

TEST(Compose, TwoBundlesOfOneKind) {
  ToyBundles t;
  fs::copy(t.entity, t.dir / "entity2", fs::copy_options::recursive);
  std::vector<fs::path> dirs{t.entity, t.dir / "entity2"};
  EXPECT_THROW(bundle::compose(t.base, dirs), InvalidArgument);
}
