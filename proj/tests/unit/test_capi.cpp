// Exercises the shared library through kgforge.h only.

#include <gtest/gtest.h>

#include <filesystem>
#include <string>

#include "kgforge/kgforge.h"
#include "test_support.hpp"

using kgforge::testing::TempDir;
namespace fs = std::filesystem;

namespace {

std::string take(char* s) {
  std::string out = s ? s : "";
  kgf_string_free(s);
  return out;
}

}  // namespace

TEST(CApi, VersionAndStatusNames) {
  EXPECT_STREQ(kgf_version(), "0.1.0");
  EXPECT_STREQ(kgf_status_name(KGF_OK), "ok");
  EXPECT_STREQ(kgf_status_name(KGF_ERR_FINGERPRINT_MISMATCH), "fingerprint_mismatch");
}

TEST(CApi, GraphLifecycle) {
  TempDir dir;
  ASSERT_EQ(kgf_write_fixtures("toy", dir.path().c_str()), KGF_OK);
  kgf_graph* g = nullptr;
  ASSERT_EQ(kgf_graph_load((dir / "dataset").c_str(), 0, &g), KGF_OK);
  kgf_stats s{};
  ASSERT_EQ(kgf_graph_stats(g, &s), KGF_OK);
  EXPECT_EQ(s.n_entities, 8u);
  EXPECT_EQ(s.n_relations, 3u);
  EXPECT_EQ(s.n_train, 12u);
  EXPECT_EQ(s.n_valid, 2u);
  EXPECT_EQ(s.n_test, 2u);
  size_t n_warn = 99;
  EXPECT_EQ(kgf_graph_warning_count(g, &n_warn), KGF_OK);
  EXPECT_EQ(n_warn, 0u);
  char* w = nullptr;
  EXPECT_EQ(kgf_graph_warning(g, 0, &w), KGF_ERR_INVALID_ARGUMENT);

  char* fp = nullptr;
  ASSERT_EQ(kgf_graph_fingerprint(g, &fp), KGF_OK);
  const std::string fingerprint = take(fp);
  EXPECT_EQ(fingerprint.size(), 64u);

  ASSERT_EQ(kgf_graph_write(g, (dir / "copy").c_str()), KGF_OK);
  kgf_graph_free(g);
  kgf_graph* g2 = nullptr;
  ASSERT_EQ(kgf_graph_load((dir / "copy").c_str(), 0, &g2), KGF_OK);
  ASSERT_EQ(kgf_graph_fingerprint(g2, &fp), KGF_OK);
  EXPECT_EQ(take(fp), fingerprint);
  kgf_graph_free(g2);
  kgf_graph_free(nullptr);
}

TEST(CApi, ErrorsMapToStatusCodes) {
  TempDir dir;
  kgf_graph* g = reinterpret_cast<kgf_graph*>(0x1);
  EXPECT_EQ(kgf_graph_load((dir / "missing").c_str(), 0, &g), KGF_ERR_IO);
  EXPECT_EQ(g, nullptr);
  EXPECT_NE(std::string(kgf_last_error()).find("missing"), std::string::npos);

  kgforge::testing::write_file(dir / "d" / "entity2text.txt", "a\tA\n");
  kgforge::testing::write_file(dir / "d" / "relation2text.txt", "r\tR\n");
  kgforge::testing::write_file(dir / "d" / "train.txt", "a\tr\tb\n");
  kgforge::testing::write_file(dir / "d" / "valid.txt", "");
  kgforge::testing::write_file(dir / "d" / "test.txt", "");
  EXPECT_EQ(kgf_graph_load((dir / "d").c_str(), 0, &g), KGF_ERR_DANGLING_REFERENCE);
  ASSERT_EQ(kgf_graph_load((dir / "d").c_str(), 1, &g), KGF_OK);
  size_t n = 0;
  kgf_graph_warning_count(g, &n);
  EXPECT_GE(n, 1u);
  kgf_graph_free(g);

  kgforge::testing::write_file(dir / "d" / "train.txt", "a\tr\n");
  EXPECT_EQ(kgf_graph_load((dir / "d").c_str(), 0, &g), KGF_ERR_FORMAT);

  EXPECT_EQ(kgf_graph_load(nullptr, 0, &g), KGF_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(kgf_graph_stats(nullptr, nullptr), KGF_ERR_INVALID_ARGUMENT);
}

TEST(CApi, TextHelpers) {
  char* out = nullptr;
  ASSERT_EQ(kgf_render_prompt("entity_expand", "Paris", &out), KGF_OK);
  EXPECT_EQ(take(out), "Please provide all information about Paris. Give the rationale before answering:");
  EXPECT_EQ(kgf_render_prompt("nope", "Paris", &out), KGF_ERR_INVALID_ARGUMENT);

  ASSERT_EQ(kgf_parse_keywords("1. Alpha\n2. beta, Alpha", &out), KGF_OK);
  EXPECT_EQ(take(out), "alpha\nbeta\n");
  EXPECT_EQ(kgf_parse_keywords(" , ", &out), KGF_ERR_INVALID_ARGUMENT);

  const char* h[] = {"a", "b", "c"};
  const char* t[] = {"b", "c", "d", "e"};
  double s = -1;
  ASSERT_EQ(kgf_match_score(h, 3, t, 4, &s), KGF_OK);
  EXPECT_DOUBLE_EQ(s, 2.0 / 3.0);
  EXPECT_EQ(kgf_match_score(h, 0, t, 4, &s), KGF_ERR_INVALID_ARGUMENT);
}

TEST(CApi, RunPipeline) {
  TempDir dir;
  ASSERT_EQ(kgf_write_fixtures("toy", dir.path().c_str()), KGF_OK);
  kgf_run* run = nullptr;
  ASSERT_EQ(kgf_run_load((dir / "run.json").c_str(), &run), KGF_OK);
  ASSERT_EQ(kgf_run_set(run, "epochs", "10"), KGF_OK);
  ASSERT_EQ(kgf_run_set(run, "strategies", "S"), KGF_OK);
  EXPECT_EQ(kgf_run_set(run, "strategies", "Q"), KGF_ERR_CONFIG);
  EXPECT_EQ(kgf_run_set(run, "no_such_key", "1"), KGF_ERR_CONFIG);

  int exit_code = -1;
  char* log = nullptr;
  ASSERT_EQ(kgf_run_enrich(run, 0, &exit_code, &log), KGF_OK) << kgf_last_error();
  EXPECT_EQ(exit_code, 0);
  EXPECT_NE(take(log).find("structure"), std::string::npos);

  const std::string bundle = (dir / "out" / "enrich" / "structure").string();
  const char* dirs[] = {bundle.c_str()};
  ASSERT_EQ(kgf_run_compose(run, dirs, 1, nullptr, &log), KGF_OK) << kgf_last_error();
  take(log);
  EXPECT_TRUE(fs::exists(dir / "out" / "composed" / "train.txt"));

  char* table = nullptr;
  ASSERT_EQ(kgf_run_eval(run, nullptr, nullptr, &table), KGF_OK) << kgf_last_error();
  EXPECT_NE(take(table).find("MRR"), std::string::npos);

  EXPECT_EQ(kgf_run_eval(run, nullptr, (dir / "gone").c_str(), &table), KGF_ERR_IO);
  kgf_run_free(run);
}

TEST(CApi, RunLoadFailures) {
  TempDir dir;
  kgf_run* run = nullptr;
  EXPECT_EQ(kgf_run_load((dir / "none.json").c_str(), &run), KGF_ERR_CONFIG);
  kgforge::testing::write_file(dir / "bad.json", R"({"dataset": "d", "bogus": 1})");
  EXPECT_EQ(kgf_run_load((dir / "bad.json").c_str(), &run), KGF_ERR_CONFIG);
  EXPECT_NE(std::string(kgf_last_error()).find("bogus"), std::string::npos);
  EXPECT_EQ(kgf_write_fixtures("huge", dir.path().c_str()), KGF_ERR_INVALID_ARGUMENT);
}
