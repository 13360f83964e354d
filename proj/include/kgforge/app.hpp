#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kgforge/enrich_structure.hpp"
#include "kgforge/eval.hpp"
#include "kgforge/graph.hpp"
#include "kgforge/llm.hpp"
#include "kgforge/prompt.hpp"

namespace kgforge::app {

enum class BackendKind { kReplay, kHttp, kRecord };

struct GatewaySettings {
  BackendKind backend = BackendKind::kReplay;
  std::filesystem::path fixture;  // replay source, or record destination
  std::string endpoint;           // falls back to LLM_ENDPOINT
  std::string api_key;            // falls back to LLM_API_KEY
  std::optional<std::filesystem::path> cache;
  std::optional<std::filesystem::path> templates;
  int concurrency = 4;
  int max_attempts = 4;
  llm::GenerationParams params;  // model_id falls back to LLM_MODEL
};

struct Strategies {
  bool entity = false;
  bool relation = false;
  bool structure = false;

  bool any() const { return entity || relation || structure; }
};

// "E", "R", "S" (any case) or "entity", "relation", "structure".
// Throws ConfigError on anything else.
void enable_strategy(Strategies& s, std::string_view name);

// Run description loaded from one JSON file. Relative paths are resolved
// against the directory holding the file.
struct RunConfig {
  std::filesystem::path dataset;
  kg::LoadMode load_mode = kg::LoadMode::kStrict;
  std::filesystem::path output_dir;
  GatewaySettings gateway;
  Strategies strategies;
  std::vector<prompt::RelationMode> relation_modes{
      prompt::RelationMode::kGlobal, prompt::RelationMode::kLocal, prompt::RelationMode::kReverse};
  enrich::StructureConfig structure;
  std::size_t budget_tokens = 70;
  eval::TrainConfig train;
  std::size_t n_seeds = 5;

  // Throws ConfigError with the offending key in the message.
  static RunConfig parse(std::string_view json_text, const std::filesystem::path& base_dir);
  static RunConfig load(const std::filesystem::path& file);

  // Fills gateway endpoint, key and model from the environment where the
  // config left them unset.
  void apply_environment();

  // Paths exist, numbers are in range, and for enrichment at least one
  // strategy is selected and the backend has what it needs.
  void validate(bool for_enrich) const;

 private:
  bool model_id_set_ = false;
};

// Exit codes shared by the CLI and the C API.
inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;
inline constexpr int kExitUsage = 2;

inline constexpr std::string_view kEnrichDir = "enrich";
inline constexpr std::string_view kComposedDir = "composed";
inline constexpr std::string_view kEvalDir = "eval";

struct EnrichOutcome {
  int exit_code = kExitOk;
  std::vector<std::filesystem::path> bundle_dirs;
  std::size_t n_items = 0;
  std::size_t n_errors = 0;
  std::size_t n_replay_misses = 0;
};

// Writes one bundle per selected strategy under <output_dir>/enrich plus
// llm_cost.json. Exit code 1 when any item failed unless allow_partial.
EnrichOutcome run_enrich(const RunConfig& cfg, bool allow_partial, std::ostream& log);

// Composes `bundle_dirs` onto the configured dataset and writes the result
// to `out_dir` (default <output_dir>/composed).
std::filesystem::path run_compose(const RunConfig& cfg,
                                  const std::vector<std::filesystem::path>& bundle_dirs,
                                  const std::optional<std::filesystem::path>& out_dir,
                                  std::ostream& log);

struct EvalOutcome {
  eval::ComparisonReport report;
  std::filesystem::path json_path;
  std::filesystem::path table_path;
};

// A/B evaluation of `base_dir` (default: the configured dataset) against
// `augmented_dir` (default <output_dir>/composed). Writes comparison.json and
// comparison.txt under <output_dir>/eval and prints the table to `out`.
EvalOutcome run_eval(const RunConfig& cfg, const std::optional<std::filesystem::path>& base_dir,
                     const std::optional<std::filesystem::path>& augmented_dir, std::ostream& out);

// ---------------------------------------------------------------------------
// Bundled fixtures
// ---------------------------------------------------------------------------

// 8 entities, 3 relations, 12/2/2 triples, with names and descriptions.
kg::KnowledgeGraph toy_graph();
// Authored responses for every entity, relation (all three modes) and
// keyword prompt of toy_graph() under the default templates and params.
std::vector<llm::LlmExchange> toy_fixture();

struct SyntheticSpec {
  std::size_t n_entities = 60;
  std::size_t n_alias_pairs = 5;
  std::size_t neighbors_per_alias = 8;  // split evenly between the two aliases
  std::size_t background_per_entity = 3;
  std::size_t n_relations = 4;
  std::uint64_t seed = 42;
};

// Alias pairs (e00,e01), (e02,e03), ... stand for one underlying entity
// whose neighborhood is split between them. Test and valid ask for an
// alias's links that only its partner has in train. Alias partners share a
// description; every other entity has its own.
kg::KnowledgeGraph synthetic_alias_graph(const SyntheticSpec& spec = {});
// Keyword responses for synthetic_alias_graph(): partners get identical
// keyword sets, every other entity a unique disjoint one.
std::vector<llm::LlmExchange> synthetic_fixture(const kg::KnowledgeGraph& kg);

enum class FixtureKind { kToy, kSynthetic };

// Writes <dir>/dataset, <dir>/fixture.jsonl and <dir>/run.json.
void write_fixture_set(FixtureKind kind, const std::filesystem::path& dir);

}  // namespace kgforge::app
