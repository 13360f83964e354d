#include <algorithm>
#include <fstream>
#include <mutex>
#include <ostream>

#include "kgforge/app.hpp"
#include "kgforge/bundle.hpp"
#include "kgforge/enrich_entity.hpp"
#include "kgforge/enrich_relation.hpp"
#include "kgforge/enrich_structure.hpp"
#include "kgforge/errors.hpp"

namespace kgforge::app {
namespace {

namespace fs = std::filesystem;

// Keeps a copy of every exchange the real backend produced, for the cost
// report.
class CollectingBackend final : public llm::Backend {
 public:
  CollectingBackend(std::unique_ptr<llm::Backend> inner,
                    std::shared_ptr<std::vector<llm::LlmExchange>> sink)
      : inner_(std::move(inner)), sink_(std::move(sink)) {}

  std::string name() const override { return inner_->name(); }
  llm::LlmExchange complete(const std::string& prompt, const llm::GenerationParams& params) override {
    llm::LlmExchange ex = inner_->complete(prompt, params);
    std::lock_guard lock(mu_);
    sink_->push_back(ex);
    return ex;
  }

 private:
  std::unique_ptr<llm::Backend> inner_;
  std::shared_ptr<std::vector<llm::LlmExchange>> sink_;
  std::mutex mu_;
};

std::unique_ptr<llm::Backend> make_backend(const GatewaySettings& g) {
  auto http = [&] {
    llm::HttpConfig hc;
    hc.endpoint = g.endpoint;
    hc.api_key = g.api_key;
    hc.concurrency_limit = g.concurrency;
    hc.retry.max_attempts = g.max_attempts;
    return std::make_unique<llm::HttpBackend>(std::move(hc));
  };
  switch (g.backend) {
    case BackendKind::kReplay:
      return std::make_unique<llm::ReplayBackend>(g.fixture);
    case BackendKind::kHttp:
      return http();
    case BackendKind::kRecord:
      return std::make_unique<llm::RecordBackend>(http(), g.fixture);
  }
  throw ConfigError("unknown backend");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

void tally(EnrichOutcome& o, const std::vector<enrich::ItemError>& errors) {
  o.n_errors += errors.size();
  for (const auto& e : errors) {
    if (e.message.rfind("replay miss", 0) == 0) ++o.n_replay_misses;
  }
}

kg::KnowledgeGraph load_or_throw(const fs::path& dir, kg::LoadMode mode, std::ostream* log,
                                 const char* what) {
  if (!fs::is_directory(dir)) throw IoError(std::string(what) + " not found: " + dir.string());
  auto loaded = kg::load_dataset(dir, mode);
  if (log) {
    for (const auto& w : loaded.warnings) *log << "warning: " << w << "\n";
  }
  return std::move(loaded.graph);
}

}  // namespace

EnrichOutcome run_enrich(const RunConfig& cfg, bool allow_partial, std::ostream& log) {
  cfg.validate(true);
  const kg::KnowledgeGraph kg = load_or_throw(cfg.dataset, cfg.load_mode, &log, "dataset");
  const prompt::TemplateSet templates =
      cfg.gateway.templates ? prompt::TemplateSet::load(*cfg.gateway.templates)
                            : prompt::TemplateSet::defaults();

  auto produced = std::make_shared<std::vector<llm::LlmExchange>>();
  llm::GatewayOptions opts;
  opts.concurrency = cfg.gateway.concurrency;
  opts.cache_path = cfg.gateway.cache;
  llm::Gateway gateway(std::make_unique<CollectingBackend>(make_backend(cfg.gateway), produced),
                       opts);
  const auto& params = cfg.gateway.params;

  const fs::path root = cfg.output_dir / kEnrichDir;
  EnrichOutcome out;
  auto report = [&](std::string_view kind, std::size_t items, std::size_t errors,
                    const fs::path& dir) {
    log << kind << ": " << items << " items, " << errors << " errors -> " << dir.string() << "\n";
  };

  if (cfg.strategies.entity) {
    auto b = enrich::expand_descriptions(kg, gateway, cfg.budget_tokens, params, templates);
    const fs::path dir = root / "entity";
    bundle::write_entity_bundle(b, dir);
    out.bundle_dirs.push_back(dir);
    out.n_items += b.items.size();
    tally(out, b.errors);
    report("entity", b.items.size(), b.errors.size(), dir);
  }
  if (cfg.strategies.relation) {
    auto b = enrich::describe_relations(kg, gateway, cfg.relation_modes, params, templates);
    const fs::path dir = root / "relation";
    bundle::write_relation_bundle(b, dir);
    out.bundle_dirs.push_back(dir);
    out.n_items += b.items.size();
    tally(out, b.errors);
    report("relation", b.items.size(), b.errors.size(), dir);
  }
  if (cfg.strategies.structure) {
    auto b = enrich::extract_structure(kg, gateway, cfg.structure, params, templates);
    const fs::path dir = root / "structure";
    bundle::write_structure_bundle(b, kg, dir);
    out.bundle_dirs.push_back(dir);
    out.n_items += b.triples.size();
    tally(out, b.keywords.errors);
    report("structure", b.triples.size(), b.keywords.errors.size(), dir);
  }

  // Collection order depends on thread timing; sort so the summed latencies
  // are reproducible.
  std::sort(produced->begin(), produced->end(),
            [](const llm::LlmExchange& a, const llm::LlmExchange& b) { return a.key < b.key; });
  write_text(root / "llm_cost.json", llm::cost_report(*produced).to_json() + "\n");

  if (out.n_errors > 0) {
    log << out.n_errors << " item errors";
    if (out.n_replay_misses > 0) log << " (" << out.n_replay_misses << " replay misses)";
    log << "\n";
    if (!allow_partial) out.exit_code = kExitPartial;
  }
  return out;
}

fs::path run_compose(const RunConfig& cfg, const std::vector<fs::path>& bundle_dirs,
                     const std::optional<fs::path>& out_dir, std::ostream& log) {
  cfg.validate(false);
  const kg::KnowledgeGraph base = load_or_throw(cfg.dataset, cfg.load_mode, &log, "dataset");
  for (const auto& d : bundle_dirs) {
    if (!fs::is_directory(d)) throw IoError("bundle directory not found: " + d.string());
  }
  const kg::KnowledgeGraph composed = bundle::compose(base, bundle_dirs);
  const fs::path dest = out_dir.value_or(cfg.output_dir / kComposedDir);
  kg::write_dataset(composed, dest);
  log << "composed " << bundle_dirs.size() << " bundle(s): train " << base.train().size() << " -> "
      << composed.train().size() << " triples -> " << dest.string() << "\n";
  return dest;
}

EvalOutcome run_eval(const RunConfig& cfg, const std::optional<fs::path>& base_dir,
                     const std::optional<fs::path>& augmented_dir, std::ostream& out) {
  cfg.validate(false);
  const kg::KnowledgeGraph base =
      load_or_throw(base_dir.value_or(cfg.dataset), kg::LoadMode::kStrict, nullptr, "base dataset");
  const kg::KnowledgeGraph augmented =
      load_or_throw(augmented_dir.value_or(cfg.output_dir / kComposedDir), kg::LoadMode::kStrict,
                    nullptr, "augmented dataset");

  EvalOutcome result;
  result.report = eval::ab_compare(base, augmented, cfg.train, cfg.n_seeds);
  const fs::path dir = cfg.output_dir / kEvalDir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  result.json_path = dir / "comparison.json";
  result.table_path = dir / "comparison.txt";
  const std::string table = result.report.to_table();
  write_text(result.json_path, result.report.to_json());
  write_text(result.table_path, table);
  out << table;
  return result;
}

}  // namespace kgforge::app
