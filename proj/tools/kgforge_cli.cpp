// kgforge command-line front end. Talks to the library only through the C
// API in kgforge/kgforge.h.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kgforge/kgforge.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

int report(kgf_status st) {
  std::cerr << "kgforge: " << kgf_status_name(st) << ": " << kgf_last_error() << "\n";
  return st == KGF_ERR_CONFIG || st == KGF_ERR_INVALID_ARGUMENT ? kExitUsage : kExitFailure;
}

void print_and_free(char* s, std::ostream& os) {
  if (s) {
    os << s;
    kgf_string_free(s);
  }
}

struct RunHandle {
  kgf_run* run = nullptr;
  ~RunHandle() { kgf_run_free(run); }
};

// Applies "key=value" overrides after the config is loaded.
kgf_status apply_overrides(kgf_run* run, const std::vector<std::pair<std::string, std::string>>& overrides) {
  for (const auto& [k, v] : overrides) {
    kgf_status st = kgf_run_set(run, k.c_str(), v.c_str());
    if (st != KGF_OK) return st;
  }
  return KGF_OK;
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += ',';
    out += p;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kgforge: LLM-driven knowledge graph enrichment and KGC evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kgf_version()));

  // stats
  auto* stats = app.add_subcommand("stats", "Print dataset statistics");
  std::string stats_dir;
  bool stats_lenient = false, stats_json = false;
  stats->add_option("dataset", stats_dir, "Dataset directory")->required();
  stats->add_flag("--lenient", stats_lenient, "Drop dangling triples instead of failing");
  stats->add_flag("--json", stats_json, "Print JSON");

  // enrich / fixtures record share these
  std::string config;
  std::vector<std::string> strategies;
  std::optional<std::size_t> k;
  std::optional<bool> self_loop;
  std::optional<std::string> output_dir, fixture, relation_modes;
  std::optional<std::size_t> budget;
  bool allow_partial = false;
  auto add_enrich_options = [&](CLI::App* cmd) {
    cmd->add_option("--config", config, "Run config (JSON)")->required();
    cmd->add_option("--strategy", strategies, "E, R and/or S; overrides the config")
        ->delimiter(',');
    cmd->add_option("--k", k, "Partners kept per entity for S");
    cmd->add_flag("--self-loop,!--no-self-loop", self_loop, "Append (e, SameAs, e) triples");
    cmd->add_option("--relation-modes", relation_modes, "Subset of global,local,reverse");
    cmd->add_option("--budget", budget, "Entity text budget in tokens");
    cmd->add_option("--output", output_dir, "Output directory");
    cmd->add_option("--fixture", fixture, "Fixture file");
    cmd->add_flag("--allow-partial", allow_partial, "Exit 0 even when some items failed");
  };

  auto* enrich = app.add_subcommand("enrich", "Run enrichment strategies and write bundles");
  add_enrich_options(enrich);

  // compose
  auto* compose = app.add_subcommand("compose", "Apply bundles to the base dataset");
  std::vector<std::string> bundles;
  std::optional<std::string> compose_out;
  compose->add_option("--config", config, "Run config (JSON)")->required();
  compose->add_option("--bundle", bundles, "Bundle directory (repeatable)");
  compose->add_option("--out", compose_out, "Output dataset directory");
  compose->add_option("--output", output_dir, "Run output directory");

  // eval
  auto* evalc = app.add_subcommand("eval", "A/B link prediction on base vs. augmented dataset");
  std::optional<std::string> base_dir, aug_dir;
  std::optional<std::size_t> n_seeds, epochs, dim;
  std::optional<std::string> model;
  evalc->add_option("--config", config, "Run config (JSON)")->required();
  evalc->add_option("--base", base_dir, "Base dataset (default: config dataset)");
  evalc->add_option("--augmented", aug_dir, "Augmented dataset (default: <output>/composed)");
  evalc->add_option("--seeds", n_seeds, "Number of seeds");
  evalc->add_option("--epochs", epochs, "Training epochs");
  evalc->add_option("--dim", dim, "Embedding dimension");
  evalc->add_option("--model", model, "TransE or DistMult");
  evalc->add_option("--output", output_dir, "Run output directory");

  // fixtures
  auto* fixtures = app.add_subcommand("fixtures", "Generate bundled datasets or record fixtures");
  fixtures->require_subcommand(1);
  std::string fixture_dir;
  auto* toy = fixtures->add_subcommand("toy", "8-entity toy dataset with authored fixture");
  toy->add_option("--out", fixture_dir, "Destination directory")->required();
  auto* synthetic = fixtures->add_subcommand("synthetic", "60-entity alias dataset with fixture");
  synthetic->add_option("--out", fixture_dir, "Destination directory")->required();
  auto* record = fixtures->add_subcommand("record", "Enrich against a live endpoint, appending to the fixture");
  add_enrich_options(record);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (stats->parsed()) {
    kgf_graph* g = nullptr;
    kgf_status st = kgf_graph_load(stats_dir.c_str(), stats_lenient ? 1 : 0, &g);
    if (st != KGF_OK) return report(st);
    size_t n_warn = 0;
    kgf_graph_warning_count(g, &n_warn);
    for (size_t i = 0; i < n_warn; ++i) {
      char* w = nullptr;
      if (kgf_graph_warning(g, i, &w) == KGF_OK) {
        std::cerr << "warning: " << w << "\n";
        kgf_string_free(w);
      }
    }
    kgf_stats s{};
    kgf_graph_stats(g, &s);
    kgf_graph_free(g);
    if (stats_json) {
      std::printf("{\"entities\": %zu, \"relations\": %zu, \"train\": %zu, \"valid\": %zu, \"test\": %zu}\n",
                  s.n_entities, s.n_relations, s.n_train, s.n_valid, s.n_test);
    } else {
      std::printf("entities\t%zu\nrelations\t%zu\ntrain\t%zu\nvalid\t%zu\ntest\t%zu\n", s.n_entities,
                  s.n_relations, s.n_train, s.n_valid, s.n_test);
    }
    return kExitOk;
  }

  if (toy->parsed() || synthetic->parsed()) {
    kgf_status st = kgf_write_fixtures(toy->parsed() ? "toy" : "synthetic", fixture_dir.c_str());
    if (st != KGF_OK) return report(st);
    std::cout << "wrote " << fixture_dir << "\n";
    return kExitOk;
  }

  RunHandle h;
  kgf_status st = kgf_run_load(config.c_str(), &h.run);
  if (st != KGF_OK) return report(st);

  std::vector<std::pair<std::string, std::string>> overrides;
  if (output_dir) overrides.emplace_back("output_dir", *output_dir);

  if (enrich->parsed() || record->parsed()) {
    if (!strategies.empty()) overrides.emplace_back("strategies", join(strategies));
    if (k) overrides.emplace_back("k", std::to_string(*k));
    if (self_loop) overrides.emplace_back("self_loop", *self_loop ? "1" : "0");
    if (relation_modes) overrides.emplace_back("relation_modes", *relation_modes);
    if (budget) overrides.emplace_back("budget_tokens", std::to_string(*budget));
    if (fixture) overrides.emplace_back("fixture", *fixture);
    if (record->parsed()) overrides.emplace_back("backend", "record");
    if ((st = apply_overrides(h.run, overrides)) != KGF_OK) return report(st);
    int exit_code = kExitOk;
    char* log = nullptr;
    st = kgf_run_enrich(h.run, allow_partial ? 1 : 0, &exit_code, &log);
    print_and_free(log, std::cout);
    if (st != KGF_OK) return report(st);
    return exit_code;
  }

  if (compose->parsed()) {
    if ((st = apply_overrides(h.run, overrides)) != KGF_OK) return report(st);
    std::vector<const char*> dirs;
    for (const auto& b : bundles) dirs.push_back(b.c_str());
    char* log = nullptr;
    st = kgf_run_compose(h.run, dirs.data(), dirs.size(), compose_out ? compose_out->c_str() : nullptr,
                         &log);
    print_and_free(log, std::cout);
    return st == KGF_OK ? kExitOk : report(st);
  }

  if (evalc->parsed()) {
    if (n_seeds) overrides.emplace_back("n_seeds", std::to_string(*n_seeds));
    if (epochs) overrides.emplace_back("epochs", std::to_string(*epochs));
    if (dim) overrides.emplace_back("dim", std::to_string(*dim));
    if (model) overrides.emplace_back("model", *model);
    if ((st = apply_overrides(h.run, overrides)) != KGF_OK) return report(st);
    char* table = nullptr;
    st = kgf_run_eval(h.run, base_dir ? base_dir->c_str() : nullptr,
                      aug_dir ? aug_dir->c_str() : nullptr, &table);
    if (st != KGF_OK) return report(st);
    print_and_free(table, std::cout);
    return kExitOk;
  }
  return kExitUsage;
}
