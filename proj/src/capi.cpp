#include "kgforge/kgforge.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <sstream>

#include "kgforge/app.hpp"
#include "kgforge/enrich_structure.hpp"
#include "kgforge/errors.hpp"
#include "kgforge/graph.hpp"
#include "kgforge/prompt.hpp"

struct kgf_graph {
  kgforge::kg::KnowledgeGraph graph;
  std::vector<std::string> warnings;
};

struct kgf_run {
  kgforge::app::RunConfig config;
};

namespace {

thread_local std::string g_last_error;

kgf_status fail(kgf_status status, const char* message) {
  g_last_error = message;
  return status;
}

template <typename Fn>
kgf_status guarded(Fn&& fn) {
  using namespace kgforge;
  try {
    g_last_error.clear();
    fn();
    return KGF_OK;
  } catch (const ReplayMissError& e) {
    return fail(KGF_ERR_REPLAY_MISS, e.what());
  } catch (const LlmError& e) {
    return fail(KGF_ERR_LLM, e.what());
  } catch (const IoError& e) {
    return fail(KGF_ERR_IO, e.what());
  } catch (const FormatError& e) {
    return fail(KGF_ERR_FORMAT, e.what());
  } catch (const DanglingReferenceError& e) {
    return fail(KGF_ERR_DANGLING_REFERENCE, e.what());
  } catch (const ConfigError& e) {
    return fail(KGF_ERR_CONFIG, e.what());
  } catch (const InvalidArgument& e) {
    return fail(KGF_ERR_INVALID_ARGUMENT, e.what());
  } catch (const FingerprintMismatch& e) {
    return fail(KGF_ERR_FINGERPRINT_MISMATCH, e.what());
  } catch (const TrainingError& e) {
    return fail(KGF_ERR_TRAINING, e.what());
  } catch (const std::bad_alloc&) {
    return fail(KGF_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(KGF_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(KGF_ERR_INTERNAL, "unknown error");
  }
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(const void* p, const char* what) {
  if (!p) throw kgforge::InvalidArgument(std::string(what) + " must not be NULL");
}

std::size_t to_size(const std::string& v, const std::string& key) {
  std::size_t pos = 0;
  unsigned long long n = 0;
  try {
    n = std::stoull(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size() || v.empty() || v[0] == '-') {
    throw kgforge::ConfigError("'" + key + "' expects a non-negative integer, got '" + v + "'");
  }
  return static_cast<std::size_t>(n);
}

double to_double(const std::string& v, const std::string& key) {
  std::size_t pos = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size() || v.empty()) {
    throw kgforge::ConfigError("'" + key + "' expects a number, got '" + v + "'");
  }
  return d;
}

bool to_bool(const std::string& v, const std::string& key) {
  if (v == "1" || v == "true" || v == "on") return true;
  if (v == "0" || v == "false" || v == "off") return false;
  throw kgforge::ConfigError("'" + key + "' expects 0/1, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : v) {
    if (c == ',' || c == ' ') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

void set_option(kgforge::app::RunConfig& c, const std::string& key, const std::string& v) {
  using namespace kgforge;
  if (key == "dataset") {
    c.dataset = v;
  } else if (key == "output_dir") {
    c.output_dir = v;
  } else if (key == "strategies") {
    c.strategies = {};
    auto parts = split_list(v);
    // "ERS" style: one letter per strategy.
    if (parts.size() == 1 && parts[0].size() > 1 && parts[0].size() <= 3 &&
        parts[0].find_first_not_of("ERSers") == std::string::npos) {
      for (char ch : parts[0]) app::enable_strategy(c.strategies, std::string(1, ch));
    } else {
      for (const auto& p : parts) app::enable_strategy(c.strategies, p);
    }
  } else if (key == "relation_modes") {
    c.relation_modes.clear();
    for (const auto& p : split_list(v)) {
      auto m = prompt::parse_relation_mode(p);
      if (!m) throw ConfigError("unknown relation mode '" + p + "'");
      c.relation_modes.push_back(*m);
    }
  } else if (key == "k") {
    c.structure.k = to_size(v, key);
  } else if (key == "self_loop") {
    c.structure.self_loop = to_bool(v, key);
  } else if (key == "budget_tokens") {
    c.budget_tokens = to_size(v, key);
  } else if (key == "backend") {
    if (v == "replay") {
      c.gateway.backend = app::BackendKind::kReplay;
    } else if (v == "http") {
      c.gateway.backend = app::BackendKind::kHttp;
    } else if (v == "record") {
      c.gateway.backend = app::BackendKind::kRecord;
    } else {
      throw ConfigError("backend must be replay, http or record");
    }
  } else if (key == "fixture") {
    c.gateway.fixture = v;
  } else if (key == "endpoint") {
    c.gateway.endpoint = v;
  } else if (key == "model_id") {
    c.gateway.params.model_id = v;
  } else if (key == "concurrency") {
    c.gateway.concurrency = static_cast<int>(to_size(v, key));
  } else if (key == "seed") {
    c.train.seed = to_size(v, key);
  } else if (key == "n_seeds") {
    c.n_seeds = to_size(v, key);
  } else if (key == "model") {
    try {
      c.train.model = eval::parse_model_kind(v);
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
  } else if (key == "dim") {
    c.train.dim = to_size(v, key);
  } else if (key == "epochs") {
    c.train.epochs = to_size(v, key);
  } else if (key == "learning_rate") {
    c.train.learning_rate = to_double(v, key);
  } else if (key == "margin") {
    c.train.margin = to_double(v, key);
  } else if (key == "batch_size") {
    c.train.batch_size = to_size(v, key);
  } else {
    throw ConfigError("unknown setting '" + key + "'");
  }
}

}  // namespace

extern "C" {

const char* kgf_version(void) { return "0.1.0"; }

const char* kgf_status_name(kgf_status status) {
  switch (status) {
    case KGF_OK: return "ok";
    case KGF_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case KGF_ERR_IO: return "io";
    case KGF_ERR_FORMAT: return "format";
    case KGF_ERR_DANGLING_REFERENCE: return "dangling_reference";
    case KGF_ERR_CONFIG: return "config";
    case KGF_ERR_LLM: return "llm";
    case KGF_ERR_REPLAY_MISS: return "replay_miss";
    case KGF_ERR_FINGERPRINT_MISMATCH: return "fingerprint_mismatch";
    case KGF_ERR_TRAINING: return "training";
    case KGF_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* kgf_last_error(void) { return g_last_error.c_str(); }

void kgf_string_free(char* s) { std::free(s); }

kgf_status kgf_graph_load(const char* root, int lenient, kgf_graph** out) {
  return guarded([&] {
    require(root, "root");
    require(out, "out");
    *out = nullptr;
    auto loaded = kgforge::kg::load_dataset(
        root, lenient ? kgforge::kg::LoadMode::kLenient : kgforge::kg::LoadMode::kStrict);
    *out = new kgf_graph{std::move(loaded.graph), std::move(loaded.warnings)};
  });
}

void kgf_graph_free(kgf_graph* graph) { delete graph; }

kgf_status kgf_graph_stats(const kgf_graph* graph, kgf_stats* out) {
  return guarded([&] {
    require(graph, "graph");
    require(out, "out");
    const auto s = kgforge::kg::dataset_stats(graph->graph);
    *out = {s.n_entities, s.n_relations, s.n_train, s.n_valid, s.n_test};
  });
}

kgf_status kgf_graph_warning_count(const kgf_graph* graph, size_t* out) {
  return guarded([&] {
    require(graph, "graph");
    require(out, "out");
    *out = graph->warnings.size();
  });
}

kgf_status kgf_graph_warning(const kgf_graph* graph, size_t index, char** out) {
  return guarded([&] {
    require(graph, "graph");
    require(out, "out");
    if (index >= graph->warnings.size()) throw kgforge::InvalidArgument("warning index out of range");
    *out = dup(graph->warnings[index]);
  });
}

kgf_status kgf_graph_fingerprint(const kgf_graph* graph, char** out) {
  return guarded([&] {
    require(graph, "graph");
    require(out, "out");
    *out = dup(kgforge::kg::dataset_fingerprint(graph->graph));
  });
}

kgf_status kgf_graph_write(const kgf_graph* graph, const char* root) {
  return guarded([&] {
    require(graph, "graph");
    require(root, "root");
    kgforge::kg::write_dataset(graph->graph, root);
  });
}

kgf_status kgf_render_prompt(const char* strategy, const char* value, char** out) {
  return guarded([&] {
    require(strategy, "strategy");
    require(value, "value");
    require(out, "out");
    const auto& t = kgforge::prompt::TemplateSet::defaults();
    if (!t.contains(strategy)) {
      throw kgforge::InvalidArgument(std::string("unknown strategy: ") + strategy);
    }
    *out = dup(t.render(strategy, value).text);
  });
}

kgf_status kgf_parse_keywords(const char* raw, char** out) {
  return guarded([&] {
    require(raw, "raw");
    require(out, "out");
    const auto ks = kgforge::enrich::parse_keywords(raw);
    std::string joined;
    for (const auto& k : ks.keywords) joined += k + "\n";
    *out = dup(joined);
  });
}

kgf_status kgf_match_score(const char* const* head, size_t n_head, const char* const* tail,
                           size_t n_tail, double* out) {
  return guarded([&] {
    require(out, "out");
    if (n_head > 0) require(head, "head");
    if (n_tail > 0) require(tail, "tail");
    std::vector<std::string> h, t;
    for (size_t i = 0; i < n_head; ++i) {
      require(head[i], "head keyword");
      h.emplace_back(head[i]);
    }
    for (size_t i = 0; i < n_tail; ++i) {
      require(tail[i], "tail keyword");
      t.emplace_back(tail[i]);
    }
    *out = kgforge::enrich::match_score(kgforge::enrich::make_keyword_set("head", h),
                                        kgforge::enrich::make_keyword_set("tail", t))
               .score;
  });
}

kgf_status kgf_run_load(const char* config_path, kgf_run** out) {
  return guarded([&] {
    require(config_path, "config_path");
    require(out, "out");
    *out = nullptr;
    auto cfg = kgforge::app::RunConfig::load(config_path);
    cfg.apply_environment();
    *out = new kgf_run{std::move(cfg)};
  });
}

void kgf_run_free(kgf_run* run) { delete run; }

kgf_status kgf_run_set(kgf_run* run, const char* key, const char* value) {
  return guarded([&] {
    require(run, "run");
    require(key, "key");
    require(value, "value");
    // A rejected value leaves the run untouched.
    auto updated = run->config;
    set_option(updated, key, value);
    run->config = std::move(updated);
  });
}

kgf_status kgf_run_enrich(kgf_run* run, int allow_partial, int* exit_code, char** log) {
  std::ostringstream text;
  kgf_status st = guarded([&] {
    require(run, "run");
    require(exit_code, "exit_code");
    *exit_code = kgforge::app::run_enrich(run->config, allow_partial != 0, text).exit_code;
  });
  if (log) *log = dup(text.str());
  return st;
}

kgf_status kgf_run_compose(kgf_run* run, const char* const* bundle_dirs, size_t n_bundles,
                           const char* out_dir, char** log) {
  std::ostringstream text;
  kgf_status st = guarded([&] {
    require(run, "run");
    if (n_bundles > 0) require(bundle_dirs, "bundle_dirs");
    std::vector<std::filesystem::path> dirs;
    for (size_t i = 0; i < n_bundles; ++i) {
      require(bundle_dirs[i], "bundle dir");
      dirs.emplace_back(bundle_dirs[i]);
    }
    std::optional<std::filesystem::path> dest;
    if (out_dir) dest = out_dir;
    kgforge::app::run_compose(run->config, dirs, dest, text);
  });
  if (log) *log = dup(text.str());
  return st;
}

kgf_status kgf_run_eval(kgf_run* run, const char* base_dir, const char* augmented_dir,
                        char** table) {
  return guarded([&] {
    require(run, "run");
    std::optional<std::filesystem::path> base, aug;
    if (base_dir) base = base_dir;
    if (augmented_dir) aug = augmented_dir;
    std::ostringstream text;
    kgforge::app::run_eval(run->config, base, aug, text);
    if (table) *table = dup(text.str());
  });
}

kgf_status kgf_write_fixtures(const char* kind, const char* dir) {
  return guarded([&] {
    require(kind, "kind");
    require(dir, "dir");
    const std::string k = kind;
    kgforge::app::FixtureKind fk;
    if (k == "toy") {
      fk = kgforge::app::FixtureKind::kToy;
    } else if (k == "synthetic") {
      fk = kgforge::app::FixtureKind::kSynthetic;
    } else {
      throw kgforge::InvalidArgument("fixture kind must be toy or synthetic");
    }
    kgforge::app::write_fixture_set(fk, dir);
  });
}

}  // extern "C"
