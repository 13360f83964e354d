#include <cctype>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "kgforge/app.hpp"
#include "kgforge/errors.hpp"

namespace kgforge::app {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + where + key + "'");
  }
}

template <typename T>
T get(const json& obj, const char* key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("key '" + where + key + "' has the wrong type");
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  return std::string(v);
}

}  // namespace

void enable_strategy(Strategies& s, std::string_view name) {
  const std::string n = lower(name);
  if (n == "e" || n == "entity") {
    s.entity = true;
  } else if (n == "r" || n == "relation") {
    s.relation = true;
  } else if (n == "s" || n == "structure") {
    s.structure = true;
  } else {
    throw ConfigError("unknown strategy '" + std::string(name) + "' (expected E, R or S)");
  }
}

RunConfig RunConfig::parse(std::string_view json_text, const fs::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(j,
                 {"dataset", "load_mode", "output_dir", "seed", "gateway", "strategies",
                  "relation_modes", "structure", "budget_tokens", "eval"},
                 "");

  RunConfig c;
  if (!j.contains("dataset")) throw ConfigError("missing key 'dataset'");
  c.dataset = resolve(base_dir, get<std::string>(j, "dataset", ""));
  c.output_dir = resolve(base_dir, j.contains("output_dir") ? get<std::string>(j, "output_dir", "")
                                                            : std::string("out"));
  if (j.contains("load_mode")) {
    const std::string m = lower(get<std::string>(j, "load_mode", ""));
    if (m == "strict") {
      c.load_mode = kg::LoadMode::kStrict;
    } else if (m == "lenient") {
      c.load_mode = kg::LoadMode::kLenient;
    } else {
      throw ConfigError("load_mode must be 'strict' or 'lenient'");
    }
  }
  if (j.contains("seed")) c.train.seed = get<std::uint64_t>(j, "seed", "");

  if (j.contains("gateway")) {
    const auto& g = j.at("gateway");
    const std::string w = "gateway.";
    if (!g.is_object()) throw ConfigError("key 'gateway' must be an object");
    reject_unknown(g,
                   {"backend", "fixture", "endpoint", "api_key", "cache", "templates",
                    "concurrency", "max_attempts", "model_id", "temperature", "max_new_tokens"},
                   w);
    auto& gs = c.gateway;
    if (g.contains("backend")) {
      const std::string b = lower(get<std::string>(g, "backend", w));
      if (b == "replay") {
        gs.backend = BackendKind::kReplay;
      } else if (b == "http") {
        gs.backend = BackendKind::kHttp;
      } else if (b == "record") {
        gs.backend = BackendKind::kRecord;
      } else {
        throw ConfigError("gateway.backend must be replay, http or record");
      }
    }
    if (g.contains("fixture")) gs.fixture = resolve(base_dir, get<std::string>(g, "fixture", w));
    if (g.contains("endpoint")) gs.endpoint = get<std::string>(g, "endpoint", w);
    if (g.contains("api_key")) gs.api_key = get<std::string>(g, "api_key", w);
    if (g.contains("cache") && !g.at("cache").is_null()) {
      gs.cache = resolve(base_dir, get<std::string>(g, "cache", w));
    }
    if (g.contains("templates") && !g.at("templates").is_null()) {
      gs.templates = resolve(base_dir, get<std::string>(g, "templates", w));
    }
    if (g.contains("concurrency")) gs.concurrency = get<int>(g, "concurrency", w);
    if (g.contains("max_attempts")) gs.max_attempts = get<int>(g, "max_attempts", w);
    if (g.contains("model_id")) {
      gs.params.model_id = get<std::string>(g, "model_id", w);
      c.model_id_set_ = true;
    }
    if (g.contains("temperature")) gs.params.temperature = get<double>(g, "temperature", w);
    if (g.contains("max_new_tokens")) gs.params.max_new_tokens = get<int>(g, "max_new_tokens", w);
  }

  if (j.contains("strategies")) {
    const auto& s = j.at("strategies");
    if (!s.is_array()) throw ConfigError("key 'strategies' must be an array");
    for (const auto& v : s) {
      if (!v.is_string()) throw ConfigError("key 'strategies' must hold strings");
      enable_strategy(c.strategies, v.get<std::string>());
    }
  }
  if (j.contains("relation_modes")) {
    const auto& m = j.at("relation_modes");
    if (!m.is_array()) throw ConfigError("key 'relation_modes' must be an array");
    c.relation_modes.clear();
    for (const auto& v : m) {
      auto mode = v.is_string() ? prompt::parse_relation_mode(v.get<std::string>()) : std::nullopt;
      if (!mode) {
        throw ConfigError("relation_modes entry " + v.dump() + " is not global, local or reverse");
      }
      c.relation_modes.push_back(*mode);
    }
  }
  if (j.contains("structure")) {
    const auto& s = j.at("structure");
    const std::string w = "structure.";
    if (!s.is_object()) throw ConfigError("key 'structure' must be an object");
    reject_unknown(s, {"k", "self_loop", "same_as_relation", "same_as_text"}, w);
    if (s.contains("k")) c.structure.k = get<std::size_t>(s, "k", w);
    if (s.contains("self_loop")) c.structure.self_loop = get<bool>(s, "self_loop", w);
    if (s.contains("same_as_relation")) {
      c.structure.same_as_relation = get<std::string>(s, "same_as_relation", w);
    }
    if (s.contains("same_as_text")) c.structure.same_as_text = get<std::string>(s, "same_as_text", w);
  }
  if (j.contains("budget_tokens")) c.budget_tokens = get<std::size_t>(j, "budget_tokens", "");

  if (j.contains("eval")) {
    const auto& e = j.at("eval");
    const std::string w = "eval.";
    if (!e.is_object()) throw ConfigError("key 'eval' must be an object");
    reject_unknown(e,
                   {"model", "dim", "epochs", "learning_rate", "margin", "negatives_per_positive",
                    "batch_size", "norm", "l2_reg", "n_seeds"},
                   w);
    auto& t = c.train;
    if (e.contains("model")) {
      try {
        t.model = eval::parse_model_kind(get<std::string>(e, "model", w));
      } catch (const InvalidArgument& err) {
        throw ConfigError(std::string("eval.model: ") + err.what());
      }
    }
    if (e.contains("dim")) t.dim = get<std::size_t>(e, "dim", w);
    if (e.contains("epochs")) t.epochs = get<std::size_t>(e, "epochs", w);
    if (e.contains("learning_rate")) t.learning_rate = get<double>(e, "learning_rate", w);
    if (e.contains("margin")) t.margin = get<double>(e, "margin", w);
    if (e.contains("negatives_per_positive")) {
      t.negatives_per_positive = get<std::size_t>(e, "negatives_per_positive", w);
    }
    if (e.contains("batch_size")) t.batch_size = get<std::size_t>(e, "batch_size", w);
    if (e.contains("norm")) {
      const std::string n = lower(get<std::string>(e, "norm", w));
      if (n == "l1") {
        t.norm = eval::Norm::kL1;
      } else if (n == "l2") {
        t.norm = eval::Norm::kL2;
      } else {
        throw ConfigError("eval.norm must be L1 or L2");
      }
    }
    if (e.contains("l2_reg")) t.l2_reg = get<double>(e, "l2_reg", w);
    if (e.contains("n_seeds")) c.n_seeds = get<std::size_t>(e, "n_seeds", w);
  }
  return c;
}

RunConfig RunConfig::load(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("cannot read config: " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  fs::path base = file.parent_path();
  if (base.empty()) base = ".";
  try {
    return parse(ss.str(), base);
  } catch (const ConfigError& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
}

void RunConfig::apply_environment() {
  if (gateway.endpoint.empty()) {
    if (auto v = env("LLM_ENDPOINT")) gateway.endpoint = *v;
  }
  if (gateway.api_key.empty()) {
    if (auto v = env("LLM_API_KEY")) gateway.api_key = *v;
  }
  if (!model_id_set_) {
    if (auto v = env("LLM_MODEL")) gateway.params.model_id = *v;
  }
}

void RunConfig::validate(bool for_enrich) const {
  if (!fs::is_directory(dataset)) throw ConfigError("dataset directory not found: " + dataset.string());
  try {
    train.validate();
    gateway.params.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  if (n_seeds < 1) throw ConfigError("eval.n_seeds must be >= 1");
  if (gateway.concurrency < 1) throw ConfigError("gateway.concurrency must be >= 1");
  if (gateway.max_attempts < 1) throw ConfigError("gateway.max_attempts must be >= 1");
  if (gateway.templates && !fs::is_regular_file(*gateway.templates)) {
    throw ConfigError("template file not found: " + gateway.templates->string());
  }
  if (!for_enrich) return;
  if (!strategies.any()) throw ConfigError("no enrichment strategy selected");
  if (strategies.relation && relation_modes.empty()) throw ConfigError("relation_modes is empty");
  if (strategies.entity && budget_tokens < 1) throw ConfigError("budget_tokens must be >= 1");
  if (strategies.structure && structure.same_as_relation.empty()) {
    throw ConfigError("structure.same_as_relation must be non-empty");
  }
  switch (gateway.backend) {
    case BackendKind::kReplay:
      if (gateway.fixture.empty()) throw ConfigError("replay backend needs gateway.fixture");
      if (!fs::is_regular_file(gateway.fixture)) {
        throw ConfigError("fixture not found: " + gateway.fixture.string());
      }
      break;
    case BackendKind::kRecord:
      if (gateway.fixture.empty()) throw ConfigError("record backend needs gateway.fixture");
      [[fallthrough]];
    case BackendKind::kHttp:
      if (gateway.endpoint.empty()) {
        throw ConfigError("http backend needs gateway.endpoint or LLM_ENDPOINT");
      }
      break;
  }
}

}  // namespace kgforge::app
