#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "kgforge/errors.hpp"
#include "kgforge/hash.hpp"
#include "kgforge/llm.hpp"

namespace kgforge::llm {

void GenerationParams::validate() const {
  if (!(temperature >= 0.0)) throw InvalidArgument("temperature must be >= 0");
  if (max_new_tokens < 1) throw InvalidArgument("max_new_tokens must be >= 1");
}

std::string cache_key(std::string_view prompt, const GenerationParams& params) {
  nlohmann::json k;
  k["prompt"] = prompt;
  k["temperature"] = params.temperature;
  k["max_new_tokens"] = params.max_new_tokens;
  k["model_id"] = params.model_id;
  return sha256_hex(k.dump());
}

std::string to_fixture_line(const LlmExchange& ex) {
  nlohmann::ordered_json j;
  j["hash"] = ex.key.empty() ? cache_key(ex.prompt, ex.params) : ex.key;
  j["prompt"] = ex.prompt;
  j["params"] = {{"temperature", ex.params.temperature},
                 {"max_new_tokens", ex.params.max_new_tokens},
                 {"model_id", ex.params.model_id}};
  j["response"] = ex.response;
  j["backend"] = ex.backend;
  j["latency_s"] = ex.latency.count();
  j["timestamp"] = ex.timestamp;
  return j.dump();
}

LlmExchange parse_fixture_line(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("fixture record is not valid JSON: ") + e.what());
  }
  try {
    LlmExchange ex;
    ex.prompt = j.at("prompt").get<std::string>();
    const auto& p = j.at("params");
    ex.params.temperature = p.at("temperature").get<double>();
    ex.params.max_new_tokens = p.at("max_new_tokens").get<int>();
    ex.params.model_id = p.at("model_id").get<std::string>();
    ex.response = j.at("response").get<std::string>();
    ex.key = cache_key(ex.prompt, ex.params);
    if (j.at("hash").get<std::string>() != ex.key) {
      throw FormatError("fixture record hash does not match its prompt and params");
    }
    if (j.contains("backend")) ex.backend = j["backend"].get<std::string>();
    if (j.contains("latency_s")) ex.latency = std::chrono::duration<double>(j["latency_s"].get<double>());
    if (j.contains("timestamp")) ex.timestamp = j["timestamp"].get<std::string>();
    return ex;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("fixture record is missing a field: ") + e.what());
  }
}

std::vector<LlmExchange> read_fixture(const std::filesystem::path& path) {
  std::vector<LlmExchange> out;
  std::ifstream in(path, std::ios::binary);
  if (!in) return out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(parse_fixture_line(line));
    } catch (const FormatError& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

FixtureWriter::FixtureWriter(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path_.parent_path(), ec);
  }
}

void FixtureWriter::append(const LlmExchange& exchange) {
  std::string line = to_fixture_line(exchange);
  line += '\n';
  std::lock_guard lock(mu_);
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  if (!out) throw IoError("cannot append to fixture: " + path_.string());
  out.write(line.data(), static_cast<std::streamsize>(line.size()));
}

Gateway::Gateway(std::unique_ptr<Backend> backend, GatewayOptions options)
    : backend_(std::move(backend)), options_(std::move(options)) {
  if (!backend_) throw InvalidArgument("gateway needs a backend");
  if (options_.concurrency < 1) options_.concurrency = 1;
  if (options_.cache_path) {
    for (auto& ex : read_fixture(*options_.cache_path)) cache_.emplace(ex.key, std::move(ex));
    cache_writer_ = std::make_unique<FixtureWriter>(*options_.cache_path);
  }
}

LlmExchange Gateway::query(const prompt::RenderedPrompt& prompt, const GenerationParams& params) {
  params.validate();
  const std::string key = cache_key(prompt.text, params);
  std::promise<LlmExchange> promise;
  {
    std::unique_lock lock(mu_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    if (auto it = in_flight_.find(key); it != in_flight_.end()) {
      auto pending = it->second;
      lock.unlock();
      return pending.get();
    }
    in_flight_.emplace(key, promise.get_future().share());
  }
  try {
    backend_calls_.fetch_add(1);
    LlmExchange ex = backend_->complete(prompt.text, params);
    ex.key = key;
    if (cache_writer_) cache_writer_->append(ex);
    {
      std::lock_guard lock(mu_);
      cache_.emplace(key, ex);
      in_flight_.erase(key);
    }
    promise.set_value(ex);
    return ex;
  } catch (...) {
    {
      std::lock_guard lock(mu_);
      in_flight_.erase(key);
    }
    promise.set_exception(std::current_exception());
    throw;
  }
}

std::vector<BatchItem> Gateway::batch_query(std::span<const prompt::RenderedPrompt> prompts,
                                            const GenerationParams& params) {
  params.validate();
  std::vector<BatchItem> out(prompts.size());
  std::unordered_map<std::string, std::size_t> first_of;
  std::vector<std::size_t> unique;
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    out[i].key = cache_key(prompts[i].text, params);
    if (first_of.emplace(out[i].key, i).second) unique.push_back(i);
  }

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t j = next.fetch_add(1); j < unique.size(); j = next.fetch_add(1)) {
      const std::size_t i = unique[j];
      try {
        out[i].exchange = query(prompts[i], params);
      } catch (const ReplayMissError& e) {
        out[i].error = e.what();
        out[i].replay_miss = true;
      } catch (const std::exception& e) {
        out[i].error = e.what();
      }
    }
  };
  const std::size_t n_workers =
      std::min<std::size_t>(static_cast<std::size_t>(options_.concurrency), unique.size());
  if (n_workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> workers;
    for (std::size_t w = 0; w < n_workers; ++w) workers.emplace_back(work);
  }

  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::size_t first = first_of.at(out[i].key);
    if (first != i) out[i] = out[first];
  }
  return out;
}

std::size_t Gateway::cache_size() const {
  std::lock_guard lock(mu_);
  return cache_.size();
}

CostReport cost_report(std::span<const LlmExchange> exchanges) {
  CostReport r;
  for (const auto& ex : exchanges) {
    ++r.count;
    r.total_latency_s += ex.latency.count();
    auto& b = r.per_backend[ex.backend];
    ++b.count;
    b.total_latency_s += ex.latency.count();
  }
  if (r.count > 0) r.mean_latency_s = r.total_latency_s / static_cast<double>(r.count);
  for (auto& [_, b] : r.per_backend) {
    b.mean_latency_s = b.total_latency_s / static_cast<double>(b.count);
  }
  return r;
}

std::string CostReport::to_json() const {
  nlohmann::ordered_json j;
  j["count"] = count;
  j["total_latency_s"] = total_latency_s;
  j["mean_latency_s"] = mean_latency_s;
  j["per_backend"] = nlohmann::ordered_json::object();
  for (const auto& [name, b] : per_backend) {
    j["per_backend"][name] = {{"count", b.count},
                              {"total_latency_s", b.total_latency_s},
                              {"mean_latency_s", b.mean_latency_s}};
  }
  return j.dump(2);
}

}  // namespace kgforge::llm
