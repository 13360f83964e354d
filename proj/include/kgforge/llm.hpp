#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <filesystem>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kgforge/prompt.hpp"

namespace kgforge::llm {

struct GenerationParams {
  double temperature = 0.2;
  int max_new_tokens = 256;
  std::string model_id = "gpt-3.5-turbo-0613";

  // Throws InvalidArgument unless temperature >= 0 and max_new_tokens >= 1.
  void validate() const;

  friend bool operator==(const GenerationParams&, const GenerationParams&) = default;
};

// Content address of a request: SHA-256 over the prompt and every generation
// parameter.
std::string cache_key(std::string_view prompt, const GenerationParams& params);

struct LlmExchange {
  std::string key;
  std::string prompt;
  GenerationParams params;
  std::string response;
  std::chrono::duration<double> latency{0.0};
  std::string backend;
  std::string timestamp;  // ISO-8601 UTC; empty when unknown
};

// Fixture/cache records: one JSON object per line,
//   {"hash", "prompt", "params": {...}, "response", "backend", "latency_s", "timestamp"}
// Only hash, prompt, params and response are required when reading.
std::string to_fixture_line(const LlmExchange& exchange);
LlmExchange parse_fixture_line(std::string_view line);
// Missing file reads as an empty fixture.
std::vector<LlmExchange> read_fixture(const std::filesystem::path& path);

// Thread-safe appender for fixture files.
class FixtureWriter {
 public:
  explicit FixtureWriter(std::filesystem::path path);
  void append(const LlmExchange& exchange);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::mutex mu_;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string name() const = 0;
  // Produces a response for one prompt. Implementations must be safe to call
  // from several threads.
  virtual LlmExchange complete(const std::string& prompt, const GenerationParams& params) = 0;
};

// Serves responses from a recorded fixture. Never touches the network.
class ReplayBackend final : public Backend {
 public:
  explicit ReplayBackend(const std::filesystem::path& fixture);
  explicit ReplayBackend(std::vector<LlmExchange> records);

  std::string name() const override { return "replay"; }
  LlmExchange complete(const std::string& prompt, const GenerationParams& params) override;
  std::size_t size() const { return records_.size(); }

 private:
  std::unordered_map<std::string, LlmExchange> records_;
};

struct RetryPolicy {
  int max_attempts = 4;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
  std::chrono::milliseconds max_backoff{30000};

  std::chrono::milliseconds backoff_for(int attempt) const;
};

struct HttpConfig {
  std::string endpoint;  // full URL of the chat-completion route
  std::string api_key;   // sent as a bearer token when non-empty
  int concurrency_limit = 4;
  RetryPolicy retry;
  std::chrono::seconds timeout{120};
};

// Chat-completion client:
//   request  {model, messages: [{role: "user", content}], temperature, max_tokens}
//   response choices[0].message.content
class HttpBackend final : public Backend {
 public:
  explicit HttpBackend(HttpConfig config);
  ~HttpBackend() override;

  std::string name() const override { return "http"; }
  LlmExchange complete(const std::string& prompt, const GenerationParams& params) override;
  std::size_t requests_sent() const { return requests_sent_.load(); }

 private:
  struct Url {
    std::string scheme_host_port;
    std::string path;
  };
  static Url split_url(const std::string& endpoint);

  HttpConfig config_;
  Url url_;
  std::mutex slots_mu_;
  std::condition_variable slots_cv_;
  int free_slots_;
  std::atomic<std::size_t> requests_sent_{0};
};

// Wraps another backend and appends every exchange it produces to a fixture.
class RecordBackend final : public Backend {
 public:
  RecordBackend(std::unique_ptr<Backend> inner, std::filesystem::path fixture);

  std::string name() const override { return inner_->name(); }
  LlmExchange complete(const std::string& prompt, const GenerationParams& params) override;

 private:
  std::unique_ptr<Backend> inner_;
  FixtureWriter writer_;
};

struct GatewayOptions {
  int concurrency = 4;
  // Persistent cache in fixture format; loaded at construction, appended on
  // every miss.
  std::optional<std::filesystem::path> cache_path;
};

struct BatchItem {
  std::string key;
  std::optional<LlmExchange> exchange;
  std::string error;
  bool replay_miss = false;

  bool ok() const { return exchange.has_value(); }
};

// Content-addressed front door to a backend. Concurrent queries for the same
// key share one backend call.
class Gateway {
 public:
  explicit Gateway(std::unique_ptr<Backend> backend, GatewayOptions options = {});

  LlmExchange query(const prompt::RenderedPrompt& prompt, const GenerationParams& params);

  // Results are in input order. Failures are reported per item; successes
  // are cached.
  std::vector<BatchItem> batch_query(std::span<const prompt::RenderedPrompt> prompts,
                                     const GenerationParams& params);

  std::size_t backend_calls() const { return backend_calls_.load(); }
  std::size_t cache_size() const;
  const Backend& backend() const { return *backend_; }

 private:
  std::unique_ptr<Backend> backend_;
  GatewayOptions options_;
  std::unique_ptr<FixtureWriter> cache_writer_;
  mutable std::mutex mu_;
  std::unordered_map<std::string, LlmExchange> cache_;
  std::unordered_map<std::string, std::shared_future<LlmExchange>> in_flight_;
  std::atomic<std::size_t> backend_calls_{0};
};

struct BackendCost {
  std::size_t count = 0;
  double total_latency_s = 0.0;
  double mean_latency_s = 0.0;
};

struct CostReport {
  std::size_t count = 0;
  double total_latency_s = 0.0;
  double mean_latency_s = 0.0;
  std::map<std::string, BackendCost> per_backend;

  std::string to_json() const;
};

CostReport cost_report(std::span<const LlmExchange> exchanges);

}  // namespace kgforge::llm
