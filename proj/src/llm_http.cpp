#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include <ctime>
#include <thread>

#include "json.hpp"
#include "kgforge/errors.hpp"
#include "kgforge/llm.hpp"

namespace kgforge::llm {
namespace {

std::string utc_timestamp() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

bool transient_status(int status) {
  return status == 408 || status == 429 || status == 500 || status == 502 || status == 503 ||
         status == 504;
}

}  // namespace

HttpBackend::Url HttpBackend::split_url(const std::string& endpoint) {
  auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("LLM endpoint must be an http(s) URL: " + endpoint);
  }
  std::string scheme = endpoint.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw ConfigError("LLM endpoint must be an http(s) URL: " + endpoint);
  }
  auto path_start = endpoint.find('/', scheme_end + 3);
  Url url;
  if (path_start == std::string::npos) {
    url.scheme_host_port = endpoint;
    url.path = "/v1/chat/completions";
  } else {
    url.scheme_host_port = endpoint.substr(0, path_start);
    url.path = endpoint.substr(path_start);
  }
  return url;
}

HttpBackend::HttpBackend(HttpConfig config)
    : config_(std::move(config)),
      url_(split_url(config_.endpoint)),
      free_slots_(std::max(1, config_.concurrency_limit)) {
  if (config_.retry.max_attempts < 1) config_.retry.max_attempts = 1;
}

HttpBackend::~HttpBackend() = default;

LlmExchange HttpBackend::complete(const std::string& prompt, const GenerationParams& params) {
  {
    std::unique_lock lock(slots_mu_);
    slots_cv_.wait(lock, [&] { return free_slots_ > 0; });
    --free_slots_;
  }
  struct SlotRelease {
    HttpBackend* self;
    ~SlotRelease() {
      {
        std::lock_guard lock(self->slots_mu_);
        ++self->free_slots_;
      }
      self->slots_cv_.notify_one();
    }
  } release{this};

  nlohmann::json body = {
      {"model", params.model_id},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
      {"temperature", params.temperature},
      {"max_tokens", params.max_new_tokens},
  };
  const std::string payload = body.dump();
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  std::string last_error;
  const auto started = std::chrono::steady_clock::now();
  for (int attempt = 0; attempt < config_.retry.max_attempts; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(config_.retry.backoff_for(attempt - 1));
    httplib::Client client(url_.scheme_host_port);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    client.set_write_timeout(config_.timeout);
    requests_sent_.fetch_add(1);
    auto res = client.Post(url_.path, headers, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (transient_status(res->status)) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw LlmError("LLM request failed with HTTP " + std::to_string(res->status) + ": " +
                     res->body.substr(0, 200));
    }
    std::string content;
    try {
      auto doc = nlohmann::json::parse(res->body);
      content = doc.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw LlmError(std::string("malformed LLM response body: ") + e.what());
    }
    LlmExchange ex;
    ex.key = cache_key(prompt, params);
    ex.prompt = prompt;
    ex.params = params;
    ex.response = std::move(content);
    ex.latency = std::chrono::steady_clock::now() - started;
    ex.backend = name();
    ex.timestamp = utc_timestamp();
    return ex;
  }
  throw LlmError("LLM request failed after " + std::to_string(config_.retry.max_attempts) +
                 " attempts: " + last_error);
}

}  // namespace kgforge::llm
