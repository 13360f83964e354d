#include <algorithm>
#include <cmath>

#include "kgforge/errors.hpp"
#include "kgforge/llm.hpp"

namespace kgforge::llm {

ReplayBackend::ReplayBackend(const std::filesystem::path& fixture) {
  if (!std::filesystem::exists(fixture)) throw IoError("missing file: " + fixture.string());
  for (auto& ex : read_fixture(fixture)) records_.insert_or_assign(ex.key, std::move(ex));
}

ReplayBackend::ReplayBackend(std::vector<LlmExchange> records) {
  for (auto& ex : records) {
    if (ex.key.empty()) ex.key = cache_key(ex.prompt, ex.params);
    records_.insert_or_assign(ex.key, std::move(ex));
  }
}

LlmExchange ReplayBackend::complete(const std::string& prompt, const GenerationParams& params) {
  std::string key = cache_key(prompt, params);
  auto it = records_.find(key);
  if (it == records_.end()) throw ReplayMissError(key);
  LlmExchange ex = it->second;
  if (ex.backend.empty()) ex.backend = name();
  return ex;
}

std::chrono::milliseconds RetryPolicy::backoff_for(int attempt) const {
  double ms = static_cast<double>(initial_backoff.count()) * std::pow(multiplier, attempt);
  ms = std::min(ms, static_cast<double>(max_backoff.count()));
  return std::chrono::milliseconds(static_cast<long long>(ms));
}

RecordBackend::RecordBackend(std::unique_ptr<Backend> inner, std::filesystem::path fixture)
    : inner_(std::move(inner)), writer_(std::move(fixture)) {
  if (!inner_) throw InvalidArgument("record backend needs an inner backend");
}

LlmExchange RecordBackend::complete(const std::string& prompt, const GenerationParams& params) {
  LlmExchange ex = inner_->complete(prompt, params);
  if (ex.key.empty()) ex.key = cache_key(prompt, params);
  writer_.append(ex);
  return ex;
}

}  // namespace kgforge::llm
