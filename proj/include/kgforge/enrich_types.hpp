#pragma once

#include <string>

namespace kgforge::enrich {

// A per-item failure inside an enrichment run. Runs never abort on these.
struct ItemError {
  std::string subject;      // entity or relation id
  std::string mode;         // relation mode, empty otherwise
  std::string prompt_hash;  // gateway cache key of the failed prompt
  std::string message;
};

}  // namespace kgforge::enrich
