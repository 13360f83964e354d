#pragma once

#include "fs_support.hpp"
#include "kgforge/graph.hpp"

namespace kgforge::testing {

// Small named graph: entities e0..e<n-1>, relations r0..r<m-1>.
inline kg::KnowledgeGraph small_graph(std::size_t n_entities, std::size_t n_relations) {
  kg::KnowledgeGraph g;
  for (std::size_t i = 0; i < n_entities; ++i) {
    auto e = g.add_entity("e" + std::to_string(i));
    g.set_entity_name(e, "entity " + std::to_string(i));
  }
  for (std::size_t r = 0; r < n_relations; ++r) {
    auto id = g.add_relation("r" + std::to_string(r));
    g.set_relation_name(id, "relation " + std::to_string(r));
  }
  return g;
}

}  // namespace kgforge::testing
