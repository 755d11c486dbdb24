#pragma once

#include "pbpp/model.hpp"

#include <vector>

namespace pbpp {

// X -> Y iff some X-rule spawns a Y. suc is the reflexive-transitive closure.
struct SuccessorGraph {
  explicit SuccessorGraph(const Pbpp &sys);

  std::size_t size() const { return edge.size(); }
  // Strongly connected components, each sorted, listed by least member.
  std::vector<std::vector<TypeId>> sccs() const;

  std::vector<std::vector<bool>> edge;
  std::vector<std::vector<bool>> suc;
};

} // namespace pbpp
