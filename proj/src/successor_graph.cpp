#include "pbpp/successor_graph.hpp"

namespace pbpp {

SuccessorGraph::SuccessorGraph(const Pbpp &sys) {
  const std::size_t n = sys.size();
  edge.assign(n, std::vector<bool>(n, false));
  for (const Rule &r : sys.rules)
    for (TypeId y = 0; y < n; ++y)
      if (r.rhs[y] > 0) edge[r.lhs][y] = true;
  suc = edge;
  for (TypeId x = 0; x < n; ++x) suc[x][x] = true;
  for (TypeId m = 0; m < n; ++m)
    for (TypeId a = 0; a < n; ++a)
      if (suc[a][m])
        for (TypeId b = 0; b < n; ++b)
          if (suc[m][b]) suc[a][b] = true;
}

std::vector<std::vector<TypeId>> SuccessorGraph::sccs() const {
  const std::size_t n = size();
  std::vector<bool> done(n, false);
  std::vector<std::vector<TypeId>> out;
  for (TypeId x = 0; x < n; ++x) {
    if (done[x]) continue;
    std::vector<TypeId> comp;
    for (TypeId y = x; y < n; ++y)
      if (suc[x][y] && suc[y][x]) {
        comp.push_back(y);
        done[y] = true;
      }
    out.push_back(std::move(comp));
  }
  return out;
}

} // namespace pbpp
