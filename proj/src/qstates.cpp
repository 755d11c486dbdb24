#include "pbpp/qstates.hpp"

#include "pbpp/successor_graph.hpp"

namespace pbpp {

std::optional<QSet> as_qset(const UpSet &f) {
  QSet q(f.dim(), false);
  for (const Vec &b : f.basis()) {
    if (wp(b) != 1) return std::nullopt;
    for (TypeId x = 0; x < b.size(); ++x)
      if (b[x]) q[x] = true;
  }
  return q;
}

UpSet qset_upset(const QSet &q) {
  std::vector<Vec> vs;
  for (TypeId x = 0; x < q.size(); ++x)
    if (q[x]) vs.push_back(unit(q.size(), x));
  return UpSet::minimize(q.size(), std::move(vs));
}

std::vector<bool> q_prime(const Pbpp &sys, const QSet &q) {
  SuccessorGraph g(sys);
  std::vector<bool> out(sys.size(), false);
  for (TypeId x = 0; x < sys.size(); ++x)
    for (TypeId y = 0; y < sys.size(); ++y)
      if (g.suc[x][y] && q[y]) out[x] = true;
  return out;
}

std::vector<bool> nullable_types(const Pbpp &sys, const QSet &q) {
  const std::size_t n = sys.size();
  if (q.size() != n) throw Error("type set does not match the alphabet");
  auto qp = q_prime(sys, q);
  std::vector<const Rule *> kept;
  for (const Rule &r : sys.rules) {
    if (q[r.lhs] || !qp[r.lhs]) continue;
    bool touches = false;
    for (TypeId y = 0; y < n; ++y) touches = touches || (r.rhs[y] > 0 && q[y]);
    if (!touches) kept.push_back(&r);
  }
  // Types outside Q' get X -> ε.
  std::vector<bool> nullable(n, false);
  for (TypeId x = 0; x < n; ++x)
    if (!qp[x]) nullable[x] = true;
  for (bool changed = true; changed;) {
    changed = false;
    for (const Rule *r : kept) {
      if (nullable[r->lhs]) continue;
      bool all = true;
      for (TypeId y = 0; y < n && all; ++y) all = r->rhs[y] == 0 || nullable[y];
      if (all) {
        nullable[r->lhs] = true;
        changed = true;
      }
    }
  }
  return nullable;
}

bool qstates_almost_sure(const Pbpp &sys, const Config &alpha0, const QSet &q) {
  auto nullable = nullable_types(sys, q);
  for (TypeId x = 0; x < sys.size(); ++x)
    if (alpha0[x] > 0 && !nullable[x]) return true;
  return false;
}

} // namespace pbpp
