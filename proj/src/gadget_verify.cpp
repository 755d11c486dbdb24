#include "pbpp/gadgets.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <unordered_set>

namespace pbpp {

namespace {

using Key = std::string;

Key encode(const Vec &v) {
  Key k(v.size(), '\0');
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] > 255) throw Error("gadget search: place count exceeds 255");
    k[i] = static_cast<char>(v[i]);
  }
  return k;
}

Vec decode(const Key &k) {
  Vec v(k.size());
  for (std::size_t i = 0; i < k.size(); ++i) v[i] = static_cast<unsigned char>(k[i]);
  return v;
}

} // namespace

ExploreResult explore(const ConstrainedInstance &g, std::size_t counter_rule, std::size_t budget) {
  Constrained c = constraints_to_upset(g.constraints, g.net);
  const std::size_t n = c.net.size();
  const bool counting = counter_rule != kBottom;
  if (counting && counter_rule >= g.net.rules.size()) throw Error("counter rule out of range");

  // Sparse forbidden elements, indexed by the places they mention.
  std::vector<std::vector<std::pair<TypeId, Count>>> bad;
  std::vector<std::vector<std::size_t>> touching(n);
  for (const Vec &b : c.forbidden.basis()) {
    std::vector<std::pair<TypeId, Count>> s;
    for (TypeId x = 0; x < n; ++x)
      if (b[x]) {
        s.push_back({x, b[x]});
        touching[x].push_back(bad.size());
      }
    bad.push_back(std::move(s));
  }
  auto violates = [&](const Vec &v, TypeId x) {
    for (std::size_t i : touching[x]) {
      bool all = true;
      for (auto [y, k] : bad[i]) all = all && v[y] >= k;
      if (all) return true;
    }
    return false;
  };

  struct Move {
    TypeId lhs;
    std::vector<std::pair<TypeId, Count>> add;
    std::vector<TypeId> guards;
    bool counts;
  };
  std::vector<Move> moves;
  for (std::size_t r = 0; r < g.net.rules.size(); ++r) {
    const SRule &sr = c.net.rules[r];
    Move m{sr.lhs, {}, {}, counting && r == counter_rule};
    for (TypeId y = 0; y < n; ++y)
      if (sr.rhs[y]) {
        m.add.push_back({y, sr.rhs[y]});
        if (c.guard[y]) m.guards.push_back(y);
      }
    moves.push_back(std::move(m));
  }

  ExploreResult res;
  Vec start(n + (counting ? 1 : 0), 0);
  std::copy(g.init.begin(), g.init.end(), start.begin());
  if (c.forbidden.contains(Vec(start.begin(), start.begin() + n))) return res;

  std::unordered_set<Key> seen;
  std::deque<Key> queue;
  seen.insert(encode(start));
  queue.push_back(encode(start));
  while (!queue.empty()) {
    Vec v = decode(queue.front());
    queue.pop_front();
    ++res.states;
    if (g.goal.contains(v)) res.finals.push_back(v);
    for (const Move &m : moves) {
      if (v[m.lhs] == 0) continue;
      Vec w = v;
      --w[m.lhs];
      bool ok = true;
      for (auto [y, k] : m.add) w[y] += k;
      for (auto [y, k] : m.add)
        if (violates(w, y)) {
          ok = false;
          break;
        }
      if (!ok) continue;
      bool over = false;
      for (auto [y, k] : m.add) over = over || (y < g.caps.size() && w[y] > g.caps[y]);
      if (over) {
        ++res.cut;
        continue;
      }
      for (TypeId y : m.guards) w[y] = 0;
      if (m.counts) ++w[n];
      Key key = encode(w);
      if (seen.insert(key).second) {
        if (seen.size() > budget) throw BudgetExhausted("gadget search budget exhausted");
        queue.push_back(std::move(key));
      }
    }
  }
  return res;
}

CalibrationReport verify_gadget(const Gadget &g, std::size_t budget) {
  CalibrationReport rep;
  const Count k = g.calibration;
  auto finish = [&](std::set<Count> seen, std::set<Count> want, const char *what) {
    rep.observed.assign(seen.begin(), seen.end());
    rep.ok = seen == want;
    rep.detail = std::string(what) + ":";
    for (Count x : rep.observed) rep.detail += " " + std::to_string(x);
    if (rep.observed.empty()) rep.detail += " none";
  };

  switch (g.kind) {
  case GadgetKind::Producer: {
    ExploreResult r = explore(as_instance(g), kBottom, budget);
    rep.states = r.states;
    std::set<Count> outs;
    for (const Vec &f : r.finals) outs.insert(f[g.port]);
    finish(outs, {k}, "outputs at final");
    break;
  }
  case GadgetKind::Consumer: {
    std::set<Count> accepted, want;
    for (Count p = 0; p <= k + 1; ++p) {
      ConstrainedInstance inst = as_instance(g);
      inst.init[g.port] += p;
      ExploreResult r = explore(inst, kBottom, budget);
      rep.states += r.states;
      if (!r.finals.empty()) accepted.insert(p);
      if (p <= k) want.insert(p);
    }
    finish(accepted, want, "accepted inputs");
    break;
  }
  case GadgetKind::Loop: {
    ExploreResult r = explore(as_instance(g), g.cycle_rule, budget);
    rep.states = r.states;
    std::set<Count> cycles;
    for (const Vec &f : r.finals) cycles.insert(f.back());
    finish(cycles, {k}, "cycles at final");
    break;
  }
  }
  return rep;
}

} // namespace pbpp
