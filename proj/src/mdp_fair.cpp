#include "pbpp/mdp_fair.hpp"

namespace pbpp {

Vec make_ext(const Config &counts, const Vec &ages) {
  if (counts.size() != ages.size()) throw Error("counts and ages differ in length");
  Vec s = counts;
  s.insert(s.end(), ages.begin(), ages.end());
  return s;
}

Vec ext_start(const Config &counts) { return make_ext(counts, Vec(counts.size(), 0)); }

Vec ext_successor(const Vec &s, TypeId x, const Rule &r) {
  const std::size_t n = s.size() / 2;
  if (r.lhs != x) throw Error("rule does not belong to the scheduled type");
  if (s[x] == 0) throw Error("rule not enabled");
  Vec t(2 * n, 0);
  for (TypeId y = 0; y < n; ++y) t[y] = s[y] - (y == x ? 1 : 0) + r.rhs[y];
  for (TypeId y = 0; y < n; ++y)
    if (y != x && s[y] > 0) t[n + y] = s[n + y] + 1;
  return t;
}

std::vector<Step> ext_successors(const Vec &s, const Pbpp &sys) {
  const std::size_t n = sys.size();
  std::vector<Step> out;
  bool empty = true;
  for (TypeId x = 0; x < n; ++x) {
    if (s[x] == 0) continue;
    empty = false;
    for (std::size_t i = 0; i < sys.rules.size(); ++i)
      if (sys.rules[i].lhs == x) out.push_back({i, ext_successor(s, x, sys.rules[i])});
  }
  if (empty) out.push_back({kBottom, s});
  return out;
}

UpSet build_G(const UpSet &f, Count k, std::size_t n) {
  if (k < 1) throw Error("fairness bound k must be at least 1");
  if (f.dim() != n) throw Error("target dimension does not match the alphabet");
  std::vector<Vec> vs;
  for (const Vec &phi : f.basis()) vs.push_back(make_ext(phi, Vec(n, 0)));
  for (TypeId x = 0; x < n; ++x) {
    Vec b(2 * n, 0);
    b[x] = 1;
    b[n + x] = k;
    vs.push_back(std::move(b));
  }
  return UpSet::minimize(2 * n, std::move(vs));
}

namespace {

// Least s with s(x) >= 1 and ext_successor(s, x, r) >= b, if any.
std::optional<Vec> ext_rule_pre(const Vec &b, const Rule &r) {
  const std::size_t n = b.size() / 2;
  const TypeId x = r.lhs;
  if (b[n + x] > 0) return std::nullopt; // the scheduled type always ends at age 0
  Vec s(2 * n, 0);
  for (TypeId y = 0; y < n; ++y) {
    std::int64_t need = std::int64_t(b[y]) + (y == x ? 1 : 0) - std::int64_t(r.rhs[y]);
    if (y == x) need = std::max<std::int64_t>(need, 1);
    if (y != x && b[n + y] > 0) {
      need = std::max<std::int64_t>(need, 1); // only processes present before the step age
      s[n + y] = b[n + y] - 1;
    }
    s[y] = static_cast<Count>(std::max<std::int64_t>(need, 0));
  }
  return s;
}

bool direct_check(const Pbpp &sys, const UpSet &w, const Vec &s) {
  const std::size_t n = sys.size();
  bool any = false;
  for (TypeId x = 0; x < n; ++x) {
    if (s[x] == 0) continue;
    any = true;
    bool ok = false;
    for (const Rule &r : sys.rules)
      if (r.lhs == x && w.contains(ext_successor(s, x, r))) {
        ok = true;
        break;
      }
    if (!ok) return false;
  }
  return any;
}

} // namespace

UpSet pre_game(const Pbpp &sys, const UpSet &w, PreGameStats *stats) {
  const std::size_t n = sys.size();
  if (w.dim() != 2 * n) throw Error("region dimension does not match the alphabet");
  // U[x]: states where scheduling x lets Probability land in w.
  std::vector<std::vector<Vec>> U(n);
  for (TypeId x = 0; x < n; ++x) {
    std::vector<Vec> vs;
    for (const Rule &r : sys.rules) {
      if (r.lhs != x) continue;
      for (const Vec &b : w.basis())
        if (auto p = ext_rule_pre(b, r)) vs.push_back(std::move(*p));
    }
    U[x] = UpSet::minimize(2 * n, std::move(vs)).basis();
  }

  std::vector<Vec> fresh;
  for (std::uint64_t mask = 1; mask < (std::uint64_t(1) << n); ++mask) {
    auto in_S = [&](TypeId y) { return (mask >> y) & 1; };
    auto on_face = [&](const Vec &v) {
      for (TypeId y = 0; y < n; ++y)
        if (!in_S(y) && (v[y] > 0 || v[n + y] > 0)) return false;
      return true;
    };
    // Start from the indicator of S, then intersect each U[x] restricted to the face.
    Vec one(2 * n, 0);
    for (TypeId y = 0; y < n; ++y)
      if (in_S(y)) one[y] = 1;
    UpSet acc = UpSet::minimize(2 * n, {one});
    for (TypeId x = 0; x < n && !acc.empty(); ++x) {
      if (!in_S(x)) continue;
      std::vector<Vec> face;
      for (const Vec &u : U[x])
        if (on_face(u)) face.push_back(u);
      acc = intersect(acc, UpSet::minimize(2 * n, std::move(face)));
    }
    for (const Vec &c : acc.basis()) fresh.push_back(c);
  }

  UpSet out = w;
  for (const Vec &c : fresh) {
    if (stats) {
      ++stats->candidates;
      if (!direct_check(sys, w, c)) ++stats->failed_checks;
    }
    out.insert(c);
  }
  return out;
}

GameRegion probability_win_region(const Pbpp &sys, const UpSet &f, Count k, std::size_t max_iters) {
  GameRegion g;
  g.w = build_G(f, k, sys.size());
  for (;;) {
    PreGameStats st;
    UpSet next = pre_game(sys, g.w, &st);
    g.failed_checks += st.failed_checks;
    if (next == g.w) return g;
    if (++g.iterations >= max_iters) throw BudgetExhausted("game iteration budget exhausted");
    g.w = std::move(next);
  }
}

FairVerdict universal_kfair(const Pbpp &sys, const Config &alpha0, const UpSet &f, Count k,
                            const FairOptions &opt) {
  FairVerdict v;
  v.k_below_types = k < sys.size();
  UpSet G = build_G(f, k, sys.size());
  Vec start = ext_start(alpha0);
  if (G.contains(start)) {
    v.answer = true;
    v.basis_size = G.basis().size();
    return v;
  }
  GameRegion region = probability_win_region(sys, f, k, opt.max_iters);
  v.iterations = region.iterations;
  v.basis_size = region.w.basis().size();
  v.failed_checks = region.failed_checks;
  const UpSet &W = region.w;
  v.witness = km_search(
      start, [&](const Vec &s) { return ext_successors(s, sys); }, G,
      [&](const Vec &s) { return !W.contains(s); }, opt.node_budget, &v.stats);
  v.answer = !v.witness.has_value();
  return v;
}

bool replay_ext(const Pbpp &sys, const Path &p) {
  Vec cur = p.start;
  const std::size_t n = sys.size();
  for (const Step &s : p.steps) {
    if (s.rule == kBottom) {
      for (TypeId y = 0; y < n; ++y)
        if (cur[y] != 0) return false;
      if (s.next != cur) return false;
      continue;
    }
    if (s.rule >= sys.rules.size()) return false;
    const Rule &r = sys.rules[s.rule];
    if (cur[r.lhs] == 0) return false;
    cur = ext_successor(cur, r.lhs, r);
    if (cur != s.next) return false;
  }
  return true;
}

} // namespace pbpp
