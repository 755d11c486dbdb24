#include "pbpp/mdp_exist.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <unordered_map>

namespace pbpp {

namespace {

constexpr Count kOmega = std::numeric_limits<Count>::max();

struct VecHash {
  std::size_t operator()(const Vec &v) const {
    std::size_t h = 1469598103934665603ULL;
    for (Count c : v) h = (h ^ c) * 1099511628211ULL;
    return h;
  }
};

Count max_coord(const Vec &v) { return v.empty() ? 0 : *std::max_element(v.begin(), v.end()); }

} // namespace

Count compute_K(const UpSet &f) {
  if (f.empty()) throw Error("target has no minimal elements");
  Count k = 0;
  for (const Vec &b : f.basis()) k = std::max(k, max_coord(b));
  return k;
}

SaturationInfo saturation(const Config &alpha, const SuccessorGraph &g, Count K) {
  const std::size_t n = alpha.size();
  SaturationInfo s;
  s.k_bound = K;
  s.sat.assign(n, false);
  s.unstable.assign(n, false);
  s.floored = alpha;
  for (TypeId x = 0; x < n; ++x) {
    bool all = true, some_low = false;
    for (TypeId y = 0; y < n; ++y) {
      if (!g.suc[x][y]) continue;
      if (alpha[y] < K) {
        all = false;
        some_low = true;
      }
    }
    s.sat[x] = all;
    if (all) s.floored[x] = K;
    s.unstable[x] = alpha[x] > K && some_low;
    if (s.unstable[x]) s.stable = false;
  }
  return s;
}

TypeId cautious_next(const Config &alpha, const SuccessorGraph &g, Count K) {
  const std::size_t n = alpha.size();
  std::size_t best_len = std::numeric_limits<std::size_t>::max();
  TypeId best = 0;
  for (TypeId x1 = 0; x1 < n; ++x1) {
    if (alpha[x1] <= K) continue;
    // BFS through types holding exactly K processes until one below K.
    std::vector<std::size_t> dist(n, std::numeric_limits<std::size_t>::max());
    std::deque<TypeId> q{x1};
    dist[x1] = 1;
    std::size_t found = std::numeric_limits<std::size_t>::max();
    while (!q.empty() && found == std::numeric_limits<std::size_t>::max()) {
      TypeId u = q.front();
      q.pop_front();
      for (TypeId v = 0; v < n; ++v) {
        if (!g.edge[u][v] || dist[v] != std::numeric_limits<std::size_t>::max()) continue;
        dist[v] = dist[u] + 1;
        if (alpha[v] < K) {
          found = dist[v];
          break;
        }
        if (alpha[v] == K) q.push_back(v);
      }
    }
    if (found < best_len) {
      best_len = found;
      best = x1;
    }
  }
  if (best_len == std::numeric_limits<std::size_t>::max())
    throw Error("cautious_next called on a stable configuration");
  return best;
}

PetriNet build_petri(const Pbpp &sys, Count K) {
  const std::size_t n = sys.size();
  SuccessorGraph g(sys);
  PetriNet net;
  net.types = n;
  for (const auto &name : sys.names) net.places.push_back(name);
  for (const auto &name : sys.names) net.places.push_back("S_" + name);

  for (std::size_t i = 0; i < sys.rules.size(); ++i) {
    const Rule &r = sys.rules[i];
    PetriNet::Transition t{Vec(2 * n, 0), Vec(2 * n, 0), "rule " + format_rule(sys, r)};
    t.in[r.lhs] = K + 1;
    t.out[r.lhs] = K;
    for (TypeId y = 0; y < n; ++y) t.out[y] += r.rhs[y];
    net.transitions.push_back(std::move(t));
  }
  for (const auto &comp : g.sccs()) {
    PetriNet::Transition t{Vec(2 * n, 0), Vec(2 * n, 0), "saturate"};
    std::vector<bool> in_comp(n, false);
    for (TypeId x : comp) {
      in_comp[x] = true;
      t.in[x] = K;
      t.out[n + x] = 1;
      t.label += " " + sys.names[x];
    }
    for (TypeId y = 0; y < n; ++y) {
      if (in_comp[y]) continue;
      bool reached = false;
      for (TypeId x : comp) reached = reached || g.suc[x][y];
      if (reached) {
        t.in[n + y] = 1;
        t.out[n + y] = 1;
      }
    }
    net.transitions.push_back(std::move(t));
  }
  for (TypeId x = 0; x < n; ++x) {
    PetriNet::Transition t{Vec(2 * n, 0), Vec(2 * n, 0), "suck-out " + sys.names[x]};
    t.in[x] = 1;
    t.in[n + x] = 1;
    t.out[n + x] = 1;
    net.transitions.push_back(std::move(t));
  }
  return net;
}

Vec to_marking(const Config &alpha) {
  Vec m(2 * alpha.size(), 0);
  std::copy(alpha.begin(), alpha.end(), m.begin());
  return m;
}

Vec petri_marking(const Config &q, const SuccessorGraph &g, Count K) {
  const std::size_t n = q.size();
  auto s = saturation(q, g, K);
  Vec m(2 * n, 0);
  for (TypeId x = 0; x < n; ++x) {
    if (s.sat[x])
      m[n + x] = 1;
    else
      m[x] = q[x];
  }
  return m;
}

namespace {

struct Exploration {
  std::vector<Vec> markings;
  std::vector<std::pair<std::size_t, std::size_t>> parent; // (marking, transition)
  bool closed = true;
  std::optional<std::size_t> hit;
};

// Places whose token count no transition can lower.
std::vector<bool> monotone_places(const PetriNet &net) {
  std::vector<bool> mono(net.places.size(), true);
  for (const auto &t : net.transitions)
    for (std::size_t p = 0; p < mono.size(); ++p)
      if (t.out[p] < t.in[p]) mono[p] = false;
  return mono;
}

Exploration explore(const PetriNet &net, const Vec &from, std::size_t budget, Count cap,
                    const Vec &limit, const Vec *target) {
  const auto mono = monotone_places(net);
  auto dead = [&](const Vec &m) {
    for (std::size_t p = 0; p < m.size(); ++p)
      if (mono[p] && m[p] > limit[p]) return true;
    return false;
  };
  Exploration ex;
  std::unordered_map<Vec, std::size_t, VecHash> index;
  ex.markings.push_back(from);
  ex.parent.emplace_back(kNone, kNone);
  index.emplace(from, 0);
  if (target && from == *target) {
    ex.hit = 0;
    return ex;
  }
  for (std::size_t head = 0; head < ex.markings.size(); ++head) {
    for (std::size_t ti = 0; ti < net.transitions.size(); ++ti) {
      const auto &t = net.transitions[ti];
      const Vec &m = ex.markings[head];
      bool ok = true;
      for (std::size_t p = 0; p < m.size() && ok; ++p) ok = m[p] >= t.in[p];
      if (!ok) continue;
      Vec next = m;
      bool over = false;
      for (std::size_t p = 0; p < next.size(); ++p) {
        next[p] = next[p] - t.in[p] + t.out[p];
        if (p < net.types && next[p] > cap) over = true;
      }
      if (dead(next)) continue;
      if (over) {
        ex.closed = false;
        continue;
      }
      if (index.count(next)) continue;
      if (ex.markings.size() >= budget) {
        ex.closed = false;
        return ex;
      }
      index.emplace(next, ex.markings.size());
      ex.markings.push_back(next);
      ex.parent.emplace_back(head, ti);
      if (target && next == *target) {
        ex.hit = ex.markings.size() - 1;
        return ex;
      }
    }
  }
  return ex;
}

Count default_cap(Count K, const Vec &start) { return std::max<Count>(2 * K + 2, max_coord(start)); }

} // namespace

PetriResult petri_reach(const PetriNet &net, const Vec &from, const Vec &to, std::size_t budget,
                        Count cap) {
  if (from.size() != net.places.size() || to.size() != net.places.size())
    throw Error("marking does not match the net");
  Exploration ex = explore(net, from, budget, cap, to, &to);
  PetriResult res;
  if (ex.hit) {
    res.result = Tri::Yes;
    for (std::size_t i = *ex.hit; ex.parent[i].first != kNone; i = ex.parent[i].first)
      res.firing.push_back(ex.parent[i].second);
    std::reverse(res.firing.begin(), res.firing.end());
  } else {
    res.result = ex.closed ? Tri::No : Tri::Unknown;
  }
  return res;
}

namespace {

// Reads a marking back as a floored stable configuration, if it encodes one.
std::optional<Config> decode(const Vec &m, const SuccessorGraph &g, Count K) {
  const std::size_t n = g.size();
  Config q(n, 0);
  for (TypeId x = 0; x < n; ++x) {
    Count s = m[n + x];
    if (s > 1 || (s == 1 && m[x] != 0) || (s == 0 && m[x] > K)) return std::nullopt;
    q[x] = s ? K : m[x];
  }
  auto info = saturation(q, g, K);
  if (!info.stable) return std::nullopt;
  for (TypeId x = 0; x < n; ++x)
    if (info.sat[x] != (m[n + x] == 1)) return std::nullopt;
  return q;
}

Config floor_sat(Config a, const SuccessorGraph &g, Count K) {
  auto info = saturation(a, g, K);
  for (TypeId x = 0; x < a.size(); ++x)
    if (info.sat[x]) a[x] = K;
  return a;
}

// Cautious play where counts above cap collapse to ω. Each concrete run maps to
// an abstract run with the same first stable floor, so the outcome set is an
// over-approximation.
std::set<Config> abstract_outcomes(const Pbpp &sys, const SuccessorGraph &g, Count K,
                                   const Config &alpha, Count cap, std::size_t budget) {
  auto widen = [&](Config a) {
    for (Count &c : a)
      if (c != kOmega && c > cap) c = kOmega;
    return floor_sat(std::move(a), g, K);
  };
  std::set<Config> out;
  std::set<Config> seen;
  std::deque<Config> work;
  Config start = widen(alpha);
  seen.insert(start);
  work.push_back(start);
  while (!work.empty()) {
    Config s = work.front();
    work.pop_front();
    auto info = saturation(s, g, K);
    if (info.stable) {
      Config q(s.size());
      for (TypeId x = 0; x < s.size(); ++x) q[x] = std::min(s[x], K);
      out.insert(q);
      continue;
    }
    TypeId x1 = cautious_next(s, g, K);
    for (std::size_t ri : sys.rules_of(x1)) {
      const Rule &r = sys.rules[ri];
      std::vector<Config> nexts;
      Config base = s;
      if (base[x1] != kOmega) {
        --base[x1];
        nexts.push_back(base);
      } else {
        nexts.push_back(base);
        if (r.rhs[x1] == 0) {
          base[x1] = cap;
          nexts.push_back(base);
        }
      }
      for (Config n : nexts) {
        for (TypeId y = 0; y < n.size(); ++y)
          if (n[y] != kOmega && r.rhs[y] > 0) {
            std::uint64_t v = std::uint64_t(n[y]) + r.rhs[y];
            n[y] = v > cap ? kOmega : static_cast<Count>(v);
          }
        n = widen(std::move(n));
        if (seen.insert(n).second) {
          if (seen.size() > budget) throw BudgetExhausted("cautious abstraction budget exhausted");
          work.push_back(std::move(n));
        }
      }
    }
  }
  return out;
}

} // namespace

TAlpha t_alpha(const Pbpp &sys, Count K, const Config &alpha, const ExistOptions &opt) {
  SuccessorGraph g(sys);
  if (saturation(alpha, g, K).stable) throw Error("t_alpha needs an unstable configuration");
  const std::size_t n = sys.size();
  Config start = floor_sat(alpha, g, K);
  Count cap = opt.cap ? std::max(opt.cap, max_coord(start)) : default_cap(K, start);
  cap = std::max<Count>(cap, K + 1);

  PetriNet net = build_petri(sys, K);
  Vec limit(2 * n, 0);
  for (TypeId x = 0; x < n; ++x) {
    limit[x] = kOmega;
    limit[n + x] = 1;
  }
  Exploration ex = explore(net, to_marking(start), opt.petri_budget, cap, limit, nullptr);
  TAlpha t;
  for (const Vec &m : ex.markings)
    if (auto q = decode(m, g, K)) t.lower.insert(*q);
  if (ex.closed) {
    t.upper = t.lower;
  } else {
    t.upper = abstract_outcomes(sys, g, K, start, cap, opt.petri_budget);
    t.upper.insert(t.lower.begin(), t.lower.end());
  }
  return t;
}

std::optional<std::size_t> FiniteMdp::find(const Config &q) const {
  auto it = std::find(states.begin(), states.end(), q);
  if (it == states.end()) return std::nullopt;
  return static_cast<std::size_t>(it - states.begin());
}

MdpBounds build_finite_mdp(const Pbpp &sys, const UpSet &f, const std::vector<Config> &starts,
                           const ExistOptions &opt) {
  const Count K = compute_K(f);
  SuccessorGraph g(sys);
  MdpBounds b;
  std::map<Config, TAlpha> memo;
  std::map<Config, std::size_t> index;

  auto intern = [&](const Config &q) {
    auto [it, fresh] = index.emplace(q, b.upper.states.size());
    if (fresh) {
      b.upper.states.push_back(q);
      b.upper.target.push_back(f.contains(q));
      b.upper.actions.emplace_back();
    }
    return it->second;
  };
  auto handle = [&](const Config &beta) -> const TAlpha & {
    auto info = saturation(beta, g, K);
    auto it = memo.find(info.floored);
    if (it != memo.end()) return it->second;
    TAlpha t;
    if (info.stable) {
      t.lower = t.upper = {info.floored};
    } else {
      t = t_alpha(sys, K, info.floored, opt);
      ++b.t_queries;
      if (!t.exact()) ++b.inexact;
    }
    return memo.emplace(info.floored, std::move(t)).first->second;
  };

  for (const Config &s : starts) intern(s);
  std::vector<std::vector<FiniteMdp::Action>> lower_actions;
  for (std::size_t i = 0; i < b.upper.states.size(); ++i) {
    lower_actions.emplace_back();
    if (b.upper.target[i]) continue;
    const Config q = b.upper.states[i];
    if (is_empty(q)) {
      b.upper.actions[i].push_back({kBottom, {i}});
      lower_actions[i].push_back({kBottom, {i}});
      continue;
    }
    for (TypeId x = 0; x < q.size(); ++x) {
      if (q[x] == 0) continue;
      std::set<std::size_t> up, low;
      for (std::size_t ri : sys.rules_of(x)) {
        const TAlpha &t = handle(apply_rule(q, sys.rules[ri]));
        for (const Config &c : t.upper) up.insert(intern(c));
        for (const Config &c : t.lower) low.insert(intern(c));
      }
      b.upper.actions[i].push_back({x, {up.begin(), up.end()}});
      lower_actions[i].push_back({x, {low.begin(), low.end()}});
    }
  }
  lower_actions.resize(b.upper.states.size());
  b.lower = b.upper;
  b.lower.actions = std::move(lower_actions);
  return b;
}

MdpSolution almost_sure_win(const FiniteMdp &m) {
  const std::size_t n = m.states.size();
  std::vector<bool> cand(n, true);
  std::vector<std::size_t> choice(n, kNone);
  for (;;) {
    std::vector<bool> reach(n, false);
    std::fill(choice.begin(), choice.end(), kNone);
    for (std::size_t s = 0; s < n; ++s) reach[s] = cand[s] && m.target[s];
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t s = 0; s < n; ++s) {
        if (!cand[s] || reach[s]) continue;
        for (const auto &a : m.actions[s]) {
          bool inside = !a.support.empty(), hits = false;
          for (std::size_t t : a.support) {
            inside = inside && cand[t];
            hits = hits || reach[t];
          }
          if (inside && hits) {
            reach[s] = true;
            choice[s] = a.type;
            changed = true;
            break;
          }
        }
      }
    }
    if (reach == cand) break;
    cand = std::move(reach);
  }
  return {cand, choice};
}

TypeId Scheduler::operator()(const Config &alpha) const {
  if (is_empty(alpha)) return kBottom;
  auto info = saturation(alpha, graph, K);
  if (info.stable) {
    auto it = choice.find(info.floored);
    if (it != choice.end() && alpha[it->second] > 0) return it->second;
  } else {
    return cautious_next(alpha, graph, K);
  }
  for (TypeId x = 0; x < alpha.size(); ++x)
    if (alpha[x] > K) return x;
  for (TypeId x = 0; x < alpha.size(); ++x)
    if (alpha[x] > 0) return x;
  return kBottom;
}

ExistVerdict exist_scheduler(const Pbpp &sys, const Config &alpha0, const UpSet &f,
                             const ExistOptions &opt) {
  ExistVerdict v;
  if (f.empty()) return v;
  SuccessorGraph g(sys);
  const Count K = compute_K(f);
  if (f.contains(alpha0)) {
    v.answer = true;
    v.scheduler = Scheduler{K, {}, g};
    return v;
  }

  auto info = saturation(alpha0, g, K);
  std::vector<Config> starts;
  TAlpha t0;
  if (info.stable) {
    starts = {info.floored};
  } else {
    t0 = t_alpha(sys, K, info.floored, opt);
    starts.assign(t0.upper.begin(), t0.upper.end());
  }
  MdpBounds b = build_finite_mdp(sys, f, starts, opt);
  v.states = b.upper.states.size();
  v.t_queries = b.t_queries + (info.stable ? 0 : 1);
  v.inexact = b.inexact + (info.stable || t0.exact() ? 0 : 1);
  MdpSolution up = almost_sure_win(b.upper);
  MdpSolution low = b.inexact == 0 ? up : almost_sure_win(b.lower);

  auto wins = [&](const MdpSolution &sol, const std::set<Config> &qs) {
    for (const Config &q : qs)
      if (!sol.win[*b.upper.find(q)]) return false;
    return true;
  };
  std::set<Config> lower0 = info.stable ? std::set<Config>{info.floored} : t0.lower;
  std::set<Config> upper0 = info.stable ? std::set<Config>{info.floored} : t0.upper;

  if (wins(up, upper0)) {
    v.answer = true;
    Scheduler s{K, {}, g};
    for (std::size_t i = 0; i < b.upper.states.size(); ++i)
      if (up.win[i] && up.choice[i] != kNone && up.choice[i] != kBottom)
        s.choice.emplace(b.upper.states[i], up.choice[i]);
    v.scheduler = std::move(s);
    return v;
  }
  if (!wins(low, lower0)) return v;
  throw BudgetExhausted("cautious outcome sets not settled within the Petri budget");
}

} // namespace pbpp
