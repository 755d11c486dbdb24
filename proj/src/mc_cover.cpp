#include "pbpp/mc_cover.hpp"

#include <boost/container_hash/hash.hpp>

#include <algorithm>
#include <deque>
#include <unordered_set>

namespace pbpp {

namespace {
struct Node {
  Vec state;
  std::size_t parent;
  std::size_t rule;
  std::size_t depth;
};

constexpr std::size_t kRoot = static_cast<std::size_t>(-1);

struct VecHash {
  std::size_t operator()(const Vec &v) const { return boost::hash_range(v.begin(), v.end()); }
};
} // namespace

std::optional<Path> km_search(const Vec &start, const SuccessorFn &succ, const UpSet &avoid,
                              const Predicate &goal, std::size_t budget, SearchStats *stats) {
  if (avoid.contains(start)) throw Error("start state lies in the avoid set");
  std::vector<Node> tree;
  std::deque<std::size_t> queue;
  SearchStats local;
  SearchStats &st = stats ? *stats : local;
  st = {};

  // States already generated once are skipped: their subtree is explored elsewhere.
  std::unordered_set<Vec, VecHash> seen{start};
  tree.push_back({start, kRoot, kBottom, 0});
  queue.push_back(0);
  st.nodes = 1;

  while (!queue.empty()) {
    std::size_t id = queue.front();
    queue.pop_front();
    const Vec cur = tree[id].state;
    st.depth = std::max(st.depth, tree[id].depth);

    if (goal(cur)) {
      Path p;
      p.start = start;
      for (std::size_t n = id; tree[n].parent != kRoot; n = tree[n].parent)
        p.steps.push_back({tree[n].rule, tree[n].state});
      std::reverse(p.steps.begin(), p.steps.end());
      return p;
    }

    bool pruned = false;
    for (std::size_t a = tree[id].parent; a != kRoot; a = tree[a].parent)
      if (leq(tree[a].state, cur)) {
        pruned = true;
        break;
      }
    if (pruned) continue;

    for (Step &s : succ(cur)) {
      if (avoid.contains(s.next) || seen.contains(s.next)) continue;
      if (st.nodes >= budget) throw BudgetExhausted("node budget exhausted");
      seen.insert(s.next);
      tree.push_back({std::move(s.next), id, s.rule, tree[id].depth + 1});
      queue.push_back(tree.size() - 1);
      ++st.nodes;
    }
  }
  return std::nullopt;
}

std::optional<Path> km_search(const Pbpp &sys, const Config &alpha0, const UpSet &avoid,
                              const Predicate &goal, std::size_t budget, SearchStats *stats) {
  return km_search(
      alpha0, [&](const Vec &a) { return successors(a, sys); }, avoid, goal, budget, stats);
}

CoverVerdict almost_sure_cover(const Pbpp &sys, const Config &alpha0, const UpSet &f,
                               std::size_t budget) {
  CoverVerdict v;
  if (f.contains(alpha0)) {
    v.answer = true;
    v.stats.nodes = 1;
    return v;
  }
  FTilde ft(sys, f);
  // F̃ is downward closed and a smaller state simulates every run of a larger
  // one, so a death step that stays outside F dominates all other successors.
  auto succ = [&](const Vec &a) {
    std::vector<Step> all = successors(a, sys);
    for (Step &s : all)
      if (s.rule != kBottom && is_empty(sys.rules[s.rule].rhs) && !f.contains(s.next))
        return std::vector<Step>{std::move(s)};
    return all;
  };
  v.witness = km_search(alpha0, succ, f, ft, budget, &v.stats);
  v.answer = !v.witness.has_value();
  return v;
}

bool replay(const Pbpp &sys, const Path &p) {
  Vec cur = p.start;
  for (const Step &s : p.steps) {
    if (s.rule == kBottom) {
      if (!is_empty(cur) || !is_empty(s.next)) return false;
      continue;
    }
    if (s.rule >= sys.rules.size() || !enabled(cur, sys.rules[s.rule])) return false;
    cur = apply_rule(cur, sys.rules[s.rule]);
    if (cur != s.next) return false;
  }
  return true;
}

} // namespace pbpp
