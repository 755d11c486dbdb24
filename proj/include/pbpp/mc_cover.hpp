#pragma once

#include "pbpp/model.hpp"
#include "pbpp/upsets.hpp"

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

namespace pbpp {

inline constexpr std::size_t kUnlimited = std::numeric_limits<std::size_t>::max();

struct Path {
  Vec start;
  std::vector<Step> steps;

  const Vec &last() const { return steps.empty() ? start : steps.back().next; }
};

struct SearchStats {
  std::size_t nodes = 0;
  std::size_t depth = 0;
};

using SuccessorFn = std::function<std::vector<Step>(const Vec &)>;
using Predicate = std::function<bool(const Vec &)>;

// Breadth-first tree search with branch-local <=-pruning. Works on any
// dimension; the caller supplies the one-step relation.
std::optional<Path> km_search(const Vec &start, const SuccessorFn &succ, const UpSet &avoid,
                              const Predicate &goal, std::size_t budget = kUnlimited,
                              SearchStats *stats = nullptr);

std::optional<Path> km_search(const Pbpp &sys, const Config &alpha0, const UpSet &avoid,
                              const Predicate &goal, std::size_t budget = kUnlimited,
                              SearchStats *stats = nullptr);

// Membership in the set of configurations that cannot reach f.
class FTilde {
public:
  FTilde(const Pbpp &sys, const UpSet &f) : pre_(pre_star(sys, f)) {}
  bool operator()(const Config &a) const { return !pre_.contains(a); }
  const UpSet &pre() const { return pre_; }

private:
  UpSet pre_;
};

struct CoverVerdict {
  bool answer = false;
  std::optional<Path> witness;
  SearchStats stats;
};

CoverVerdict almost_sure_cover(const Pbpp &sys, const Config &alpha0, const UpSet &f,
                               std::size_t budget = kUnlimited);

// Replays a path through apply_rule; false on any mismatch.
bool replay(const Pbpp &sys, const Path &p);

} // namespace pbpp
