#pragma once

#include "pbpp/model.hpp"
#include "pbpp/upsets.hpp"

#include <array>
#include <limits>
#include <string>
#include <vector>

namespace pbpp {

inline constexpr Count kInf = std::numeric_limits<Count>::max();

// Downward-closed set given as a union of boxes; a box caps each coordinate
// (kInf = unbounded).
struct DownSet {
  std::size_t dim = 0;
  std::vector<Vec> boxes;

  static DownSet all(std::size_t dim) { return {dim, {Vec(dim, kInf)}}; }
  bool contains(const Vec &v) const;
  // Upward-closed complement.
  UpSet complement() const;
};

DownSet intersect(const DownSet &a, const DownSet &b);

// A BPP without probabilities.
struct SRule {
  TypeId lhs = 0;
  Vec rhs;
};

struct Skeleton {
  std::vector<std::string> names;
  std::vector<SRule> rules;

  std::size_t size() const { return names.size(); }
  TypeId add(const std::string &name);
  std::size_t add_rule(TypeId lhs, const std::vector<TypeId> &rhs);
  TypeId at(const std::string &name) const;
};

struct Constraint {
  enum class Kind { Incompatible, Unique, Blocks, Atomic, Pattern };
  Kind kind = Kind::Incompatible;
  TypeId x = 0, y = 0;   // Incompatible(x, y), Unique(x), Blocks(x, rule)
  std::size_t rule = 0;
  // Atomic: rules outside `inner` fire only while the inner types sit in
  // `initial` or `final` (boxes over the inner types, in order).
  std::vector<TypeId> inner;
  std::vector<std::size_t> inner_rules;
  DownSet initial, final;
  // Pattern: forbids every state covering these counts.
  std::vector<std::pair<TypeId, Count>> pattern;

  static Constraint incompatible(TypeId x, TypeId y) { return of(Kind::Incompatible, x, y); }
  static Constraint unique(TypeId x) { return of(Kind::Unique, x, x); }
  static Constraint blocks(TypeId x, std::size_t rule) {
    Constraint c = of(Kind::Blocks, x, 0);
    c.rule = rule;
    return c;
  }
  static Constraint forbid(std::vector<std::pair<TypeId, Count>> p) {
    Constraint c = of(Kind::Pattern, 0, 0);
    c.pattern = std::move(p);
    return c;
  }

private:
  static Constraint of(Kind k, TypeId x, TypeId y) {
    Constraint c;
    c.kind = k;
    c.x = x;
    c.y = y;
    return c;
  }
};

struct Constrained {
  Skeleton net;
  UpSet forbidden;
  // Guard types introduced by the encodings; each has a single rule T -> ε.
  std::vector<bool> guard;
};

// Original rule indices are preserved; guard rules are appended.
Constrained constraints_to_upset(const std::vector<Constraint> &cs, const Skeleton &ctx);

enum class GadgetKind { Producer, Consumer, Loop };

struct Gadget {
  GadgetKind kind = GadgetKind::Producer;
  Skeleton net;
  std::vector<Constraint> constraints;
  Config init;
  DownSet final;
  // Producer: output place. Consumer: input place.
  TypeId port = 0;
  // Loop: the three mutually exclusive phase places, and the rule closing a cycle.
  std::array<TypeId, 3> phases{};
  std::size_t cycle_rule = 0;
  // Loop: places marking the stages in which the loop does not cycle.
  std::vector<TypeId> idle;
  Count calibration = 0;
  // Search caps: a state above any cap cannot reach the final set. They come
  // from consumer capacities (a consumer never absorbs more than it is calibrated for).
  Vec caps;
};

Gadget base_producer(Count k);
Gadget base_consumer(Count k);
Gadget make_loop(const Gadget &producer, const Gadget &consumer);
Gadget lift_producer(const Gadget &loop);
Gadget lift_consumer(const Gadget &loop);
// h-fold lift of a base k-loop; the result is a producer of a tower of h exponentials.
Gadget tower(unsigned h, Count k);
Gadget loop_of(Count k);

// Appends g's places (prefixed), rules and constraints to `into`; returns the
// place map. Init counts are added; the final set is left to the caller.
struct Embedding {
  std::vector<TypeId> place;
  std::vector<std::size_t> rule;
};
Embedding embed(Gadget &into, const Gadget &g, const std::string &prefix);
// g's final set, extended to the places of `into`.
DownSet lift(const DownSet &d, const Embedding &e, std::size_t dim);

// A constrained BPP with a downward-closed goal.
struct ConstrainedInstance {
  Skeleton net;
  std::vector<Constraint> constraints;
  Config init;
  DownSet goal;
  Vec caps; // empty = no caps
};

ConstrainedInstance as_instance(const Gadget &g);

enum class CounterOp { Skip, Inc, Dec, Zero };

struct CounterMachine {
  struct Transition {
    std::size_t src = 0;
    std::vector<CounterOp> ops; // one per counter
    std::size_t dst = 0;
  };
  std::size_t controls = 0;
  std::size_t counters = 0;
  std::vector<Transition> transitions;
  std::size_t start = 0, final = 0;
  Count bound = 1;
};

// Increments at the bound and decrements at zero are disabled.
bool machine_halts(const CounterMachine &cm);

ConstrainedInstance compile_counter_machine(const CounterMachine &cm, const Gadget &budget);

struct GeneratedInstance {
  Pbpp sys;
  UpSet f;
  Config alpha0;
};

// Uniform probabilities per lhs; types without rules get X -> X.
GeneratedInstance finalize_instance(const ConstrainedInstance &g);

// Exhaustive constrained search. Guard tokens are discarded as soon as the
// state carrying them is checked, which preserves reachability of
// downward-closed sets.
struct ExploreResult {
  std::vector<Vec> finals; // reachable states inside the goal, with the extra counter last
  std::size_t states = 0;
  std::size_t cut = 0; // successors dropped by the caps
};
// counter_rule: if set, each firing of that rule bumps an extra coordinate.
ExploreResult explore(const ConstrainedInstance &g, std::size_t counter_rule = kBottom,
                      std::size_t budget = 20'000'000);

struct CalibrationReport {
  bool ok = false;
  std::vector<Count> observed; // output counts, cycle counts, or accepted inputs
  std::size_t states = 0;
  std::string detail;
};

CalibrationReport verify_gadget(const Gadget &g, std::size_t budget = 20'000'000);

} // namespace pbpp
