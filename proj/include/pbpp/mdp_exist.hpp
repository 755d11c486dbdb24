#pragma once

#include "pbpp/model.hpp"
#include "pbpp/successor_graph.hpp"
#include "pbpp/upsets.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace pbpp {

Count compute_K(const UpSet &f);

struct SaturationInfo {
  Count k_bound = 0;
  std::vector<bool> sat;
  std::vector<bool> unstable;
  Config floored;
  bool stable = true;
};

SaturationInfo saturation(const Config &alpha, const SuccessorGraph &g, Count K);
TypeId cautious_next(const Config &alpha, const SuccessorGraph &g, Count K);

// Places 0..n-1 are the types, n..2n-1 the saturation flags S_X.
struct PetriNet {
  struct Transition {
    Vec in, out;
    std::string label;
  };
  std::size_t types = 0;
  std::vector<std::string> places;
  std::vector<Transition> transitions;
};

PetriNet build_petri(const Pbpp &sys, Count K);
Vec to_marking(const Config &alpha);
// <q>: unsaturated types keep their tokens, saturated ones are replaced by S_X.
Vec petri_marking(const Config &q, const SuccessorGraph &g, Count K);

enum class Tri { Yes, No, Unknown };

struct PetriResult {
  Tri result = Tri::Unknown;
  std::vector<std::size_t> firing;
};

// Breadth-first search over markings with every place <= cap. "No" only when the
// explored space is closed; "Unknown" when the cap or the budget cut it off.
PetriResult petri_reach(const PetriNet &net, const Vec &from, const Vec &to, std::size_t budget,
                        Count cap);

// Outcomes of cautious play from an unstable configuration. lower holds the
// outcomes proved reachable in the net, upper a sound over-approximation; they
// coincide when the exploration closed.
struct TAlpha {
  std::set<Config> lower, upper;
  bool exact() const { return lower == upper; }
};

struct ExistOptions {
  std::size_t petri_budget = 1000000;
  Count cap = 0; // 0: derive from K and the start configuration
};

TAlpha t_alpha(const Pbpp &sys, Count K, const Config &alpha, const ExistOptions &opt = {});

struct FiniteMdp {
  struct Action {
    std::size_t type; // kBottom for the ε self-loop
    std::vector<std::size_t> support;
  };
  std::vector<Config> states;
  std::vector<std::vector<Action>> actions;
  std::vector<bool> target;

  std::optional<std::size_t> find(const Config &q) const;
};

struct MdpBounds {
  FiniteMdp upper; // larger supports: winning here is sound
  FiniteMdp lower; // smaller supports: losing here is sound
  std::size_t t_queries = 0;
  std::size_t inexact = 0;
};

// Explores the floored stable states reachable from the given starts.
MdpBounds build_finite_mdp(const Pbpp &sys, const UpSet &f, const std::vector<Config> &starts,
                           const ExistOptions &opt = {});

struct MdpSolution {
  std::vector<bool> win;
  std::vector<std::size_t> choice; // type index, kBottom, or kNone
};

inline constexpr std::size_t kNone = static_cast<std::size_t>(-2);

MdpSolution almost_sure_win(const FiniteMdp &m);

// Memoryless choice on floored stable states, completed by the cautious rule.
struct Scheduler {
  Count K = 0;
  std::map<Config, TypeId> choice;
  SuccessorGraph graph;

  TypeId operator()(const Config &alpha) const;
};

struct ExistVerdict {
  bool answer = false;
  std::optional<Scheduler> scheduler;
  std::size_t states = 0;
  std::size_t t_queries = 0;
  std::size_t inexact = 0;
};

// Throws BudgetExhausted when the bounds on cautious outcomes do not settle the answer.
ExistVerdict exist_scheduler(const Pbpp &sys, const Config &alpha0, const UpSet &f,
                             const ExistOptions &opt = {});

} // namespace pbpp
