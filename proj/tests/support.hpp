#pragma once

#include "pbpp/model.hpp"
#include "pbpp/upsets.hpp"

#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace testing {

using namespace pbpp;

inline Config cfg(const Pbpp &sys, const std::string &words) {
  std::istringstream is(words);
  std::vector<std::string> names;
  for (std::string w; is >> w;) names.push_back(w);
  return make_config(sys, names);
}

inline UpSet upset(const Pbpp &sys, const std::vector<std::string> &elems) {
  std::vector<Vec> vs;
  for (const auto &e : elems) vs.push_back(cfg(sys, e));
  return UpSet::minimize(sys.size(), vs);
}

// Calls fn on every vector in {0..cap}^dim.
inline void for_each_vec(std::size_t dim, Count cap, const std::function<void(const Vec &)> &fn) {
  Vec v(dim, 0);
  for (;;) {
    fn(v);
    std::size_t i = 0;
    while (i < dim && v[i] == cap) v[i++] = 0;
    if (i == dim) return;
    ++v[i];
  }
}

struct RandomSpec {
  std::size_t max_types = 4;
  std::size_t max_rules = 8;
  std::size_t max_rhs = 2;
};

inline std::string type_name(std::size_t i) { return std::string(1, static_cast<char>('A' + i)); }

// Random valid system. Every type gets at least one rule; probabilities are random
// positive rationals summing to 1 per lhs.
inline Pbpp random_system(std::mt19937_64 &rng, const RandomSpec &spec) {
  Pbpp sys;
  std::size_t n = 1 + rng() % spec.max_types;
  for (std::size_t i = 0; i < n; ++i) sys.names.push_back(type_name(i));
  std::size_t m = n + rng() % (spec.max_rules - n + 1);
  std::vector<std::size_t> per(n, 1);
  for (std::size_t i = n; i < m; ++i) ++per[rng() % n];
  for (TypeId x = 0; x < n; ++x) {
    std::vector<std::uint64_t> w(per[x]);
    std::uint64_t total = 0;
    for (auto &v : w) total += (v = 1 + rng() % 9);
    for (std::size_t j = 0; j < per[x]; ++j) {
      Rule r;
      r.lhs = x;
      r.rhs.assign(n, 0);
      std::size_t len = rng() % (spec.max_rhs + 1);
      for (std::size_t k = 0; k < len; ++k) ++r.rhs[rng() % n];
      r.prob = Rational(w[j], total);
      sys.rules.push_back(r);
    }
  }
  return sys;
}

// Same rule structure, fresh positive probabilities.
inline Pbpp reweight(const Pbpp &sys, std::mt19937_64 &rng) {
  Pbpp out = sys;
  for (TypeId x = 0; x < sys.size(); ++x) {
    auto idx = sys.rules_of(x);
    std::vector<std::uint64_t> w(idx.size());
    std::uint64_t total = 0;
    for (auto &v : w) total += (v = 1 + rng() % 97);
    for (std::size_t j = 0; j < idx.size(); ++j) out.rules[idx[j]].prob = Rational(w[j], total);
  }
  return out;
}

} // namespace testing
