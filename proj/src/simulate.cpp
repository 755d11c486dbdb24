#include "pbpp/simulate.hpp"

#include <boost/integer/common_factor_rt.hpp>

namespace pbpp {

using boost::multiprecision::cpp_int;

std::uint64_t StepRng::mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t StepRng::next() { return mix(key_ + 0x632be59bd9b4e019ULL * ++ctr_); }

std::uint64_t StepRng::below(std::uint64_t n) {
  // Rejection sampling over the largest multiple of n.
  const std::uint64_t limit = ~std::uint64_t(0) - (~std::uint64_t(0) % n);
  for (;;) {
    std::uint64_t r = next();
    if (r < limit) return r % n;
  }
}

cpp_int StepRng::below(const cpp_int &n) {
  if (n <= cpp_int(~std::uint64_t(0))) return cpp_int(below(static_cast<std::uint64_t>(n)));
  const unsigned bits = msb(n) + 1;
  for (;;) {
    cpp_int r = 0;
    for (unsigned b = 0; b < bits; b += 64) r = (r << 64) | cpp_int(next());
    r &= (cpp_int(1) << bits) - 1;
    if (r < n) return r;
  }
}

const Rule &choose_rule(const Pbpp &sys, TypeId x, StepRng &rng) {
  auto idx = sys.rules_of(x);
  if (idx.empty()) throw Error("type has no rule");
  if (idx.size() == 1) return sys.rules[idx[0]];
  cpp_int den = 1;
  for (auto i : idx) den = boost::integer::lcm(den, denominator(sys.rules[i].prob));
  cpp_int u = rng.below(den);
  cpp_int acc = 0;
  for (auto i : idx) {
    const Rational &p = sys.rules[i].prob;
    acc += numerator(p) * (den / denominator(p));
    if (u < acc) return sys.rules[i];
  }
  return sys.rules[idx.back()];
}

namespace {
TypeId pick_type(const Config &a, Semantics sem, StepRng &rng) {
  if (sem == Semantics::Type) {
    std::uint64_t k = rng.below(wt(a));
    for (TypeId x = 0; x < a.size(); ++x)
      if (a[x] > 0 && k-- == 0) return x;
  } else {
    std::uint64_t k = rng.below(wp(a));
    for (TypeId x = 0; x < a.size(); ++x) {
      if (k < a[x]) return x;
      k -= a[x];
    }
  }
  throw Error("no type to schedule");
}

Config step(const Config &alpha, const Pbpp &sys, StepRng &rng, Semantics sem) {
  if (is_empty(alpha)) return alpha;
  TypeId x = pick_type(alpha, sem, rng);
  return apply_rule(alpha, choose_rule(sys, x, rng));
}

SimResult run_all(const Pbpp &sys, const Config &alpha0, const UpSet &f, const SimConfig &cfg,
                  const std::function<TypeId(const Config &, StepRng &)> &pick) {
  if (cfg.runs == 0 || cfg.max_steps == 0) throw Error("runs and max_steps must be positive");
  SimResult res;
  res.runs = cfg.runs;
  res.seed = cfg.seed;
  for (std::uint64_t run = 0; run < cfg.runs; ++run) {
    const std::uint64_t run_seed = cfg.seed + run;
    Config cur = alpha0;
    bool hit = f.contains(cur);
    std::uint64_t t = 0;
    while (!hit && t < cfg.max_steps && !is_empty(cur)) {
      StepRng rng(run_seed, t);
      TypeId x = pick(cur, rng);
      cur = apply_rule(cur, choose_rule(sys, x, rng));
      hit = f.contains(cur);
      ++t;
    }
    if (hit)
      ++res.covered;
    else if (!is_empty(cur))
      ++res.censored;
  }
  res.fraction = static_cast<double>(res.covered) / static_cast<double>(res.runs);
  return res;
}
} // namespace

Config step_type(const Config &alpha, const Pbpp &sys, StepRng &rng) {
  return step(alpha, sys, rng, Semantics::Type);
}

Config step_proc(const Config &alpha, const Pbpp &sys, StepRng &rng) {
  return step(alpha, sys, rng, Semantics::Proc);
}

SimResult estimate_cover(const Pbpp &sys, const Config &alpha0, const UpSet &f, const SimConfig &cfg) {
  return run_all(sys, alpha0, f, cfg,
                 [&](const Config &a, StepRng &rng) { return pick_type(a, cfg.semantics, rng); });
}

SimResult estimate_cover(const Pbpp &sys, const Config &alpha0, const UpSet &f, const SimConfig &cfg,
                         const Chooser &chooser) {
  return run_all(sys, alpha0, f, cfg, [&](const Config &a, StepRng &) { return chooser(a); });
}

} // namespace pbpp
