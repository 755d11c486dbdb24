#pragma once

#include "pbpp/model.hpp"
#include "pbpp/upsets.hpp"

#include <cstdint>
#include <functional>

namespace pbpp {

enum class Semantics { Type, Proc };

struct SimConfig {
  Semantics semantics = Semantics::Proc;
  std::uint64_t runs = 1000;
  std::uint64_t max_steps = 10000;
  std::uint64_t seed = 0;
};

// Counter-based generator: every (run seed, step) pair owns an independent stream.
class StepRng {
public:
  StepRng(std::uint64_t run_seed, std::uint64_t step) : key_(mix(run_seed ^ mix(step + 1))) {}

  std::uint64_t next();
  // Uniform in [0, n); n > 0.
  std::uint64_t below(std::uint64_t n);
  boost::multiprecision::cpp_int below(const boost::multiprecision::cpp_int &n);

  static std::uint64_t mix(std::uint64_t z);

private:
  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
};

// Picks an X-rule of a given type by its exact probability.
const Rule &choose_rule(const Pbpp &sys, TypeId x, StepRng &rng);

Config step_type(const Config &alpha, const Pbpp &sys, StepRng &rng);
Config step_proc(const Config &alpha, const Pbpp &sys, StepRng &rng);

struct SimResult {
  double fraction = 0;
  std::uint64_t covered = 0;
  std::uint64_t censored = 0;
  std::uint64_t runs = 0;
  std::uint64_t seed = 0;
};

SimResult estimate_cover(const Pbpp &sys, const Config &alpha0, const UpSet &f, const SimConfig &cfg);

// Scheduler-driven variant: chooser returns the type to fire in a nonempty configuration.
using Chooser = std::function<TypeId(const Config &)>;
SimResult estimate_cover(const Pbpp &sys, const Config &alpha0, const UpSet &f, const SimConfig &cfg,
                         const Chooser &chooser);

} // namespace pbpp
