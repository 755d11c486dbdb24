#pragma once

#include "pbpp/mc_cover.hpp"
#include "pbpp/model.hpp"
#include "pbpp/upsets.hpp"

#include <optional>

namespace pbpp {

// Extended states live in N^{2n}: counts in [0,n), ages in [n,2n).
Vec make_ext(const Config &counts, const Vec &ages);
Vec ext_start(const Config &counts);

Vec ext_successor(const Vec &s, TypeId x, const Rule &r);
std::vector<Step> ext_successors(const Vec &s, const Pbpp &sys);

UpSet build_G(const UpSet &f, Count k, std::size_t gamma_size);

struct PreGameStats {
  std::size_t candidates = 0;
  std::size_t failed_checks = 0; // basis elements whose direct evaluation disagrees
};

UpSet pre_game(const Pbpp &sys, const UpSet &w, PreGameStats *stats = nullptr);

struct GameRegion {
  UpSet w;
  std::size_t iterations = 0;
  std::size_t failed_checks = 0;
};

GameRegion probability_win_region(const Pbpp &sys, const UpSet &f, Count k,
                                  std::size_t max_iters = 1000);

struct FairVerdict {
  bool answer = false;
  std::optional<Path> witness;
  SearchStats stats;
  std::size_t iterations = 0;
  std::size_t basis_size = 0;
  std::size_t failed_checks = 0;
  bool k_below_types = false;
};

struct FairOptions {
  std::size_t node_budget = kUnlimited;
  std::size_t max_iters = 1000;
};

FairVerdict universal_kfair(const Pbpp &sys, const Config &alpha0, const UpSet &f, Count k,
                            const FairOptions &opt = {});

// Replays an extended-state path.
bool replay_ext(const Pbpp &sys, const Path &p);

} // namespace pbpp
