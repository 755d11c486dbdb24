#include "doctest.h"
#include "oracles.hpp"
#include "pbpp/mdp_fair.hpp"

using namespace testing;

namespace {
Pbpp growth() { return parse_pbpp("types X Y\nrule X -> X X : 1\nrule Y -> Y Y : 1\n"); }
Vec ext(const Pbpp &s, const std::string &counts, Vec ages) { return make_ext(cfg(s, counts), ages); }
} // namespace

TEST_CASE("ext_successor") {
  Pbpp s = parse_pbpp("types X Y\nrule X -> Y : 1/2\nrule X -> X X : 1/2\nrule Y -> Y : 1\n");
  CHECK(ext_successor(ext(s, "X Y", {0, 0}), 0, s.rules[0]) == ext(s, "Y Y", {0, 1}));
  CHECK(ext_successor(ext(s, "X", {0, 0}), 0, s.rules[1]) == ext(s, "X X", {0, 0}));
  // X vanishes; its age is cleared.
  CHECK(ext_successor(ext(s, "X Y", {2, 1}), 0, s.rules[0]) == ext(s, "Y Y", {0, 2}));
  CHECK(ext_successor(ext(s, "X Y", {2, 1}), 1, s.rules[2]) == ext(s, "X Y", {3, 0}));
  // A freshly spawned type starts at age 0.
  CHECK(ext_successor(ext(s, "X", {0, 0}), 0, s.rules[0]) == ext(s, "Y", {0, 0}));
  CHECK_THROWS_AS(ext_successor(ext(s, "Y", {0, 0}), 0, s.rules[0]), Error);
}

TEST_CASE("build_G") {
  Pbpp s = growth();
  UpSet g = build_G(upset(s, {"Y Y"}), 2, 2);
  CHECK(g == UpSet::minimize(4, {ext(s, "Y Y", {0, 0}), ext(s, "X", {2, 0}), ext(s, "Y", {0, 2})}));
  CHECK(build_G(UpSet(2), 2, 2).basis().size() == 2);
  CHECK_THROWS_AS(build_G(UpSet(2), 0, 2), Error);
}

TEST_CASE("pre_game") {
  Pbpp s = growth();
  CHECK(pre_game(s, UpSet::full(4)) == UpSet::full(4));
  CHECK(pre_game(s, UpSet(4)).empty());
  UpSet G = build_G(upset(s, {"X X"}), 2, 2);
  UpSet w1 = pre_game(s, G);
  CHECK_FALSE(G.contains(ext(s, "X", {0, 0})));
  CHECK(w1.contains(ext(s, "X", {0, 0})));
  CHECK_FALSE(w1.contains(ext(s, "Y", {0, 0})));
}

TEST_CASE("probability_win_region") {
  Pbpp s = parse_pbpp("types X Y\nrule X -> X : 1\nrule Y -> Y Y : 1\n");
  auto r = probability_win_region(s, upset(s, {"X X"}), 2);
  CHECK_FALSE(r.w.contains(ext(s, "Y", {0, 0})));
  CHECK_FALSE(r.w.contains(ext(s, "", {0, 0})));
  CHECK(r.w.contains(ext(s, "Y", {0, 2})));
  CHECK(r.failed_checks == 0);
  auto full = probability_win_region(s, UpSet::full(2), 2);
  CHECK(full.w == UpSet::full(4));
}

TEST_CASE("universal_kfair examples") {
  Pbpp d = parse_pbpp("types X Y\nrule X -> Y : 1\nrule Y -> Y : 1/2\nrule Y -> X : 1/2\n");
  auto v = universal_kfair(d, cfg(d, "X X"), upset(d, {"Y Y"}), 3);
  CHECK(v.answer);
  CHECK(v.failed_checks == 0);

  Pbpp g = growth();
  auto no = universal_kfair(g, cfg(g, "Y"), upset(g, {"X X"}), 2);
  CHECK_FALSE(no.answer);
  REQUIRE(no.witness);
  CHECK(replay_ext(g, *no.witness));

  Pbpp one = parse_pbpp("types X\nrule X -> X X : 1\n");
  CHECK(universal_kfair(one, cfg(one, "X"), upset(one, {"X X"}), 1).answer);

  // Here an unfair scheduler could starve X forever, but every 2-fair one covers.
  CHECK(universal_kfair(g, cfg(g, "X Y"), upset(g, {"X X"}), 2).answer);
}

TEST_CASE("property: ext_successor is monotone") {
  std::mt19937_64 rng(71);
  for (int round = 0; round < 300; ++round) {
    Pbpp sys = random_system(rng, {});
    std::size_t n = sys.size();
    Vec a(2 * n), b(2 * n);
    for (TypeId y = 0; y < n; ++y) {
      a[y] = rng() % 3;
      a[n + y] = a[y] ? rng() % 3 : 0;
      b[y] = a[y] + rng() % 2;
      b[n + y] = b[y] ? a[n + y] + rng() % 2 : 0;
    }
    for (const Rule &r : sys.rules)
      if (a[r.lhs] > 0) CHECK(leq(ext_successor(a, r.lhs, r), ext_successor(b, r.lhs, r)));
  }
}

TEST_CASE("property: agreement with explicit game oracle") {
  std::mt19937_64 rng(73);
  int compared = 0;
  for (int round = 0; round < 400 && compared < 150; ++round) {
    Pbpp sys = random_system(rng, {3, 6, 2});
    std::size_t n = sys.size();
    Config a0(n);
    for (auto &c : a0) c = rng() % 2;
    UpSet f = UpSet::minimize(n, {unit(n, rng() % n, 1 + rng() % 2)});
    auto truth = fair_game_oracle(sys, a0, f, 3, 3);
    if (!truth) continue;
    auto v = universal_kfair(sys, a0, f, 3);
    ++compared;
    CHECK(v.failed_checks == 0);
    CHECK(*truth == v.answer);
    if (!v.answer) {
      REQUIRE(v.witness);
      CHECK(replay_ext(sys, *v.witness));
    }
  }
  CHECK(compared >= 50);
}
