// Acceptance run: one PASS/FAIL line per criterion.
#include "cli.hpp"
#include "oracles.hpp"
#include "pbpp/gadgets.hpp"
#include "pbpp/mc_cover.hpp"
#include "pbpp/mdp_exist.hpp"
#include "pbpp/mdp_fair.hpp"
#include "pbpp/qstates.hpp"
#include "pbpp/simulate.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace testing;
using O = CounterOp;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string note;
  void fail(const std::string &why) {
    if (pass) note = why;
    pass = false;
  }
};

std::string write_tmp(const std::string &name, const std::string &text) {
  fs::path dir = fs::temp_directory_path() / "pbpp_acceptance";
  fs::create_directories(dir);
  fs::path p = dir / name;
  std::ofstream(p) << text;
  return p.string();
}

json run_cli(std::vector<std::string> args, int *code = nullptr) {
  std::ostringstream out, err;
  args.push_back("--format");
  args.push_back("json");
  int c = pbpp::cli::run(args, out, err);
  if (code) *code = c;
  if (c != pbpp::cli::kOk && c != pbpp::cli::kUnknown) return json{{"error", err.str()}};
  return json::parse(out.str());
}

const char *kGrowth = "types X Y\nrule X -> X X : 1\nrule Y -> Y Y : 1\n";

Outcome growth_markov_chain() {
  Outcome o;
  auto t0 = Clock::now();
  json a = run_cli({"check-cover", write_tmp("c1a.pbpp", std::string(kGrowth) + "init X Y\ntarget X X\n")});
  if (a["result"]["answer"] != true) o.fail("alpha0 = XY did not answer true");
  json b = run_cli({"check-cover", write_tmp("c1b.pbpp", std::string(kGrowth) + "init Y\ntarget X X\n")});
  if (b["result"]["answer"] != false) o.fail("alpha0 = Y did not answer false");
  else if (!b["result"]["witness"]["steps"].empty()) o.fail("witness for alpha0 = Y is not the empty path");
  else if (b["result"]["witness_replays"] != true) o.fail("witness does not replay");
  double s = seconds_since(t0);
  if (s >= 1) o.fail("runtime " + std::to_string(s) + " s");
  o.note += (o.note.empty() ? "" : "; ") + std::to_string(s) + " s";
  return o;
}

Outcome growth_mdp() {
  Outcome o;
  auto t0 = Clock::now();
  auto ask = [&](const char *init) {
    return run_cli({"check-exist", write_tmp(std::string("c2_") + init + ".pbpp",
                                             std::string(kGrowth) + "init " + init + "\ntarget X X\n")});
  };
  if (ask("X")["result"]["answer"] != true) o.fail("alpha0 = X did not answer true");
  if (ask("Y")["result"]["answer"] != false) o.fail("alpha0 = Y did not answer false");
  json xy = run_cli({"check-exist", write_tmp("c2_XY.pbpp", std::string(kGrowth) + "init X Y\ntarget X X\n")});
  if (xy["result"]["answer"] != true) o.fail("alpha0 = XY did not answer true");
  bool chose_x = false;
  for (const auto &s : xy["result"]["scheduler"]["states"])
    if (s["config"] == json{{"X", 1}, {"Y", 1}}) chose_x = s["action"] == "X";
  if (!chose_x) o.fail("scheduler does not choose X at XY");
  // The synthesized scheduler covers almost surely; always choosing Y never does.
  Pbpp sys = parse_pbpp(kGrowth);
  UpSet f = upset(sys, {"X X"});
  ExistVerdict v = exist_scheduler(sys, cfg(sys, "X Y"), f);
  SimConfig sc;
  sc.runs = 200;
  sc.max_steps = 200;
  sc.seed = 7;
  if (!v.scheduler || estimate_cover(sys, cfg(sys, "X Y"), f, sc, *v.scheduler).fraction < 0.99)
    o.fail("synthesized scheduler does not cover in simulation");
  if (estimate_cover(sys, cfg(sys, "X Y"), f, sc, [](const Config &) { return TypeId(1); }).fraction != 0)
    o.fail("always-Y scheduler covers");
  double s = seconds_since(t0);
  if (s >= 5) o.fail("runtime " + std::to_string(s) + " s");
  o.note += (o.note.empty() ? "" : "; ") + std::to_string(s) + " s";
  return o;
}

Outcome three_way() {
  Outcome o;
  auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  int compared = 0, unknown = 0, systems = 0, yes = 0;
  while (systems < 40) {
    Pbpp sys = random_system(rng, {});
    const std::size_t n = sys.size();
    Config a0(n);
    for (auto &c : a0) c = rng() % 2;
    QSet q(n, false);
    q[rng() % n] = true;
    ++systems;
    UpSet f = qset_upset(q);
    bool qs = qstates_almost_sure(sys, a0, q);
    yes += qs;
    bool cover = almost_sure_cover(sys, a0, f, 1'000'000).answer;
    bool exist = false;
    try {
      exist = exist_scheduler(sys, a0, f).answer;
    } catch (const BudgetExhausted &) {
      o.fail("check-exist returned unknown");
      continue;
    }
    if (qs != cover || qs != exist) o.fail("qstates/check-cover/check-exist disagree on system " + std::to_string(systems));
    FairOptions fo;
    fo.node_budget = 1'000'000;
    try {
      bool fair = universal_kfair(sys, a0, f, static_cast<Count>(n + 1), fo).answer;
      ++compared;
      if (fair != qs) o.fail("check-fair disagrees on system " + std::to_string(systems));
    } catch (const BudgetExhausted &) {
      ++unknown;
    }
  }
  if (unknown * 10 > systems) o.fail("check-fair unknown on more than 10%");
  double s = seconds_since(t0);
  if (s >= 600) o.fail("runtime " + std::to_string(s) + " s");
  o.note += (o.note.empty() ? "" : "; ") + std::to_string(systems) + " systems (" + std::to_string(yes) + " true), check-fair compared " +
            std::to_string(compared) + ", unknown " + std::to_string(unknown) + ", " + std::to_string(s) + " s";
  return o;
}

Outcome markov_oracle() {
  Outcome o;
  auto t0 = Clock::now();
  std::mt19937_64 rng(4242);
  int closed = 0, tried = 0, yes = 0;
  while (closed < 60 && tried < 5000) {
    ++tried;
    Pbpp sys = random_system(rng, {});
    const std::size_t n = sys.size();
    Config a0(n);
    for (auto &c : a0) c = rng() % 3;
    std::vector<Vec> vs;
    for (std::size_t k = 1 + rng() % 2; k > 0; --k) {
      Vec v(n);
      for (auto &c : v) c = rng() % 3;
      vs.push_back(v);
    }
    UpSet f = UpSet::minimize(n, vs);
    auto truth = mc_oracle(sys, a0, f, 6);
    if (!truth) continue;
    ++closed;
    yes += *truth;
    if (almost_sure_cover(sys, a0, f).answer != *truth) o.fail("mismatch on closed system " + std::to_string(closed));
  }
  if (closed < 50) o.fail("only " + std::to_string(closed) + " closed systems");
  double s = seconds_since(t0);
  if (s >= 300) o.fail("runtime " + std::to_string(s) + " s");
  o.note += (o.note.empty() ? "" : "; ") + std::to_string(closed) + " closed systems (" + std::to_string(yes) + " true), " +
            std::to_string(s) + " s";
  return o;
}

Outcome fair_oracle() {
  Outcome o;
  std::mt19937_64 rng(99);
  int closed = 0, tried = 0;
  while (closed < 30 && tried < 5000) {
    ++tried;
    Pbpp sys = random_system(rng, {3, 6, 2});
    const std::size_t n = sys.size();
    Config a0(n);
    for (auto &c : a0) c = rng() % 2;
    Vec v(n);
    for (auto &c : v) c = rng() % 3;
    UpSet f = UpSet::minimize(n, {v});
    auto truth = fair_game_oracle(sys, a0, f, 3, 3);
    if (!truth) continue;
    ++closed;
    try {
      if (universal_kfair(sys, a0, f, 3).answer != *truth) o.fail("mismatch on closed system " + std::to_string(closed));
    } catch (const BudgetExhausted &) {
      o.fail("check-fair returned unknown on closed system " + std::to_string(closed));
    }
  }
  if (closed < 20) o.fail("only " + std::to_string(closed) + " closed systems");
  o.note += (o.note.empty() ? "" : "; ") + std::to_string(closed) + " closed systems";
  return o;
}

struct CorpusItem {
  std::string name;
  Instance inst;
};

std::vector<CorpusItem> load_corpus() {
  std::vector<CorpusItem> out;
  std::vector<fs::path> files;
  for (const auto &e : fs::directory_iterator(PBPP_CORPUS_DIR))
    if (e.path().extension() == ".pbpp") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto &p : files) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    out.push_back({p.filename().string(), parse_instance(ss.str())});
  }
  return out;
}

struct Decisions {
  bool cover, exist, fair;
  std::optional<bool> qs;
  bool operator==(const Decisions &) const = default;
};

Decisions decide(const Pbpp &sys, const Config &a0, const UpSet &f) {
  Decisions d{almost_sure_cover(sys, a0, f).answer, exist_scheduler(sys, a0, f).answer,
              universal_kfair(sys, a0, f, static_cast<Count>(sys.size() + 1)).answer, std::nullopt};
  if (auto q = as_qset(f)) d.qs = qstates_almost_sure(sys, a0, *q);
  return d;
}

Outcome probability_irrelevance(const std::vector<CorpusItem> &corpus) {
  Outcome o;
  std::mt19937_64 rng(5);
  int checks = 0;
  for (const auto &item : corpus) {
    UpSet f = UpSet::minimize(item.inst.sys.size(), item.inst.target);
    try {
      Decisions base = decide(item.inst.sys, item.inst.init, f);
      for (int r = 0; r < 5; ++r) {
        ++checks;
        if (!(decide(reweight(item.inst.sys, rng), item.inst.init, f) == base))
          o.fail("decision changed on " + item.name);
      }
    } catch (const BudgetExhausted &) {
      o.fail("budget exhausted on " + item.name);
    }
  }
  o.note += (o.note.empty() ? "" : "; ") + std::to_string(corpus.size()) + " instances x 5 reweightings";
  return o;
}

Outcome statistical(const std::vector<CorpusItem> &corpus) {
  Outcome o;
  SimConfig sc;
  sc.runs = 1000;
  sc.max_steps = 10000;
  sc.seed = 12345;
  sc.semantics = Semantics::Proc;
  std::string fr;
  for (const auto &item : corpus) {
    UpSet f = UpSet::minimize(item.inst.sys.size(), item.inst.target);
    CoverVerdict v = almost_sure_cover(item.inst.sys, item.inst.init, f);
    if (v.answer) {
      double p = estimate_cover(item.inst.sys, item.inst.init, f, sc).fraction;
      char buf[64];
      std::snprintf(buf, sizeof buf, "%s%s %.3f", fr.empty() ? "" : ", ", item.name.c_str(), p);
      fr += buf;
      if (p < 0.95) o.fail(item.name + " estimate below 0.95");
    } else if (!v.witness || !replay(item.inst.sys, *v.witness)) {
      o.fail(item.name + " witness does not replay");
    }
  }
  o.note += (o.note.empty() ? "" : "; ") + fr;
  return o;
}

Outcome calibration() {
  Outcome o;
  auto t0 = Clock::now();
  auto check = [&](const std::string &what, const Gadget &g, std::vector<Count> observed) {
    CalibrationReport r = verify_gadget(g);
    if (!r.ok) o.fail(what + ": " + r.detail);
    if (!observed.empty() && r.observed != observed) o.fail(what + ": " + r.detail);
  };
  for (Count k = 1; k <= 4; ++k) {
    std::string ks = std::to_string(k);
    check("producer " + ks, base_producer(k), {k});
    check("consumer " + ks, base_consumer(k), {});
    check("loop " + ks, loop_of(k), {k});
  }
  for (Count k = 1; k <= 4; ++k) {
    check("lift_producer of loop " + std::to_string(k), lift_producer(loop_of(k)), {Count(1) << k});
    check("lift_consumer of loop " + std::to_string(k), lift_consumer(loop_of(k)), {});
  }
  check("lifted loop 4", make_loop(lift_producer(loop_of(2)), lift_consumer(loop_of(2))), {4});
  check("tower(2,2)", tower(2, 2), {16});
  double s = seconds_since(t0);
  if (s >= 600) o.fail("runtime " + std::to_string(s) + " s");
  o.note += (o.note.empty() ? "" : "; ") + std::to_string(s) + " s";
  return o;
}

CounterMachine machine(std::size_t controls, std::vector<CounterMachine::Transition> ts, std::size_t fin,
                       Count bound) {
  CounterMachine cm;
  cm.controls = controls;
  cm.counters = 2;
  cm.transitions = std::move(ts);
  cm.final = fin;
  cm.bound = bound;
  return cm;
}

Outcome counter_machines() {
  Outcome o;
  auto t0 = Clock::now();
  std::vector<std::pair<std::string, CounterMachine>> ms{
      {"inc-both", machine(2, {{0, {O::Inc, O::Inc}, 1}}, 1, 2)},
      {"zero-after-inc", machine(3, {{0, {O::Inc, O::Skip}, 1}, {1, {O::Zero, O::Skip}, 2}}, 2, 2)},
      {"transfer",
       machine(3, {{0, {O::Inc, O::Skip}, 0}, {0, {O::Dec, O::Inc}, 1}, {1, {O::Zero, O::Skip}, 2}}, 2, 3)},
      {"fill-then-move",
       machine(3, {{0, {O::Inc, O::Skip}, 0}, {0, {O::Skip, O::Zero}, 1}, {1, {O::Dec, O::Inc}, 2}}, 2, 3)},
      {"dec-from-zero", machine(2, {{0, {O::Dec, O::Skip}, 1}}, 1, 4)},
  };
  int halting = 0;
  std::string detail;
  for (const auto &[name, cm] : ms) {
    bool halts = machine_halts(cm);
    halting += halts;
    GeneratedInstance fin = finalize_instance(compile_counter_machine(cm, base_producer(cm.bound)));
    try {
      CoverVerdict v = almost_sure_cover(fin.sys, fin.alpha0, fin.f, 20'000'000);
      if (v.answer != !halts) o.fail(name + ": check-cover does not equal NOT(halting)");
      if (v.witness && !replay(fin.sys, *v.witness)) o.fail(name + ": witness does not replay");
      detail += (detail.empty() ? "" : ", ") + name + (halts ? " halts" : " runs forever");
    } catch (const BudgetExhausted &) {
      o.fail(name + ": node budget exhausted");
    }
  }
  if (halting == 0 || halting == static_cast<int>(ms.size())) o.fail("machines are not a mix");
  double s = seconds_since(t0);
  if (s >= 600) o.fail("runtime " + std::to_string(s) + " s");
  o.note += (o.note.empty() ? "" : "; ") + detail + "; " + std::to_string(s) + " s";
  return o;
}

Outcome kfair_instance() {
  Outcome o;
  const char *text = "types X Y\nrule X -> Y : 1\nrule Y -> Y : 1/2\nrule Y -> X : 1/2\ninit X X\ntarget Y Y\n";
  json r = run_cli({"check-fair", write_tmp("c10.pbpp", text), "--k", "3"});
  if (r["result"]["answer"] != true) o.fail("check-fair did not answer true");
  Instance inst = parse_instance(text);
  auto truth = fair_game_oracle(inst.sys, inst.init, UpSet::minimize(2, inst.target), 3, 3);
  if (!truth) o.fail("oracle exploration not closed");
  else if (*truth != true) o.fail("oracle disagrees");
  return o;
}

} // namespace

int main() {
  std::vector<CorpusItem> corpus = load_corpus();
  std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"markov chain instance", growth_markov_chain},
      {"mdp existential instance", growth_mdp},
      {"three-way equivalence", three_way},
      {"brute-force markov chain oracle", markov_oracle},
      {"brute-force k-fair game oracle", fair_oracle},
      {"probability irrelevance", [&] { return probability_irrelevance(corpus); }},
      {"statistical consistency", [&] { return statistical(corpus); }},
      {"gadget calibration", calibration},
      {"counter-machine pipeline", counter_machines},
      {"k-fair derived instance", kfair_instance},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception &e) {
      o.fail(std::string("exception: ") + e.what());
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first;
    if (!o.note.empty()) std::cout << " (" << o.note << ")";
    std::cout << std::endl;
  }
  return failed ? 1 : 0;
}
