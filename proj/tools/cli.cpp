#include "cli.hpp"

#include "pbpp/gadgets.hpp"
#include "pbpp/mc_cover.hpp"
#include "pbpp/mdp_exist.hpp"
#include "pbpp/mdp_fair.hpp"
#include "pbpp/qstates.hpp"
#include "pbpp/simulate.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace pbpp::cli {

namespace {

using json = nlohmann::json;

struct InputError : Error {
  using Error::Error;
};

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// FNV-1a, 64 bit.
std::string digest(const std::string &text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json config_json(const Pbpp &sys, const Config &a) {
  json o = json::object();
  for (TypeId x = 0; x < a.size(); ++x)
    if (a[x]) o[x < sys.size() ? sys.names[x] : "#" + std::to_string(x)] = a[x];
  return o;
}

json upset_json(const Pbpp &sys, const UpSet &u) {
  json a = json::array();
  for (const Vec &b : u.basis()) a.push_back(config_json(sys, b));
  return a;
}

std::string rule_text(const Pbpp &sys, std::size_t r) {
  return r == kBottom ? "ε" : format_rule(sys, sys.rules[r]);
}

json path_json(const Pbpp &sys, const Path &p) {
  json steps = json::array();
  for (const Step &s : p.steps) steps.push_back({{"rule", rule_text(sys, s.rule)}, {"config", config_json(sys, s.next)}});
  return {{"start", config_json(sys, p.start)}, {"steps", steps}};
}

// Extended states: counts then ages.
json ext_path_json(const Pbpp &sys, const Path &p) {
  const std::size_t n = sys.size();
  auto state = [&](const Vec &s) {
    return json{{"config", config_json(sys, Vec(s.begin(), s.begin() + n))},
                {"ages", config_json(sys, Vec(s.begin() + n, s.end()))}};
  };
  json steps = json::array();
  for (const Step &s : p.steps) {
    json j = state(s.next);
    j["rule"] = rule_text(sys, s.rule);
    steps.push_back(j);
  }
  return {{"start", state(p.start)}, {"steps", steps}};
}

UpSet target_of(const Instance &inst) {
  if (inst.target.empty()) throw InputError("input has no target line");
  return UpSet::minimize(inst.sys.size(), inst.target);
}

struct Common {
  std::string file;
  std::string format = "text";
  std::size_t nodes = 1'000'000;
  std::size_t petri_budget = 1'000'000;
  std::size_t game_iters = 1'000;
};

struct Report {
  std::string command;
  json result = json::object();
  json stats = json::object();
  std::string digest;
};

void emit(std::ostream &out, const Report &r, double wall_ms) {
  json j;
  j["command"] = r.command;
  j["result"] = r.result;
  j["stats"] = r.stats;
  j["stats"]["wall_ms"] = wall_ms;
  j["version"] = kVersion;
  if (!r.digest.empty()) j["input_digest"] = r.digest;
  out << j.dump(2) << '\n';
}

CounterOp parse_op(const std::string &w, std::size_t line, std::size_t col) {
  if (w == "skip") return CounterOp::Skip;
  if (w == "inc") return CounterOp::Inc;
  if (w == "dec") return CounterOp::Dec;
  if (w == "zero") return CounterOp::Zero;
  throw ParseError(line, col, "unknown counter operation '" + w + "'");
}

// Format: "controls N", "counters N", "bound N", "start Q", "final Q",
// "trans SRC OP... DST"; '#' starts a comment.
CounterMachine parse_machine(const std::string &text) {
  CounterMachine cm;
  std::istringstream in(text);
  std::string raw;
  std::size_t lineno = 0;
  bool have_counters = false;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw.substr(0, raw.find('#'));
    std::vector<std::pair<std::string, std::size_t>> toks;
    for (std::size_t i = 0; i < line.size();) {
      if (std::isspace(static_cast<unsigned char>(line[i]))) {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
      toks.push_back({line.substr(i, j - i), i + 1});
      i = j;
    }
    if (toks.empty()) continue;
    auto num = [&](std::size_t k) -> std::size_t {
      if (k >= toks.size()) throw ParseError(lineno, line.size() + 1, "expected a number");
      const auto &[w, col] = toks[k];
      if (w.empty() || w.find_first_not_of("0123456789") != std::string::npos || w.size() > 9)
        throw ParseError(lineno, col, "expected a number, got '" + w + "'");
      return std::stoul(w);
    };
    const std::string &kw = toks[0].first;
    std::size_t expected = 2;
    if (kw == "controls") cm.controls = num(1);
    else if (kw == "counters") cm.counters = num(1), have_counters = true;
    else if (kw == "bound") cm.bound = static_cast<Count>(num(1));
    else if (kw == "start") cm.start = num(1);
    else if (kw == "final") cm.final = num(1);
    else if (kw == "trans") {
      if (!have_counters) throw ParseError(lineno, 1, "counters must be declared before transitions");
      CounterMachine::Transition t;
      t.src = num(1);
      for (std::size_t i = 0; i < cm.counters; ++i) {
        if (2 + i >= toks.size()) throw ParseError(lineno, line.size() + 1, "expected a counter operation");
        t.ops.push_back(parse_op(toks[2 + i].first, lineno, toks[2 + i].second));
      }
      t.dst = num(2 + cm.counters);
      expected = 3 + cm.counters;
      cm.transitions.push_back(std::move(t));
    } else {
      throw ParseError(lineno, toks[0].second, "unknown keyword '" + kw + "'");
    }
    if (toks.size() > expected) throw ParseError(lineno, toks[expected].second, "unexpected '" + toks[expected].first + "'");
  }
  return cm;
}

std::vector<Count> parse_params(const std::string &s) {
  std::vector<Count> out;
  std::istringstream in(s);
  for (std::string w; std::getline(in, w, ',');) {
    if (w.empty() || w.find_first_not_of("0123456789") != std::string::npos || w.size() > 6)
      throw InputError("--params expects comma-separated integers, got '" + s + "'");
    out.push_back(static_cast<Count>(std::stoul(w)));
  }
  return out;
}

Report check_cover(const Common &c, const Instance &inst) {
  UpSet f = target_of(inst);
  Report r;
  CoverVerdict v = almost_sure_cover(inst.sys, inst.init, f, c.nodes);
  r.result["answer"] = v.answer;
  if (v.witness) {
    r.result["witness"] = path_json(inst.sys, *v.witness);
    r.result["witness_replays"] = replay(inst.sys, *v.witness);
  }
  r.stats["nodes"] = v.stats.nodes;
  r.stats["depth"] = v.stats.depth;
  return r;
}

Report check_exist(const Common &c, const Instance &inst) {
  UpSet f = target_of(inst);
  Report r;
  ExistOptions opt;
  opt.petri_budget = c.petri_budget;
  ExistVerdict v = exist_scheduler(inst.sys, inst.init, f, opt);
  r.result["answer"] = v.answer;
  if (v.scheduler) {
    json states = json::array();
    for (const auto &[q, x] : v.scheduler->choice)
      states.push_back({{"config", config_json(inst.sys, q)}, {"action", x == kBottom ? "ε" : inst.sys.names[x]}});
    r.result["scheduler"] = {{"states", states}, {"fallback", "cautious"}, {"K", v.scheduler->K}};
  }
  r.stats["states"] = v.states;
  r.stats["t_queries"] = v.t_queries;
  r.stats["inexact"] = v.inexact;
  return r;
}

Report check_fair(const Common &c, const Instance &inst, Count k) {
  UpSet f = target_of(inst);
  Report r;
  FairOptions opt;
  opt.node_budget = c.nodes;
  opt.max_iters = c.game_iters;
  FairVerdict v = universal_kfair(inst.sys, inst.init, f, k, opt);
  r.result["answer"] = v.answer;
  r.result["k"] = k;
  if (v.k_below_types) r.result["warning"] = "k is below the number of types";
  if (v.witness) {
    r.result["witness"] = ext_path_json(inst.sys, *v.witness);
    r.result["witness_replays"] = replay_ext(inst.sys, *v.witness);
  }
  r.stats["iterations"] = v.iterations;
  r.stats["basis_size"] = v.basis_size;
  r.stats["failed_checks"] = v.failed_checks;
  r.stats["nodes"] = v.stats.nodes;
  return r;
}

Report check_qstates(const Instance &inst) {
  UpSet f = target_of(inst);
  auto q = as_qset(f);
  if (!q) throw InputError("target has a minimal element that is not a single type; use check-cover");
  Report r;
  r.result["answer"] = qstates_almost_sure(inst.sys, inst.init, *q);
  json qs = json::array();
  for (TypeId x = 0; x < q->size(); ++x)
    if ((*q)[x]) qs.push_back(inst.sys.names[x]);
  r.result["q"] = qs;
  return r;
}

Report run_simulate(const Instance &inst, const SimConfig &cfg) {
  UpSet f = target_of(inst);
  SimResult s = estimate_cover(inst.sys, inst.init, f, cfg);
  Report r;
  r.result = {{"fraction", s.fraction}, {"covered", s.covered}, {"censored", s.censored},
              {"runs", s.runs}, {"seed", s.seed}, {"steps", cfg.max_steps},
              {"semantics", cfg.semantics == Semantics::Proc ? "proc" : "type"}};
  return r;
}

Report run_validate(const Instance &inst) {
  validate(inst.sys);
  Report r;
  r.result = {{"valid", true}, {"types", inst.sys.size()}, {"rules", inst.sys.rules.size()},
              {"init", config_json(inst.sys, inst.init)}};
  if (!inst.target.empty()) r.result["target"] = upset_json(inst.sys, target_of(inst));
  return r;
}

struct Bench {
  std::string family, params, machine;
  bool verify = false;
};

Report gen_bench(const Bench &b, std::string &instance_text) {
  std::vector<Count> p = parse_params(b.params);
  auto need = [&](std::size_t n, const char *what) {
    if (p.size() != n) throw InputError("--params for " + b.family + " expects " + what);
    for (Count x : p)
      if (x == 0) throw InputError("--params values must be positive");
  };
  Report r;
  r.result["family"] = b.family;
  ConstrainedInstance inst;
  std::optional<Gadget> g;
  std::optional<CounterMachine> cm;
  if (b.family == "producer") {
    need(1, "k");
    g = base_producer(p[0]);
  } else if (b.family == "consumer") {
    if (p.size() == 1) p.push_back(p[0]);
    if (p.size() != 2 || p[0] == 0) throw InputError("--params for consumer expects k[,inputs]");
    g = base_consumer(p[0]);
  } else if (b.family == "loop") {
    need(1, "k");
    g = loop_of(p[0]);
  } else if (b.family == "tower") {
    need(2, "h,k");
    if (p[0] > 3) throw InputError("tower height above 3 is not supported");
    g = tower(p[0], p[1]);
  } else if (b.family == "cm") {
    if (b.machine.empty()) throw InputError("--family cm needs --machine FILE");
    try {
      cm = parse_machine(read_file(b.machine));
      inst = compile_counter_machine(*cm, base_producer(cm->bound));
    } catch (const ParseError &e) {
      throw InputError(b.machine + ": " + e.what());
    } catch (const InputError &) {
      throw;
    } catch (const Error &e) {
      throw InputError(b.machine + ": " + e.what());
    }
  } else {
    throw InputError("unknown family '" + b.family + "'");
  }
  if (g) {
    inst = as_instance(*g);
    if (g->kind == GadgetKind::Consumer) inst.init[g->port] += p[1];
    r.result["calibration"] = g->calibration;
    r.result["places"] = g->net.size();
  }
  GeneratedInstance fin = finalize_instance(inst);
  Instance out{fin.sys, fin.alpha0, fin.f.basis()};
  instance_text = print_instance(out);
  r.result["instance"] = instance_text;
  r.stats["types"] = fin.sys.size();
  r.stats["rules"] = fin.sys.rules.size();
  r.stats["target_basis"] = fin.f.basis().size();
  if (b.verify) {
    if (g) {
      CalibrationReport v = verify_gadget(*g);
      r.result["verify"] = {{"ok", v.ok}, {"observed", v.observed}, {"detail", v.detail}};
      r.stats["verify_states"] = v.states;
    } else {
      bool halts = machine_halts(*cm);
      ExploreResult e = explore(inst);
      r.result["verify"] = {{"ok", halts == !e.finals.empty()}, {"halts", halts}, {"goal_reachable", !e.finals.empty()}};
      r.stats["verify_states"] = e.states;
    }
  }
  return r;
}

void text_out(std::ostream &out, const Report &r, const std::string &instance_text) {
  if (r.command == "gen-bench") {
    out << "# family " << r.result["family"].get<std::string>() << '\n';
    if (r.result.contains("verify")) out << "# verify " << r.result["verify"].dump() << '\n';
    out << instance_text;
    return;
  }
  if (r.command == "simulate") {
    out << "fraction: " << r.result["fraction"].get<double>() << " (" << r.result["covered"] << "/"
        << r.result["runs"] << " covered, " << r.result["censored"] << " censored)\n";
    return;
  }
  if (r.command == "validate") {
    out << "valid: " << r.result["types"] << " types, " << r.result["rules"] << " rules\n";
    return;
  }
  out << "answer: " << (r.result["answer"].get<bool>() ? "true" : "false") << '\n';
  if (r.result.contains("warning")) out << "warning: " << r.result["warning"].get<std::string>() << '\n';
  if (r.result.contains("scheduler"))
    for (const auto &s : r.result["scheduler"]["states"])
      out << "  choose " << s["action"].get<std::string>() << " at " << s["config"].dump() << '\n';
  if (r.result.contains("witness")) {
    const json &w = r.result["witness"];
    out << "witness: " << w["start"].dump() << '\n';
    for (const auto &s : w["steps"]) out << "  " << s["rule"].get<std::string>() << "  =>  " << s["config"].dump() << '\n';
  }
  for (auto it = r.stats.begin(); it != r.stats.end(); ++it) out << it.key() << ": " << it.value() << '\n';
}

} // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Qualitative reachability for probabilistic branching processes"};
  app.require_subcommand(1);
  Common c;
  auto common = [&](CLI::App *s, bool needs_file = true) {
    if (needs_file) s->add_option("file", c.file, "instance in the text format")->required();
    s->add_option("--format", c.format, "json or text")->check(CLI::IsMember({"json", "text"}));
  };
  auto *cover = app.add_subcommand("check-cover", "almost-sure coverage under the process semantics");
  common(cover);
  cover->add_option("--nodes", c.nodes, "search node budget (default 1e6)");
  auto *exist = app.add_subcommand("check-exist", "existence of an almost-surely covering scheduler");
  common(exist);
  exist->add_option("--petri-budget", c.petri_budget, "Petri exploration budget (default 1e6)");
  Count k = 0;
  auto *fair = app.add_subcommand("check-fair", "coverage under every k-fair scheduler");
  common(fair);
  fair->add_option("--k", k, "fairness bound")->required()->check(CLI::PositiveNumber);
  fair->add_option("--nodes", c.nodes, "search node budget (default 1e6)");
  fair->add_option("--game-iters", c.game_iters, "game fixed-point iterations (default 1e3)");
  auto *qs = app.add_subcommand("qstates", "polynomial check for targets given by single types");
  common(qs);
  SimConfig sim;
  std::string sem = "proc";
  auto *simc = app.add_subcommand("simulate", "Monte Carlo estimate of coverage");
  common(simc);
  simc->add_option("--runs", sim.runs, "number of runs");
  simc->add_option("--steps", sim.max_steps, "steps per run");
  simc->add_option("--seed", sim.seed, "seed");
  simc->add_option("--semantics", sem, "proc or type")->check(CLI::IsMember({"proc", "type"}));
  Bench bench;
  auto *gen = app.add_subcommand("gen-bench", "emit a generated instance");
  common(gen, false);
  gen->add_option("--family", bench.family, "producer, consumer, loop, tower or cm")
      ->required()
      ->check(CLI::IsMember({"producer", "consumer", "loop", "tower", "cm"}));
  gen->add_option("--params", bench.params, "k | k[,inputs] | h,k");
  gen->add_option("--machine", bench.machine, "counter machine file (cm)");
  gen->add_flag("--verify", bench.verify, "run the exhaustive calibration check");
  auto *val = app.add_subcommand("validate", "parse and check an instance");
  common(val);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp &) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError &e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
  for (CLI::App *s : app.get_subcommands()) {
    if (s->get_help_ptr() && s->get_help_ptr()->count()) {
      out << s->help();
      return kOk;
    }
  }
  if (gen->parsed() && bench.family != "cm" && bench.params.empty()) {
    err << "error: --params is required for --family " << bench.family << '\n';
    return kInputError;
  }

  const auto t0 = std::chrono::steady_clock::now();
  const bool as_json = c.format == "json";
  const std::string command = app.get_subcommands().front()->get_name();
  std::string text;
  Report rep;
  std::string instance_text;
  std::optional<Instance> inst;
  try {
    if (!gen->parsed()) {
      text = read_file(c.file);
      inst = parse_instance(text);
    }
    if (cover->parsed()) rep = check_cover(c, *inst);
    else if (exist->parsed()) rep = check_exist(c, *inst);
    else if (fair->parsed()) rep = check_fair(c, *inst, k);
    else if (qs->parsed()) rep = check_qstates(*inst);
    else if (simc->parsed()) {
      sim.semantics = sem == "proc" ? Semantics::Proc : Semantics::Type;
      rep = run_simulate(*inst, sim);
    } else if (val->parsed()) rep = run_validate(*inst);
    else rep = gen_bench(bench, instance_text);
  } catch (const ParseError &e) {
    err << c.file << ": error: " << e.what() << '\n';
    return kInputError;
  } catch (const BudgetExhausted &e) {
    Report u;
    u.command = command;
    u.result["answer"] = "unknown";
    u.result["reason"] = e.what();
    u.digest = text.empty() ? "" : digest(text);
    double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    if (as_json) emit(out, u, ms);
    else out << "answer: unknown (" << e.what() << ")\n";
    return kUnknown;
  } catch (const InputError &e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const Error &e) {
    err << (c.file.empty() ? "" : c.file + ": ") << "error: " << e.what() << '\n';
    return kInputError;
  }
  rep.command = command;
  if (!text.empty()) rep.digest = digest(text);
  double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  if (as_json) emit(out, rep, ms);
  else text_out(out, rep, instance_text);
  return kOk;
}

} // namespace pbpp::cli
