#include "pbpp/gadgets.hpp"

#include <deque>
#include <set>

namespace pbpp {

namespace {

void check_machine(const CounterMachine &cm) {
  if (cm.controls == 0) throw Error("counter machine has no control states");
  if (cm.start >= cm.controls || cm.final >= cm.controls) throw Error("start/final out of range");
  if (cm.bound == 0) throw Error("counter bound must be at least 1");
  for (const auto &t : cm.transitions) {
    if (t.src >= cm.controls || t.dst >= cm.controls) throw Error("transition control out of range");
    if (t.ops.size() != cm.counters) throw Error("transition needs one operation per counter");
  }
}

using Pattern = std::vector<std::pair<TypeId, Count>>;

} // namespace

bool machine_halts(const CounterMachine &cm) {
  check_machine(cm);
  using State = std::pair<std::size_t, std::vector<Count>>;
  std::set<State> seen;
  std::deque<State> queue;
  State s0{cm.start, std::vector<Count>(cm.counters, 0)};
  seen.insert(s0);
  queue.push_back(s0);
  while (!queue.empty()) {
    auto [q, vals] = queue.front();
    queue.pop_front();
    if (q == cm.final) return true;
    for (const auto &t : cm.transitions) {
      if (t.src != q) continue;
      std::vector<Count> next = vals;
      bool ok = true;
      for (std::size_t i = 0; i < cm.counters && ok; ++i) {
        switch (t.ops[i]) {
        case CounterOp::Skip: break;
        case CounterOp::Inc: ok = next[i] < cm.bound; ++next[i]; break;
        case CounterOp::Dec: ok = next[i] > 0; --next[i]; break;
        case CounterOp::Zero: ok = next[i] == 0; break;
        }
      }
      if (ok && seen.insert({t.dst, next}).second) queue.push_back({t.dst, next});
    }
  }
  return false;
}

ConstrainedInstance compile_counter_machine(const CounterMachine &cm, const Gadget &budget) {
  check_machine(cm);
  if (budget.kind != GadgetKind::Producer) throw Error("budget gadget must be a producer");
  if (budget.calibration != cm.bound) throw Error("budget producer is not calibrated to the bound");

  Gadget g;
  auto place = [&](const std::string &name) {
    TypeId x = g.net.add(name);
    g.init.resize(g.net.size(), 0);
    g.caps.resize(g.net.size(), kInf);
    return x;
  };
  TypeId init = place("INIT");
  g.init[init] = 1;
  std::vector<TypeId> q, step(7), x;
  for (std::size_t c = 0; c < cm.controls; ++c) q.push_back(place("Q" + std::to_string(c)));
  for (int j = 2; j <= 6; ++j) step[j] = place("Step" + std::to_string(j));
  for (std::size_t t = 0; t < cm.transitions.size(); ++t) x.push_back(place("X" + std::to_string(t)));

  std::vector<TypeId> sched{init};
  sched.insert(sched.end(), q.begin(), q.end());
  for (int j = 2; j <= 6; ++j) sched.push_back(step[j]);
  sched.insert(sched.end(), x.begin(), x.end());

  // Scheduler.
  g.net.add_rule(init, {q[cm.start]});
  for (std::size_t t = 0; t < cm.transitions.size(); ++t) {
    g.net.add_rule(q[cm.transitions[t].src], {step[2], x[t]});
    g.net.add_rule(x[t], {q[cm.transitions[t].dst]});
  }
  for (int j = 2; j < 6; ++j) g.net.add_rule(step[j], {step[j + 1]});
  std::size_t close = g.net.add_rule(step[6], {});
  for (TypeId xt : x) g.constraints.push_back(Constraint::blocks(xt, close));
  g.net.add_rule(q[cm.final], {});
  for (TypeId qc : q)
    for (int j = 2; j <= 5; ++j) g.constraints.push_back(Constraint::incompatible(qc, step[j]));

  // Blocker sets that confine a rule to one step of the round.
  std::vector<TypeId> only1{init}, only2{init}, only5{init};
  for (int j = 2; j <= 6; ++j) only1.push_back(step[j]);
  only1.insert(only1.end(), x.begin(), x.end());
  only2.insert(only2.end(), q.begin(), q.end());
  only5.insert(only5.end(), q.begin(), q.end());
  for (int j : {3, 4, 5, 6}) only2.push_back(step[j]);
  for (int j : {2, 3, 4, 6}) only5.push_back(step[j]);
  auto confine = [&](std::size_t r, const std::vector<TypeId> &blockers) {
    for (TypeId b : blockers) g.constraints.push_back(Constraint::blocks(b, r));
  };

  for (std::size_t i = 0; i < cm.counters; ++i) {
    const std::string id = std::to_string(i);
    Embedding ep = embed(g, budget, "k" + id + "_p_");
    TypeId cb = ep.place[budget.port];
    g.net.names[cb] = "Cb" + id;
    TypeId c = place("C" + id), b = place("B" + id), bb = place("Bb" + id);
    TypeId t;
    if (cm.bound >= 2) {
      Gadget cons = base_consumer(cm.bound - 1);
      Embedding ec = embed(g, cons, "k" + id + "_c_");
      t = ec.place[cons.port];
      g.net.names[t] = "T" + id;
      confine(ec.rule[0], only2); // the take rule
      TypeId l0 = ec.place[cons.net.at("L0")];
      for (Count j = 0; j < cm.bound; ++j) {
        if (j > 0) confine(g.net.add_rule(ec.place[cons.net.at("L" + std::to_string(j))], {l0}), only1);
        if (j + 1 < cm.bound) confine(g.net.add_rule(ec.place[cons.net.at("M" + std::to_string(j))], {l0}), only1);
      }
    } else {
      t = place("T" + id);
    }
    g.init.resize(g.net.size(), 0);
    g.caps.resize(g.net.size(), kInf);
    // Without a consumer a T token is never removed and blocks step 3, so a run
    // that fires a transfer reaches the goal just as well without it.
    if (cm.bound == 1) g.caps[t] = 0;

    // The budget producer must be finished before the first round.
    UpSet unfinished = lift(budget.final, ep, g.net.size()).complement();
    for (TypeId s : sched) {
      if (s == init) continue;
      for (const Vec &u : unfinished.basis()) {
        Pattern p{{s, 1}};
        for (TypeId y = 0; y < u.size(); ++y)
          if (u[y]) p.push_back({y, u[y]});
        g.constraints.push_back(Constraint::forbid(std::move(p)));
      }
    }

    confine(g.net.add_rule(c, {b, t}), only1);
    confine(g.net.add_rule(cb, {bb, t}), only1);
    confine(g.net.add_rule(b, {c}), only5);
    confine(g.net.add_rule(bb, {cb}), only5);
    std::vector<TypeId> only3{init};
    only3.insert(only3.end(), q.begin(), q.end());
    for (int j : {2, 4, 5, 6}) only3.push_back(step[j]);
    for (std::size_t k = 0; k < cm.transitions.size(); ++k) {
      CounterOp op = cm.transitions[k].ops[i];
      if (op != CounterOp::Inc && op != CounterOp::Dec) only3.push_back(x[k]);
    }
    confine(g.net.add_rule(c, {cb}), only3);
    confine(g.net.add_rule(cb, {c}), only3);

    g.constraints.push_back(Constraint::incompatible(step[3], t));
    g.constraints.push_back(Constraint::incompatible(step[6], b));
    g.constraints.push_back(Constraint::incompatible(step[6], bb));

    // Token layout required while in steps 2 and 4.
    for (std::size_t k = 0; k < cm.transitions.size(); ++k) {
      auto at = [&](int j, Pattern rest) {
        rest.push_back({step[j], 1});
        rest.push_back({x[k], 1});
        g.constraints.push_back(Constraint::forbid(std::move(rest)));
      };
      switch (cm.transitions[k].ops[i]) {
      case CounterOp::Skip: break;
      case CounterOp::Inc:
        at(2, {{c, 1}});
        at(2, {{cb, 2}});
        at(4, {{cb, 1}});
        at(4, {{c, 2}});
        break;
      case CounterOp::Dec:
        at(2, {{cb, 1}});
        at(2, {{c, 2}});
        at(4, {{c, 1}});
        at(4, {{cb, 2}});
        break;
      case CounterOp::Zero:
        for (int j : {2, 4}) {
          at(j, {{c, 1}});
          at(j, {{b, 1}});
        }
        break;
      }
    }
  }

  DownSet goal = DownSet::all(g.net.size());
  for (TypeId s : sched) goal.boxes[0][s] = 0;
  return {g.net, g.constraints, g.init, goal, g.caps};
}

GeneratedInstance finalize_instance(const ConstrainedInstance &g) {
  if (g.goal.dim != g.net.size() || g.init.size() != g.net.size())
    throw Error("goal or init does not match the net");
  Constrained c = constraints_to_upset(g.constraints, g.net);
  const std::size_t n = c.net.size();
  GeneratedInstance out;
  Pbpp &sys = out.sys;
  sys.names = c.net.names;
  auto fresh = [&](std::string name) {
    while (std::find(sys.names.begin(), sys.names.end(), name) != sys.names.end()) name += "'";
    sys.names.push_back(name);
    return sys.names.size() - 1;
  };
  const TypeId T = fresh("T"), T2 = fresh("T2");
  const std::size_t dim = sys.size();
  auto pad = [&](const Vec &v) {
    Vec w(dim, 0);
    std::copy(v.begin(), v.end(), w.begin());
    return w;
  };

  for (const SRule &r : c.net.rules) sys.rules.push_back({r.lhs, pad(r.rhs), 1});
  sys.rules.push_back({T, unit(dim, T2), 1});
  sys.rules.push_back({T2, Vec(dim, 0), 1});
  for (TypeId y = 0; y < n; ++y) {
    Vec rhs = unit(dim, T);
    ++rhs[y];
    sys.rules.push_back({T, rhs, 1});
  }
  std::vector<std::size_t> per(dim, 0);
  for (const Rule &r : sys.rules) ++per[r.lhs];
  for (TypeId y = 0; y < dim; ++y)
    if (per[y] == 0) {
      sys.rules.push_back({y, unit(dim, y), 1});
      per[y] = 1;
    }
  for (Rule &r : sys.rules) r.prob = Rational(1, per[r.lhs]);

  std::vector<Vec> vs;
  for (const Vec &b : c.forbidden.basis()) {
    Vec v = pad(b);
    ++v[T];
    vs.push_back(std::move(v));
  }
  UpSet leave = g.goal.complement();
  for (const Vec &b : leave.basis()) {
    Vec v = pad(b);
    ++v[T2];
    vs.push_back(std::move(v));
  }
  out.f = UpSet::minimize(dim, std::move(vs));
  out.alpha0 = pad(g.init);
  ++out.alpha0[T];
  validate(sys);
  return out;
}

} // namespace pbpp
