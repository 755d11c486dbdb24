#include "pbpp/gadgets.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace pbpp {

bool DownSet::contains(const Vec &v) const {
  for (const Vec &b : boxes) {
    bool in = true;
    for (std::size_t i = 0; i < dim && in; ++i) in = v[i] <= b[i];
    if (in) return true;
  }
  return false;
}

UpSet DownSet::complement() const {
  UpSet acc = UpSet::full(dim);
  for (const Vec &b : boxes) {
    std::vector<Vec> out;
    for (std::size_t i = 0; i < dim; ++i)
      if (b[i] != kInf) out.push_back(unit(dim, i, b[i] + 1));
    acc = intersect(acc, UpSet::minimize(dim, std::move(out)));
  }
  return acc;
}

DownSet intersect(const DownSet &a, const DownSet &b) {
  if (a.dim != b.dim) throw Error("down-set dimensions differ");
  DownSet out{a.dim, {}};
  for (const Vec &x : a.boxes)
    for (const Vec &y : b.boxes) {
      Vec z(a.dim);
      for (std::size_t i = 0; i < a.dim; ++i) z[i] = std::min(x[i], y[i]);
      out.boxes.push_back(std::move(z));
    }
  return out;
}

TypeId Skeleton::add(const std::string &name) {
  if (std::find(names.begin(), names.end(), name) != names.end())
    throw Error("duplicate place " + name);
  names.push_back(name);
  for (SRule &r : rules) r.rhs.push_back(0);
  return names.size() - 1;
}

std::size_t Skeleton::add_rule(TypeId lhs, const std::vector<TypeId> &rhs) {
  if (lhs >= size()) throw Error("rule lhs out of range");
  SRule r{lhs, Vec(size(), 0)};
  for (TypeId y : rhs) {
    if (y >= size()) throw Error("rule rhs out of range");
    ++r.rhs[y];
  }
  rules.push_back(std::move(r));
  return rules.size() - 1;
}

TypeId Skeleton::at(const std::string &name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw Error("unknown place " + name);
  return static_cast<TypeId>(it - names.begin());
}

namespace {

// Element of the forbidden set as sparse (place, count) pairs.
using Sparse = std::vector<std::pair<TypeId, Count>>;

Sparse pair_of(TypeId x, TypeId y) {
  if (x == y) return {{x, 2}};
  return {{x, 1}, {y, 1}};
}

std::string join(const Skeleton &s, const std::vector<TypeId> &xs) {
  std::string out;
  for (TypeId x : xs) out += (out.empty() ? "" : "_") + s.names[x];
  return out;
}

} // namespace

Constrained constraints_to_upset(const std::vector<Constraint> &cs, const Skeleton &ctx) {
  const std::size_t n0 = ctx.size(), r0 = ctx.rules.size();
  Constrained out;
  out.net = ctx;
  std::vector<Sparse> bad;
  // Blocker sets per original rule; one guard type per distinct set.
  std::vector<std::set<TypeId>> blockers(r0);
  auto check_place = [&](TypeId x) {
    if (x >= n0) throw Error("constraint references an unknown place");
  };

  std::vector<const Constraint *> atomics;
  for (const Constraint &c : cs) {
    switch (c.kind) {
    case Constraint::Kind::Incompatible:
      check_place(c.x);
      check_place(c.y);
      bad.push_back(pair_of(c.x, c.y));
      break;
    case Constraint::Kind::Unique:
      check_place(c.x);
      bad.push_back({{c.x, 2}});
      break;
    case Constraint::Kind::Blocks:
      check_place(c.x);
      if (c.rule >= r0) throw Error("constraint references an unknown rule");
      blockers[c.rule].insert(c.x);
      break;
    case Constraint::Kind::Atomic:
      for (TypeId x : c.inner) check_place(x);
      for (std::size_t r : c.inner_rules)
        if (r >= r0) throw Error("constraint references an unknown rule");
      if (c.initial.dim != c.inner.size() || c.final.dim != c.inner.size())
        throw Error("atomic constraint sets do not match the subnet");
      atomics.push_back(&c);
      break;
    case Constraint::Kind::Pattern:
      if (c.pattern.empty()) throw Error("empty forbidden pattern");
      for (auto [x, k] : c.pattern) check_place(x);
      bad.push_back(c.pattern);
      break;
    }
  }

  auto add_guard = [&](const std::string &base) {
    std::string name = "G_" + base;
    for (int i = 2; std::find(out.net.names.begin(), out.net.names.end(), name) != out.net.names.end(); ++i)
      name = "G_" + base + "_" + std::to_string(i);
    TypeId g = out.net.add(name);
    out.net.add_rule(g, {});
    return g;
  };

  for (std::size_t a = 0; a < atomics.size(); ++a) {
    const Constraint &c = *atomics[a];
    TypeId g = add_guard("atomic" + std::to_string(a));
    std::set<std::size_t> inside(c.inner_rules.begin(), c.inner_rules.end());
    for (std::size_t r = 0; r < r0; ++r)
      if (!inside.count(r)) ++out.net.rules[r].rhs[g];
    // Outside the union of the initial and final boxes.
    DownSet ok{c.inner.size(), c.initial.boxes};
    ok.boxes.insert(ok.boxes.end(), c.final.boxes.begin(), c.final.boxes.end());
    UpSet outside = ok.complement();
    for (const Vec &b : outside.basis()) {
      Sparse s{{g, 1}};
      for (std::size_t i = 0; i < b.size(); ++i)
        if (b[i]) s.push_back({c.inner[i], b[i]});
      bad.push_back(std::move(s));
    }
  }

  std::map<std::set<TypeId>, TypeId> guard_of;
  for (std::size_t r = 0; r < r0; ++r) {
    if (blockers[r].empty()) continue;
    auto it = guard_of.find(blockers[r]);
    if (it == guard_of.end()) {
      std::vector<TypeId> xs(blockers[r].begin(), blockers[r].end());
      TypeId g = add_guard(join(ctx, xs));
      for (TypeId x : xs) bad.push_back({{g, 1}, {x, 1}});
      it = guard_of.emplace(blockers[r], g).first;
    }
    ++out.net.rules[r].rhs[it->second];
  }

  const std::size_t n = out.net.size();
  out.guard.assign(n, false);
  for (TypeId x = n0; x < n; ++x) out.guard[x] = true;
  std::vector<Vec> vs;
  for (const Sparse &s : bad) {
    Vec v(n, 0);
    for (auto [x, k] : s) v[x] += k;
    vs.push_back(std::move(v));
  }
  out.forbidden = UpSet::minimize(n, std::move(vs));
  return out;
}

Embedding embed(Gadget &into, const Gadget &g, const std::string &prefix) {
  Embedding e;
  into.init.resize(into.net.size(), 0);
  into.caps.resize(into.net.size(), kInf);
  for (std::size_t x = 0; x < g.net.size(); ++x) {
    e.place.push_back(into.net.add(prefix + g.net.names[x]));
    into.init.push_back(0);
    into.caps.push_back(x < g.caps.size() ? g.caps[x] : kInf);
  }
  for (std::size_t x = 0; x < g.init.size(); ++x) into.init[e.place[x]] += g.init[x];
  for (const SRule &r : g.net.rules) {
    std::vector<TypeId> rhs;
    for (TypeId y = 0; y < r.rhs.size(); ++y)
      for (Count k = 0; k < r.rhs[y]; ++k) rhs.push_back(e.place[y]);
    e.rule.push_back(into.net.add_rule(e.place[r.lhs], rhs));
  }
  for (Constraint c : g.constraints) {
    c.x = e.place[c.x];
    c.y = e.place[c.y];
    c.rule = c.kind == Constraint::Kind::Blocks ? e.rule[c.rule] : c.rule;
    for (TypeId &x : c.inner) x = e.place[x];
    for (std::size_t &r : c.inner_rules) r = e.rule[r];
    for (auto &pk : c.pattern) pk.first = e.place[pk.first];
    into.constraints.push_back(std::move(c));
  }
  return e;
}

DownSet lift(const DownSet &d, const Embedding &e, std::size_t dim) {
  DownSet out{dim, {}};
  for (const Vec &b : d.boxes) {
    Vec v(dim, kInf);
    for (std::size_t i = 0; i < b.size(); ++i) v[e.place[i]] = b[i];
    out.boxes.push_back(std::move(v));
  }
  return out;
}

namespace {

// Box capping the listed places at zero.
DownSet empty_on(std::size_t dim, const std::vector<TypeId> &xs) {
  DownSet d = DownSet::all(dim);
  for (TypeId x : xs) d.boxes[0][x] = 0;
  return d;
}

Count pow2(Count k) {
  if (k >= 32) throw Error("calibration overflows");
  return Count(1) << k;
}

} // namespace

Gadget base_producer(Count k) {
  if (k == 0) throw Error("calibration must be at least 1");
  Gadget g;
  g.kind = GadgetKind::Producer;
  g.calibration = k;
  std::vector<TypeId> s;
  for (Count i = 1; i <= k; ++i) s.push_back(g.net.add("S" + std::to_string(i)));
  g.port = g.net.add("out");
  for (Count i = 0; i + 1 < k; ++i) g.net.add_rule(s[i], {s[i + 1], g.port});
  g.net.add_rule(s[k - 1], {g.port});
  g.init.assign(g.net.size(), 0);
  g.init[s[0]] = 1;
  g.final = empty_on(g.net.size(), s);
  return g;
}

Gadget base_consumer(Count k) {
  if (k == 0) throw Error("calibration must be at least 1");
  Gadget g;
  g.kind = GadgetKind::Consumer;
  g.calibration = k;
  g.port = g.net.add("in");
  TypeId t = g.net.add("tok");
  std::vector<TypeId> l, m;
  for (Count i = 0; i <= k; ++i) l.push_back(g.net.add("L" + std::to_string(i)));
  for (Count i = 0; i < k; ++i) m.push_back(g.net.add("M" + std::to_string(i)));
  std::size_t take = g.net.add_rule(g.port, {t});
  std::size_t clear = g.net.add_rule(t, {});
  g.constraints.push_back(Constraint::unique(t));
  for (Count i = 0; i < k; ++i) {
    g.net.add_rule(l[i], {m[i]});
    std::size_t adv = g.net.add_rule(m[i], {l[i + 1]});
    g.constraints.push_back(Constraint::blocks(m[i], take));
    g.constraints.push_back(Constraint::blocks(t, adv));
  }
  g.constraints.push_back(Constraint::blocks(l[k], take));
  for (TypeId x : l) g.constraints.push_back(Constraint::blocks(x, clear));
  g.init.assign(g.net.size(), 0);
  g.init[l[0]] = 1;
  g.caps.assign(g.net.size(), kInf);
  g.caps[g.port] = k; // at most k takes per run
  g.final = empty_on(g.net.size(), {g.port, t});
  return g;
}

Gadget make_loop(const Gadget &producer, const Gadget &consumer) {
  if (producer.kind != GadgetKind::Producer || consumer.kind != GadgetKind::Consumer)
    throw Error("make_loop expects a producer and a consumer");
  Gadget g;
  g.kind = GadgetKind::Loop;
  g.calibration = producer.calibration;
  Embedding ep = embed(g, producer, "p_");
  Embedding ec = embed(g, consumer, "c_");
  TypeId I = ep.place[producer.port], F = ec.place[consumer.port];
  TypeId a = g.net.add("A"), b = g.net.add("B"), c = g.net.add("C");
  TypeId ra = g.net.add("Ra"), rb = g.net.add("Rb"), rc = g.net.add("Rc");
  // Stages: producer, then cycling, then consumer.
  TypeId st1 = g.net.add("St1"), st2 = g.net.add("St2"), st3 = g.net.add("St3");
  const std::size_t n = g.net.size();
  g.init.resize(n, 0);
  g.caps.resize(n, kInf);
  g.init[ra] = 1;
  g.init[st1] = 1;
  std::vector<std::size_t> cyc{g.net.add_rule(I, {a}), g.net.add_rule(a, {b}), g.net.add_rule(b, {c}),
                               g.net.add_rule(c, {}), g.net.add_rule(ra, {rb}), g.net.add_rule(rb, {rc})};
  g.cycle_rule = g.net.add_rule(rc, {ra, F});
  cyc.push_back(g.cycle_rule);
  g.net.add_rule(st1, {st2});
  g.net.add_rule(st2, {st3});

  for (TypeId x : {a, b, c}) g.constraints.push_back(Constraint::unique(x));
  g.constraints.push_back(Constraint::incompatible(a, b));
  g.constraints.push_back(Constraint::incompatible(a, c));
  g.constraints.push_back(Constraint::incompatible(b, c));
  g.constraints.push_back(Constraint::incompatible(a, ra));
  g.constraints.push_back(Constraint::incompatible(b, rb));
  g.constraints.push_back(Constraint::incompatible(c, rc));
  for (std::size_t r : ep.rule)
    for (TypeId x : {st2, st3}) g.constraints.push_back(Constraint::blocks(x, r));
  for (std::size_t r : cyc)
    for (TypeId x : {st1, st3}) g.constraints.push_back(Constraint::blocks(x, r));
  for (std::size_t r : ec.rule)
    for (TypeId x : {st1, st2}) g.constraints.push_back(Constraint::blocks(x, r));
  // Leaving stage 1 needs a finished producer; stage 3 needs the cycling done.
  UpSet unfinished = lift(producer.final, ep, n).complement();
  for (const Vec &u : unfinished.basis())
    for (TypeId st : {st2, st3}) {
      std::vector<std::pair<TypeId, Count>> pat{{st, 1}};
      for (TypeId x = 0; x < n; ++x)
        if (u[x]) pat.push_back({x, u[x]});
      g.constraints.push_back(Constraint::forbid(std::move(pat)));
    }
  for (TypeId x : {I, a, b, c, rb, rc}) g.constraints.push_back(Constraint::incompatible(st3, x));

  g.phases = {ra, rb, rc};
  g.idle = {st1, st3};
  g.final = intersect(intersect(lift(producer.final, ep, n), lift(consumer.final, ec, n)),
                      empty_on(n, {I, a, b, c, rb, rc, st1, st2}));
  return g;
}

Gadget lift_producer(const Gadget &loop) {
  if (loop.kind != GadgetKind::Loop) throw Error("lift expects a loop");
  Gadget g;
  g.kind = GadgetKind::Producer;
  g.calibration = pow2(loop.calibration);
  Embedding el = embed(g, loop, "l_");
  TypeId ua = g.net.add("Ua"), ub = g.net.add("Ub"), uc = g.net.add("Uc");
  TypeId run = g.net.add("Run"), done = g.net.add("Done");
  g.port = g.net.add("out");
  g.init.resize(g.net.size(), 0);
  g.init[uc] = 1;
  g.init[run] = 1;
  std::size_t r1 = g.net.add_rule(ua, {ub});
  std::size_t r2 = g.net.add_rule(ub, {uc, uc});
  std::size_t r3 = g.net.add_rule(uc, {ua});
  g.net.add_rule(run, {done});
  std::size_t emit = g.net.add_rule(uc, {g.port});
  for (int i = 0; i < 3; ++i)
    g.constraints.push_back(Constraint::incompatible(std::array{ua, ub, uc}[i], el.place[loop.phases[i]]));
  g.constraints.push_back(Constraint::blocks(run, emit));
  for (std::size_t r : {r1, r2, r3, el.rule[loop.cycle_rule]})
    g.constraints.push_back(Constraint::blocks(done, r));
  for (std::size_t r : {r1, r2, r3})
    for (TypeId x : loop.idle) g.constraints.push_back(Constraint::blocks(el.place[x], r));
  const std::size_t n = g.net.size();
  // Done only once the loop has settled in its final set.
  UpSet unsettled = lift(loop.final, el, n).complement();
  for (const Vec &u : unsettled.basis()) {
    std::vector<std::pair<TypeId, Count>> pat{{done, 1}};
    for (TypeId x = 0; x < n; ++x)
      if (u[x]) pat.push_back({x, u[x]});
    g.constraints.push_back(Constraint::forbid(std::move(pat)));
  }
  g.final = intersect(lift(loop.final, el, n), empty_on(n, {ua, ub, uc, run}));
  return g;
}

Gadget lift_consumer(const Gadget &loop) {
  if (loop.kind != GadgetKind::Loop) throw Error("lift expects a loop");
  Gadget g;
  g.kind = GadgetKind::Consumer;
  g.calibration = pow2(loop.calibration);
  Embedding el = embed(g, loop, "l_");
  TypeId va = g.net.add("Va"), vb = g.net.add("Vb"), vc = g.net.add("Vc");
  TypeId tk = g.net.add("Tk"), t2 = g.net.add("T2"), fz = g.net.add("Fz");
  TypeId p1 = g.net.add("P1"), q2 = g.net.add("Q2"), p2 = g.net.add("P2"), q1 = g.net.add("Q1");
  g.port = vb;
  g.init.resize(g.net.size(), 0);
  g.init[q1] = 1;
  // Every round at least halves the tokens in Vb/Vc/Va and only one can
  // leave through Fz, so more than 2^k + 1 in any of them is a dead end.
  g.caps.resize(g.net.size(), kInf);
  for (TypeId x : {va, vb, vc}) g.caps[x] = g.calibration + 1;
  std::size_t take = g.net.add_rule(vb, {tk});
  std::vector<std::size_t> layer{take,
                                 g.net.add_rule(tk, {t2}),
                                 g.net.add_rule(t2, {}),
                                 g.net.add_rule(q1, {p1, vc}),
                                 g.net.add_rule(p1, {q2}),
                                 g.net.add_rule(q2, {p2}),
                                 g.net.add_rule(p2, {q1}),
                                 g.net.add_rule(vc, {va}),
                                 g.net.add_rule(va, {fz}),
                                 g.net.add_rule(va, {vb})};
  for (std::size_t r : layer)
    for (TypeId x : loop.idle) g.constraints.push_back(Constraint::blocks(el.place[x], r));
  for (int i = 0; i < 3; ++i)
    g.constraints.push_back(Constraint::incompatible(std::array{va, vb, vc}[i], el.place[loop.phases[i]]));
  g.constraints.push_back(Constraint::unique(tk));
  g.constraints.push_back(Constraint::unique(fz));
  g.constraints.push_back(Constraint::blocks(q1, take));
  g.constraints.push_back(Constraint::blocks(q2, take));
  // T2 is the trace of the second removal and must clear before the token moves on.
  g.constraints.push_back(Constraint::incompatible(t2, p1));
  g.constraints.push_back(Constraint::incompatible(t2, p2));
  for (TypeId x : {p1, p2, q2, tk}) g.constraints.push_back(Constraint::incompatible(va, x));
  const std::size_t n = g.net.size();
  g.final = intersect(lift(loop.final, el, n), empty_on(n, {va, vb, vc, tk, t2, p1, q2, p2}));
  return g;
}

Gadget loop_of(Count k) { return make_loop(base_producer(k), base_consumer(k)); }

Gadget tower(unsigned h, Count k) {
  if (h == 0) throw Error("tower height must be at least 1");
  Gadget loop = loop_of(k);
  for (unsigned i = 1; i < h; ++i) loop = make_loop(lift_producer(loop), lift_consumer(loop));
  return lift_producer(loop);
}

ConstrainedInstance as_instance(const Gadget &g) {
  Vec caps = g.caps;
  caps.resize(g.net.size(), kInf);
  return {g.net, g.constraints, g.init, g.final, caps};
}

} // namespace pbpp
