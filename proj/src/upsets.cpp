#include "pbpp/upsets.hpp"

#include <algorithm>
#include <deque>

namespace pbpp {

namespace {
void check_dim(std::size_t want, const Vec &v) {
  if (v.size() != want)
    throw Error("dimension mismatch: expected " + std::to_string(want) + ", got " +
                std::to_string(v.size()));
}
} // namespace

UpSet UpSet::minimize(std::size_t dim, std::vector<Vec> vs) {
  for (const Vec &v : vs) check_dim(dim, v);
  // Sorting by total size first means a vector can only be dominated by an earlier one.
  std::sort(vs.begin(), vs.end(), [](const Vec &a, const Vec &b) {
    auto sa = wp(a), sb = wp(b);
    return sa != sb ? sa < sb : a < b;
  });
  UpSet out(dim);
  for (Vec &v : vs) {
    bool covered = std::any_of(out.basis_.begin(), out.basis_.end(),
                               [&](const Vec &b) { return leq(b, v); });
    if (!covered) out.basis_.push_back(std::move(v));
  }
  std::sort(out.basis_.begin(), out.basis_.end());
  return out;
}

bool UpSet::contains(const Vec &v) const {
  check_dim(dim_, v);
  return std::any_of(basis_.begin(), basis_.end(), [&](const Vec &b) { return leq(b, v); });
}

bool UpSet::insert(const Vec &v) {
  if (contains(v)) return false;
  std::erase_if(basis_, [&](const Vec &b) { return leq(v, b); });
  basis_.insert(std::lower_bound(basis_.begin(), basis_.end(), v), v);
  return true;
}

UpSet intersect(const UpSet &a, const UpSet &b) {
  if (a.dim() != b.dim()) throw Error("dimension mismatch in intersect");
  std::vector<Vec> vs;
  for (const Vec &x : a.basis())
    for (const Vec &y : b.basis()) {
      Vec m(a.dim());
      for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::max(x[i], y[i]);
      vs.push_back(std::move(m));
    }
  return UpSet::minimize(a.dim(), std::move(vs));
}

UpSet unite(const UpSet &a, const UpSet &b) {
  if (a.dim() != b.dim()) throw Error("dimension mismatch in union");
  std::vector<Vec> vs = a.basis();
  vs.insert(vs.end(), b.basis().begin(), b.basis().end());
  return UpSet::minimize(a.dim(), std::move(vs));
}

Vec rule_pre(const Vec &target, const Rule &r) {
  check_dim(r.rhs.size(), target);
  Vec a(target.size());
  for (std::size_t y = 0; y < a.size(); ++y) {
    std::int64_t need = static_cast<std::int64_t>(target[y]) + (y == r.lhs ? 1 : 0) -
                        static_cast<std::int64_t>(r.rhs[y]);
    need = std::max<std::int64_t>(need, y == r.lhs ? 1 : 0);
    a[y] = static_cast<Count>(std::max<std::int64_t>(need, 0));
  }
  return a;
}

UpSet pre_star(const Pbpp &sys, const UpSet &f) {
  check_dim(sys.size(), Vec(f.dim()));
  UpSet acc = f;
  std::deque<Vec> work(f.basis().begin(), f.basis().end());
  while (!work.empty()) {
    Vec b = std::move(work.front());
    work.pop_front();
    // Elements evicted by a smaller one contribute nothing new (rule_pre is monotone).
    if (!std::binary_search(acc.basis().begin(), acc.basis().end(), b)) continue;
    for (const Rule &r : sys.rules) {
      Vec p = rule_pre(b, r);
      if (acc.insert(p)) work.push_back(std::move(p));
    }
  }
  return acc;
}

} // namespace pbpp
