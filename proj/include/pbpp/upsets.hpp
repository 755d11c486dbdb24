#pragma once

#include "pbpp/model.hpp"

#include <cstddef>
#include <vector>

namespace pbpp {

// Upward-closed subset of N^dim, kept as its sorted antichain of minimal elements.
class UpSet {
public:
  explicit UpSet(std::size_t dim = 0) : dim_(dim) {}

  static UpSet minimize(std::size_t dim, std::vector<Vec> vs);
  static UpSet full(std::size_t dim) { return minimize(dim, {Vec(dim, 0)}); }

  std::size_t dim() const { return dim_; }
  const std::vector<Vec> &basis() const { return basis_; }
  bool empty() const { return basis_.empty(); }
  bool contains(const Vec &v) const;

  // Adds v; returns false if v was already covered.
  bool insert(const Vec &v);

  friend bool operator==(const UpSet &, const UpSet &) = default;

private:
  std::size_t dim_;
  std::vector<Vec> basis_;
};

UpSet intersect(const UpSet &a, const UpSet &b);
UpSet unite(const UpSet &a, const UpSet &b);

Vec rule_pre(const Vec &target, const Rule &r);
UpSet pre_star(const Pbpp &sys, const UpSet &f);

} // namespace pbpp
