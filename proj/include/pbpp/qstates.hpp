#pragma once

#include "pbpp/model.hpp"
#include "pbpp/upsets.hpp"

#include <optional>
#include <vector>

namespace pbpp {

// Set of types; the target is the union of their single-type upward closures.
using QSet = std::vector<bool>;

// Returns the QSet if every minimal element of f is a unit vector.
std::optional<QSet> as_qset(const UpSet &f);
UpSet qset_upset(const QSet &q);

std::vector<bool> q_prime(const Pbpp &sys, const QSet &q);

// Types that can derive the empty word in the pruned grammar.
std::vector<bool> nullable_types(const Pbpp &sys, const QSet &q);

bool qstates_almost_sure(const Pbpp &sys, const Config &alpha0, const QSet &q);

} // namespace pbpp
