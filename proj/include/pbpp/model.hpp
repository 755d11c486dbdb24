#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pbpp {

using Count = std::uint32_t;
using Vec = std::vector<Count>;
using Config = Vec;
using Rational = boost::multiprecision::cpp_rational;
using TypeId = std::size_t;

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
  ParseError(std::size_t line, std::size_t column, const std::string &msg);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

private:
  std::size_t line_, column_;
};

// Raised when a search hits its node/iteration budget.
class BudgetExhausted : public Error {
public:
  using Error::Error;
};

struct Rule {
  TypeId lhs = 0;
  Config rhs;
  Rational prob{1};
};

struct Pbpp {
  std::vector<std::string> names;
  std::vector<Rule> rules;

  std::size_t size() const { return names.size(); }
  std::optional<TypeId> find(std::string_view name) const;
  // Rule indices with the given lhs, in declaration order.
  std::vector<std::size_t> rules_of(TypeId x) const;
};

// Checks the rule-per-type and probability-sum invariants. Throws Error.
void validate(const Pbpp &sys);

// A system together with the optional init/target lines of the text format.
struct Instance {
  Pbpp sys;
  Config init;
  std::vector<Config> target;
};

Instance parse_instance(std::string_view text);
Pbpp parse_pbpp(std::string_view text);
std::string print_instance(const Instance &inst);

Count wt(const Config &a);
std::uint64_t wp(const Config &a);
bool leq(const Vec &a, const Vec &b);
bool is_empty(const Config &a);

Config unit(std::size_t dim, TypeId x, Count n = 1);
// Multiset from type names, e.g. {"X","X","Y"}.
Config make_config(const Pbpp &sys, const std::vector<std::string> &names);
// "X X Y", or "ε" for the empty configuration.
std::string format_config(const Pbpp &sys, const Config &a);
std::string format_rule(const Pbpp &sys, const Rule &r);

bool enabled(const Config &a, const Rule &r);
Config apply_rule(const Config &a, const Rule &r);

// Index into sys.rules, or kBottom for the ε self-loop.
inline constexpr std::size_t kBottom = static_cast<std::size_t>(-1);

struct Step {
  std::size_t rule;
  Config next;
};

std::vector<Step> successors(const Config &a, const Pbpp &sys);

} // namespace pbpp
