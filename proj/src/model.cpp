#include "pbpp/model.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace pbpp {

ParseError::ParseError(std::size_t line, std::size_t column, const std::string &msg)
    : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg),
      line_(line), column_(column) {}

std::optional<TypeId> Pbpp::find(std::string_view name) const {
  for (TypeId i = 0; i < names.size(); ++i)
    if (names[i] == name) return i;
  return std::nullopt;
}

std::vector<std::size_t> Pbpp::rules_of(TypeId x) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < rules.size(); ++i)
    if (rules[i].lhs == x) out.push_back(i);
  return out;
}

void validate(const Pbpp &sys) {
  const std::size_t n = sys.size();
  std::vector<Rational> sum(n, Rational(0));
  std::vector<bool> has(n, false);
  for (const Rule &r : sys.rules) {
    if (r.lhs >= n || r.rhs.size() != n) throw Error("rule over wrong alphabet");
    if (r.prob <= 0 || r.prob > 1)
      throw Error("probability of rule " + format_rule(sys, r) + " not in (0,1]");
    sum[r.lhs] += r.prob;
    has[r.lhs] = true;
  }
  for (TypeId x = 0; x < n; ++x) {
    if (!has[x]) throw Error("type " + sys.names[x] + " has no rule");
    if (sum[x] != 1)
      throw Error("probabilities of " + sys.names[x] + "-rules sum to " + sum[x].str() + ", not 1");
  }
}

namespace {

enum class Tok { Ident, Number, Arrow, Colon, Bar, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t col;
};

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool ident_char(unsigned char c) {
  return std::isalnum(c) || c == '_' || c == '\'' || c >= 0x80;
}

std::vector<Token> lex(std::string_view line, std::size_t lineno) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    unsigned char c = line[i];
    if (c == '#') break;
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    std::size_t start = i;
    if (c == '-' && i + 1 < line.size() && line[i + 1] == '>') {
      out.push_back({Tok::Arrow, "->", start + 1});
      i += 2;
    } else if (c == ':') {
      out.push_back({Tok::Colon, ":", start + 1});
      ++i;
    } else if (c == '|') {
      out.push_back({Tok::Bar, "|", start + 1});
      ++i;
    } else if (ident_start(c)) {
      while (i < line.size() && ident_char(line[i])) ++i;
      out.push_back({Tok::Ident, std::string(line.substr(start, i - start)), start + 1});
    } else if (std::isdigit(c)) {
      // Swallow everything up to whitespace so "0.5" or "1e3" is reported as one literal.
      while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])) && line[i] != '#')
        ++i;
      out.push_back({Tok::Number, std::string(line.substr(start, i - start)), start + 1});
    } else {
      throw ParseError(lineno, start + 1, std::string("unexpected character '") + line[i] + "'");
    }
  }
  out.push_back({Tok::End, "", line.size() + 1});
  return out;
}

Rational parse_rational(const Token &t, std::size_t lineno) {
  const std::string &s = t.text;
  auto slash = s.find('/');
  auto digits = [](std::string_view v) {
    return !v.empty() && std::all_of(v.begin(), v.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  std::string_view num = std::string_view(s).substr(0, slash);
  std::string_view den = slash == std::string::npos ? std::string_view("1")
                                                    : std::string_view(s).substr(slash + 1);
  if (!digits(num) || !digits(den))
    throw ParseError(lineno, t.col, "probability '" + s + "' is not of the form p/q");
  boost::multiprecision::cpp_int p{std::string(num)}, q{std::string(den)};
  if (q == 0) throw ParseError(lineno, t.col, "zero denominator in '" + s + "'");
  return Rational(p, q);
}

struct LineParser {
  const std::vector<Token> &toks;
  std::size_t lineno;
  std::size_t pos = 1;

  const Token &peek() const { return toks[pos]; }

  Config multiset(const Pbpp &sys) {
    Config c(sys.size(), 0);
    while (peek().kind == Tok::Ident) {
      auto id = sys.find(peek().text);
      if (!id) throw ParseError(lineno, peek().col, "unknown type '" + peek().text + "'");
      ++c[*id];
      ++pos;
    }
    return c;
  }

  void expect(Tok k, const char *what) {
    if (peek().kind != k)
      throw ParseError(lineno, peek().col, std::string("expected ") + what);
    ++pos;
  }
};

} // namespace

Instance parse_instance(std::string_view text) {
  Instance inst;
  Pbpp &sys = inst.sys;
  bool seen_init = false, seen_target = false;
  std::vector<std::pair<std::size_t, std::size_t>> rule_pos; // (line, col) of each rule
  std::size_t lineno = 0, types_line = 1;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++lineno;
    start = nl + 1;

    auto toks = lex(line, lineno);
    if (toks.front().kind == Tok::End) continue;
    if (toks.front().kind != Tok::Ident)
      throw ParseError(lineno, toks.front().col, "expected a keyword");
    const std::string &kw = toks.front().text;
    LineParser lp{toks, lineno};

    if (kw == "types") {
      if (!sys.rules.empty() || seen_init || seen_target)
        throw ParseError(lineno, 1, "types must be declared before use");
      types_line = lineno;
      while (lp.peek().kind == Tok::Ident) {
        if (sys.find(lp.peek().text))
          throw ParseError(lineno, lp.peek().col, "duplicate type '" + lp.peek().text + "'");
        sys.names.push_back(lp.peek().text);
        ++lp.pos;
      }
    } else if (kw == "rule") {
      Rule r;
      const Token &lhs = lp.peek();
      if (lhs.kind != Tok::Ident) throw ParseError(lineno, lhs.col, "expected rule lhs");
      auto id = sys.find(lhs.text);
      if (!id) throw ParseError(lineno, lhs.col, "unknown type '" + lhs.text + "'");
      r.lhs = *id;
      ++lp.pos;
      lp.expect(Tok::Arrow, "'->'");
      r.rhs = lp.multiset(sys);
      lp.expect(Tok::Colon, "':' before probability");
      if (lp.peek().kind != Tok::Number)
        throw ParseError(lineno, lp.peek().col, "expected a probability");
      r.prob = parse_rational(lp.peek(), lineno);
      if (r.prob <= 0 || r.prob > 1)
        throw ParseError(lineno, lp.peek().col, "probability must lie in (0,1]");
      ++lp.pos;
      rule_pos.emplace_back(lineno, toks.front().col);
      sys.rules.push_back(std::move(r));
    } else if (kw == "init") {
      if (seen_init) throw ParseError(lineno, 1, "duplicate init line");
      seen_init = true;
      inst.init = lp.multiset(sys);
    } else if (kw == "target") {
      if (seen_target) throw ParseError(lineno, 1, "duplicate target line");
      seen_target = true;
      for (;;) {
        inst.target.push_back(lp.multiset(sys));
        if (lp.peek().kind != Tok::Bar) break;
        ++lp.pos;
      }
    } else {
      throw ParseError(lineno, toks.front().col, "unknown keyword '" + kw + "'");
    }
    if (lp.peek().kind != Tok::End)
      throw ParseError(lineno, lp.peek().col, "unexpected '" + lp.peek().text + "'");
  }

  if (!seen_init) inst.init.assign(sys.size(), 0);
  std::vector<Rational> sum(sys.size(), Rational(0));
  std::vector<std::size_t> last(sys.size(), 0);
  for (std::size_t i = 0; i < sys.rules.size(); ++i) {
    sum[sys.rules[i].lhs] += sys.rules[i].prob;
    last[sys.rules[i].lhs] = i;
  }
  for (TypeId x = 0; x < sys.size(); ++x) {
    if (sys.rules_of(x).empty())
      throw ParseError(types_line, 1, "type " + sys.names[x] + " has no rule");
    if (sum[x] != 1) {
      auto [l, c] = rule_pos[last[x]];
      throw ParseError(l, c, "probabilities of " + sys.names[x] + "-rules sum to " + sum[x].str() +
                                 ", not 1");
    }
  }
  return inst;
}

Pbpp parse_pbpp(std::string_view text) { return parse_instance(text).sys; }

namespace {
std::string words(const Pbpp &sys, const Config &a) {
  std::string s;
  for (TypeId x = 0; x < a.size(); ++x)
    for (Count k = 0; k < a[x]; ++k) {
      s += ' ';
      s += sys.names[x];
    }
  return s;
}
} // namespace

std::string print_instance(const Instance &inst) {
  const Pbpp &sys = inst.sys;
  std::ostringstream os;
  os << "types";
  for (const auto &n : sys.names) os << ' ' << n;
  os << '\n';
  for (const Rule &r : sys.rules)
    os << "rule " << sys.names[r.lhs] << " ->" << words(sys, r.rhs) << " : " << r.prob.str() << '\n';
  os << "init" << words(sys, inst.init) << '\n';
  if (!inst.target.empty()) {
    os << "target";
    for (std::size_t i = 0; i < inst.target.size(); ++i) {
      if (i) os << " |";
      os << words(sys, inst.target[i]);
    }
    os << '\n';
  }
  return os.str();
}

Count wt(const Config &a) {
  return static_cast<Count>(std::count_if(a.begin(), a.end(), [](Count c) { return c > 0; }));
}

std::uint64_t wp(const Config &a) {
  std::uint64_t s = 0;
  for (Count c : a) s += c;
  return s;
}

bool leq(const Vec &a, const Vec &b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] > b[i]) return false;
  return true;
}

bool is_empty(const Config &a) {
  return std::all_of(a.begin(), a.end(), [](Count c) { return c == 0; });
}

Config unit(std::size_t dim, TypeId x, Count n) {
  Config c(dim, 0);
  c[x] = n;
  return c;
}

Config make_config(const Pbpp &sys, const std::vector<std::string> &names) {
  Config c(sys.size(), 0);
  for (const auto &n : names) {
    auto id = sys.find(n);
    if (!id) throw Error("unknown type '" + n + "'");
    ++c[*id];
  }
  return c;
}

std::string format_config(const Pbpp &sys, const Config &a) {
  std::string s = words(sys, a);
  return s.empty() ? "ε" : s.substr(1);
}

std::string format_rule(const Pbpp &sys, const Rule &r) {
  return sys.names[r.lhs] + " -> " + format_config(sys, r.rhs);
}

bool enabled(const Config &a, const Rule &r) { return a[r.lhs] >= 1; }

Config apply_rule(const Config &a, const Rule &r) {
  if (!enabled(a, r)) throw Error("rule not enabled");
  Config out = a;
  --out[r.lhs];
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += r.rhs[i];
  return out;
}

std::vector<Step> successors(const Config &a, const Pbpp &sys) {
  std::vector<Step> out;
  if (is_empty(a)) {
    out.push_back({kBottom, a});
    return out;
  }
  for (TypeId x = 0; x < sys.size(); ++x) {
    if (a[x] == 0) continue;
    for (std::size_t i = 0; i < sys.rules.size(); ++i)
      if (sys.rules[i].lhs == x) out.push_back({i, apply_rule(a, sys.rules[i])});
  }
  return out;
}

} // namespace pbpp
