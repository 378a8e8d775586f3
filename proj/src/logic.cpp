#include "ethos/logic.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <set>
#include <unordered_map>

namespace ethos::logic {

// ---------------------------------------------------------------------------
// Terms and atoms

Term Term::constant(std::string name) { return Term{Kind::Constant, std::move(name), {}}; }
Term Term::variable(std::string name) { return Term{Kind::Variable, std::move(name), {}}; }
Term Term::compound(std::string functor, std::vector<Term> args) {
  return Term{Kind::Compound, std::move(functor), std::move(args)};
}

bool Term::isGround() const {
  if (kind == Kind::Variable) return false;
  return std::all_of(args.begin(), args.end(), [](const Term& t) { return t.isGround(); });
}

bool Term::operator==(const Term& o) const {
  return kind == o.kind && name == o.name && args == o.args;
}

std::strong_ordering Term::operator<=>(const Term& o) const {
  if (auto c = kind <=> o.kind; c != 0) return c;
  if (auto c = name <=> o.name; c != 0) return c;
  return std::lexicographical_compare_three_way(args.begin(), args.end(), o.args.begin(),
                                                o.args.end());
}

bool Atom::isGround() const {
  return std::all_of(args.begin(), args.end(), [](const Term& t) { return t.isGround(); });
}

bool Atom::operator==(const Atom& o) const { return predicate == o.predicate && args == o.args; }

std::strong_ordering Atom::operator<=>(const Atom& o) const {
  if (auto c = predicate <=> o.predicate; c != 0) return c;
  return std::lexicographical_compare_three_way(args.begin(), args.end(), o.args.begin(),
                                                o.args.end());
}

bool Rule::isGround() const {
  if (head && !head->isGround()) return false;
  return std::all_of(body.begin(), body.end(), [](const Literal& l) { return l.atom.isGround(); });
}

// ---------------------------------------------------------------------------
// Lexing and parsing

namespace {

bool isIdentChar(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

enum class Tok { Ident, LParen, RParen, Comma, Period, If, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int line = 1;
  int column = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skipBlank();
    Token t;
    t.line = line_;
    t.column = col_;
    if (at_ >= src_.size()) return t;
    char c = src_[at_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      bool lower = std::islower(static_cast<unsigned char>(c));
      std::size_t start = at_;
      while (at_ < src_.size()) {
        char d = src_[at_];
        if (isIdentChar(d)) {
          advance();
        } else if (d == '-' && lower && at_ + 1 < src_.size() && isIdentChar(src_[at_ + 1]) &&
                   at_ > start) {
          advance();
        } else {
          break;
        }
      }
      t.kind = Tok::Ident;
      t.text = std::string(src_.substr(start, at_ - start));
      return t;
    }
    switch (c) {
      case '(': advance(); t.kind = Tok::LParen; return t;
      case ')': advance(); t.kind = Tok::RParen; return t;
      case ',': advance(); t.kind = Tok::Comma; return t;
      case '.': advance(); t.kind = Tok::Period; return t;
      case ':':
        if (at_ + 1 < src_.size() && src_[at_ + 1] == '-') {
          advance();
          advance();
          t.kind = Tok::If;
          return t;
        }
        break;
      default:
        break;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", line_, col_);
  }

 private:
  void advance() {
    if (src_[at_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++at_;
  }

  void skipBlank() {
    while (at_ < src_.size()) {
      char c = src_[at_];
      if (c == '%') {
        while (at_ < src_.size() && src_[at_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  std::string_view src_;
  std::size_t at_ = 0;
  int line_ = 1;
  int col_ = 1;
};

const char* describe(Tok k) {
  switch (k) {
    case Tok::Ident: return "identifier";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::Comma: return "','";
    case Tok::Period: return "'.'";
    case Tok::If: return "':-'";
    case Tok::End: return "end of input";
  }
  return "token";
}

class Parser {
 public:
  explicit Parser(std::string_view src) : lex_(src) {
    cur_ = lex_.next();
    ahead_ = lex_.next();
  }

  bool atEnd() const { return cur_.kind == Tok::End; }

  Rule rule(bool requirePeriod) {
    Rule r;
    r.pos = {cur_.line, cur_.column};
    if (cur_.kind == Tok::If) {
      shift();
      r.body = body();
    } else {
      r.head = atom();
      if (cur_.kind == Tok::If) {
        shift();
        r.body = body();
      }
    }
    if (cur_.kind == Tok::Period) {
      shift();
    } else if (requirePeriod || cur_.kind != Tok::End) {
      fail("expected '.' to end the rule");
    }
    return r;
  }

  Atom atom() {
    if (cur_.kind != Tok::Ident) fail(std::string("expected a predicate, found ") + describe(cur_.kind));
    if (!std::islower(static_cast<unsigned char>(cur_.text[0])))
      fail("predicate '" + cur_.text + "' must begin with a lowercase letter");
    Atom a;
    a.predicate = cur_.text;
    shift();
    if (cur_.kind == Tok::LParen) {
      shift();
      a.args.push_back(term(0));
      while (cur_.kind == Tok::Comma) {
        shift();
        a.args.push_back(term(0));
      }
      expect(Tok::RParen);
    }
    return a;
  }

  void expectEnd() {
    if (cur_.kind != Tok::End) fail(std::string("unexpected ") + describe(cur_.kind));
  }

 private:
  std::vector<Literal> body() {
    std::vector<Literal> out;
    out.push_back(literal());
    while (cur_.kind == Tok::Comma) {
      shift();
      out.push_back(literal());
    }
    return out;
  }

  Literal literal() {
    Literal l;
    if (cur_.kind == Tok::Ident && cur_.text == "not" && ahead_.kind == Tok::Ident) {
      shift();
      l.naf = true;
    }
    l.atom = atom();
    return l;
  }

  Term term(int depth) {
    if (cur_.kind != Tok::Ident) fail(std::string("expected a term, found ") + describe(cur_.kind));
    std::string name = cur_.text;
    int line = cur_.line;
    int col = cur_.column;
    shift();
    if (isVariableName(name)) {
      if (cur_.kind == Tok::LParen) throw ParseError("variable '" + name + "' cannot take arguments", line, col);
      return Term::variable(std::move(name));
    }
    if (!isConstantName(name)) throw ParseError("invalid term '" + name + "'", line, col);
    if (cur_.kind != Tok::LParen) return Term::constant(std::move(name));
    if (depth >= 1) throw ParseError("function terms nest at most one level deep", line, col);
    shift();
    std::vector<Term> args;
    args.push_back(term(depth + 1));
    while (cur_.kind == Tok::Comma) {
      shift();
      args.push_back(term(depth + 1));
    }
    expect(Tok::RParen);
    return Term::compound(std::move(name), std::move(args));
  }

  void expect(Tok k) {
    if (cur_.kind != k) fail(std::string("expected ") + describe(k) + ", found " + describe(cur_.kind));
    shift();
  }

  void shift() {
    cur_ = ahead_;
    if (cur_.kind != Tok::End) ahead_ = lex_.next();
  }

  [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, cur_.line, cur_.column); }

  Lexer lex_;
  Token cur_;
  Token ahead_;
};

void collectVars(const Term& t, std::vector<std::string>& out) {
  if (t.isVariable()) {
    if (std::find(out.begin(), out.end(), t.name) == out.end()) out.push_back(t.name);
    return;
  }
  for (const auto& a : t.args) collectVars(a, out);
}

void collectVars(const Atom& a, std::vector<std::string>& out) {
  for (const auto& t : a.args) collectVars(t, out);
}

}  // namespace

bool isVariableName(std::string_view name) {
  return !name.empty() && std::isupper(static_cast<unsigned char>(name[0])) &&
         std::all_of(name.begin(), name.end(), isIdentChar);
}

bool isConstantName(std::string_view name) {
  if (name.empty() || !std::islower(static_cast<unsigned char>(name[0]))) return false;
  for (std::size_t i = 0; i < name.size(); ++i) {
    char c = name[i];
    if (isIdentChar(c)) continue;
    if (c == '-' && i + 1 < name.size() && isIdentChar(name[i + 1]) && isIdentChar(name[i - 1])) continue;
    return false;
  }
  return true;
}

Program parseProgram(std::string_view text) {
  Parser p(text);
  Program prog;
  while (!p.atEnd()) {
    Rule r = p.rule(true);
    checkSafety(r);
    prog.rules.push_back(std::move(r));
  }
  checkArities(prog);
  return prog;
}

Rule parseRule(std::string_view text) {
  Parser p(text);
  Rule r = p.rule(false);
  p.expectEnd();
  checkSafety(r);
  return r;
}

Atom parseAtom(std::string_view text) {
  Parser p(text);
  Atom a = p.atom();
  p.expectEnd();
  return a;
}

// ---------------------------------------------------------------------------
// Rendering

std::string renderTerm(const Term& t) {
  if (t.kind != Term::Kind::Compound) return t.name;
  std::string out = t.name + "(";
  for (std::size_t i = 0; i < t.args.size(); ++i) {
    if (i) out += ',';
    out += renderTerm(t.args[i]);
  }
  return out + ")";
}

std::string renderAtom(const Atom& a) {
  std::string out = a.predicate;
  if (a.args.empty()) return out;
  out += '(';
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (i) out += ',';
    out += renderTerm(a.args[i]);
  }
  return out + ")";
}

std::string renderLiteral(const Literal& l) { return (l.naf ? "not " : "") + renderAtom(l.atom); }

std::string renderRule(const Rule& r) {
  std::string out;
  if (r.head) out = renderAtom(*r.head);
  if (!r.body.empty()) {
    out += r.head ? " :- " : ":- ";
    for (std::size_t i = 0; i < r.body.size(); ++i) {
      if (i) out += ", ";
      out += renderLiteral(r.body[i]);
    }
  }
  return out + ".";
}

std::string renderProgram(const Program& p) {
  std::string out;
  for (const auto& r : p.rules) out += renderRule(r) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Substitution and matching

Term applySubstitution(const Term& t, const Substitution& theta) {
  if (t.isVariable()) {
    auto it = theta.find(t.name);
    return it == theta.end() ? t : it->second;
  }
  if (t.args.empty()) return t;
  Term out = t;
  for (auto& a : out.args) a = applySubstitution(a, theta);
  return out;
}

Atom applySubstitution(const Atom& a, const Substitution& theta) {
  Atom out = a;
  for (auto& t : out.args) t = applySubstitution(t, theta);
  return out;
}

Rule applySubstitution(const Rule& r, const Substitution& theta) {
  Rule out = r;
  if (out.head) out.head = applySubstitution(*out.head, theta);
  for (auto& l : out.body) l.atom = applySubstitution(l.atom, theta);
  return out;
}

bool match(const Term& pattern, const Term& target, Substitution& theta) {
  if (pattern.isVariable()) {
    auto [it, inserted] = theta.emplace(pattern.name, target);
    return inserted || it->second == target;
  }
  if (pattern.kind != target.kind || pattern.name != target.name ||
      pattern.args.size() != target.args.size())
    return false;
  for (std::size_t i = 0; i < pattern.args.size(); ++i)
    if (!match(pattern.args[i], target.args[i], theta)) return false;
  return true;
}

bool match(const Atom& pattern, const Atom& target, Substitution& theta) {
  if (pattern.predicate != target.predicate || pattern.args.size() != target.args.size()) return false;
  Substitution trial = theta;
  for (std::size_t i = 0; i < pattern.args.size(); ++i)
    if (!match(pattern.args[i], target.args[i], trial)) return false;
  theta = std::move(trial);
  return true;
}

std::vector<std::string> variablesOf(const Rule& r) {
  std::vector<std::string> out;
  if (r.head) collectVars(*r.head, out);
  for (const auto& l : r.body) collectVars(l.atom, out);
  return out;
}

bool isSafe(const Rule& r) {
  std::vector<std::string> bound;
  for (const auto& l : r.body)
    if (!l.naf) collectVars(l.atom, bound);
  std::vector<std::string> needed;
  if (r.head) collectVars(*r.head, needed);
  for (const auto& l : r.body)
    if (l.naf) collectVars(l.atom, needed);
  return std::all_of(needed.begin(), needed.end(), [&](const std::string& v) {
    return std::find(bound.begin(), bound.end(), v) != bound.end();
  });
}

void checkSafety(const Rule& r) {
  if (!isSafe(r)) throw UnsafeRuleError("unsafe rule: a variable does not occur in a positive body literal", renderRule(r));
}

void checkArities(const Program& p) {
  std::unordered_map<std::string, std::pair<std::size_t, const Rule*>> seen;
  auto visit = [&](const Atom& a, const Rule& r) {
    auto [it, inserted] = seen.emplace(a.predicate, std::make_pair(a.arity(), &r));
    if (!inserted && it->second.first != a.arity())
      throw ArityClashError("predicate '" + a.predicate + "' used with arity " + std::to_string(a.arity()) +
                                " and " + std::to_string(it->second.first),
                            renderRule(r));
  };
  for (const auto& r : p.rules) {
    if (r.head) visit(*r.head, r);
    for (const auto& l : r.body) visit(l.atom, r);
  }
}

// ---------------------------------------------------------------------------
// θ-subsumption

namespace {

bool mapBody(const std::vector<Literal>& from, std::size_t i, const std::vector<Literal>& into,
             Substitution& theta) {
  if (i == from.size()) return true;
  for (const auto& target : into) {
    if (target.naf != from[i].naf) continue;
    Substitution trial = theta;
    if (!match(from[i].atom, target.atom, trial)) continue;
    if (mapBody(from, i + 1, into, trial)) {
      theta = std::move(trial);
      return true;
    }
  }
  return false;
}

std::vector<Literal> distinctBody(const std::vector<Literal>& body) {
  std::vector<Literal> out = body;
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

std::optional<Substitution> subsumptionWitness(const Rule& c, const Rule& d) {
  if (!c.head || !d.head) return std::nullopt;
  Substitution theta;
  if (!match(*c.head, *d.head, theta)) return std::nullopt;
  if (!mapBody(c.body, 0, d.body, theta)) return std::nullopt;
  return theta;
}

bool thetaSubsumes(const Rule& c, const Rule& d) { return subsumptionWitness(c, d).has_value(); }

bool isVariant(const Rule& a, const Rule& b) {
  if (a.head.has_value() != b.head.has_value()) return false;
  auto ab = distinctBody(a.body);
  auto bb = distinctBody(b.body);
  if (ab.size() != bb.size()) return false;
  auto va = variablesOf(a);
  auto vb = variablesOf(b);
  if (va.size() != vb.size()) return false;
  // Try every injective renaming consistent with a search over body images.
  std::function<bool(std::size_t, Substitution&)> search = [&](std::size_t i, Substitution& theta) -> bool {
    if (i == ab.size()) {
      std::set<std::string> images;
      for (const auto& [v, t] : theta) {
        if (!t.isVariable() || !images.insert(t.name).second) return false;
      }
      return theta.size() == va.size();
    }
    for (const auto& target : bb) {
      if (target.naf != ab[i].naf) continue;
      Substitution trial = theta;
      if (!match(ab[i].atom, target.atom, trial)) continue;
      if (search(i + 1, trial)) return true;
    }
    return false;
  };
  Substitution theta;
  if (a.head && !match(*a.head, *b.head, theta)) return false;
  if (!search(0, theta)) return false;
  return true;
}

bool sameClausesModuloRenaming(const std::vector<Rule>& a, const std::vector<Rule>& b) {
  if (a.size() != b.size()) return false;
  std::vector<bool> used(b.size(), false);
  for (const auto& r : a) {
    bool found = false;
    for (std::size_t j = 0; j < b.size() && !found; ++j) {
      if (!used[j] && isVariant(r, b[j])) {
        used[j] = true;
        found = true;
      }
    }
    if (!found) return false;
  }
  return true;
}

Rule canonicalVariables(const Rule& r) {
  Substitution theta;
  int n = 0;
  for (const auto& v : variablesOf(r)) {
    theta.emplace(v, Term::variable(n == 0 ? "V" : "X" + std::to_string(n)));
    ++n;
  }
  return applySubstitution(r, theta);
}

}  // namespace ethos::logic
