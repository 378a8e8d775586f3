#pragma once

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ethos/error.hpp"

namespace ethos::logic {

/// A constant (`productx`), a variable (`X1`) or a depth-1 compound constant
/// such as `infoabout(productx)`. Compound arguments are constants or
/// variables, never further compounds.
struct Term {
  enum class Kind { Constant, Variable, Compound };

  Kind kind = Kind::Constant;
  std::string name;
  std::vector<Term> args;

  static Term constant(std::string name);
  static Term variable(std::string name);
  static Term compound(std::string functor, std::vector<Term> args);

  bool isVariable() const { return kind == Kind::Variable; }
  bool isGround() const;

  bool operator==(const Term&) const;
  std::strong_ordering operator<=>(const Term&) const;
};

struct Atom {
  std::string predicate;
  std::vector<Term> args;

  std::size_t arity() const { return args.size(); }
  bool isGround() const;

  bool operator==(const Atom&) const;
  std::strong_ordering operator<=>(const Atom&) const;
};

struct Literal {
  Atom atom;
  bool naf = false;

  bool operator==(const Literal&) const = default;
  std::strong_ordering operator<=>(const Literal& o) const {
    if (auto c = naf <=> o.naf; c != 0) return c;
    return atom <=> o.atom;
  }
};

struct SourcePos {
  int line = 0;
  int column = 0;
};

/// `head :- body.`; no head means constraint, empty body means fact.
/// Source positions do not take part in equality.
struct Rule {
  std::optional<Atom> head;
  std::vector<Literal> body;
  SourcePos pos;

  bool isFact() const { return head && body.empty(); }
  bool isConstraint() const { return !head; }
  bool isGround() const;

  bool operator==(const Rule& o) const { return head == o.head && body == o.body; }
};

struct Program {
  std::vector<Rule> rules;

  bool operator==(const Program&) const = default;
};

using Substitution = std::map<std::string, Term>;

/// Parses program text. Throws ParseError, UnsafeRuleError or ArityClashError.
Program parseProgram(std::string_view text);
/// Parses exactly one rule, terminal period optional.
Rule parseRule(std::string_view text);
/// Parses one atom, e.g. `unethical(xxx)`.
Atom parseAtom(std::string_view text);

std::string renderTerm(const Term& t);
std::string renderAtom(const Atom& a);
std::string renderLiteral(const Literal& l);
std::string renderRule(const Rule& r);
std::string renderProgram(const Program& p);

bool isVariableName(std::string_view name);
bool isConstantName(std::string_view name);

Term applySubstitution(const Term& t, const Substitution& theta);
Atom applySubstitution(const Atom& a, const Substitution& theta);
Rule applySubstitution(const Rule& r, const Substitution& theta);

/// One-way matching: extends `theta` so that pattern·theta == target.
/// Variables of `target` are treated as constants.
bool match(const Term& pattern, const Term& target, Substitution& theta);
bool match(const Atom& pattern, const Atom& target, Substitution& theta);

/// Variables of a rule, in order of first appearance (head first).
std::vector<std::string> variablesOf(const Rule& r);

/// Throws UnsafeRuleError unless every variable of the head and of every naf
/// literal also occurs in a positive body literal.
void checkSafety(const Rule& r);
bool isSafe(const Rule& r);

/// Throws ArityClashError when one predicate is used with two arities.
void checkArities(const Program& p);

/// θ-subsumption: some θ maps head(c) onto head(d) and body(c) into body(d).
/// Both clauses must have heads.
bool thetaSubsumes(const Rule& c, const Rule& d);
/// The witnessing substitution of thetaSubsumes, if any.
std::optional<Substitution> subsumptionWitness(const Rule& c, const Rule& d);

/// Equal up to a bijective renaming of variables, body taken as a set.
bool isVariant(const Rule& a, const Rule& b);
/// Two clause lists equal modulo renaming and clause order.
bool sameClausesModuloRenaming(const std::vector<Rule>& a, const std::vector<Rule>& b);

/// Renames variables to V, X1, X2, ... in order of first appearance.
Rule canonicalVariables(const Rule& r);

}  // namespace ethos::logic
