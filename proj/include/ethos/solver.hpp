#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ethos/logic.hpp"

namespace ethos::solver {

using logic::Atom;
using logic::Program;
using logic::Rule;
using logic::Substitution;

using AtomId = std::size_t;
using AtomIdSet = std::set<AtomId>;

/// A variable-free rule over interned atoms. `source` indexes the rule of the
/// input program it instantiates and `theta` is the instantiating substitution.
struct GroundRule {
  std::optional<AtomId> head;
  std::vector<AtomId> positive;
  std::vector<AtomId> negative;
  std::size_t source = 0;
  Substitution theta;
};

struct GroundProgram {
  std::vector<GroundRule> rules;
  /// Herbrand base; an AtomId indexes this table.
  std::vector<Atom> atoms;

  std::optional<AtomId> find(const Atom& a) const;
  AtomId intern(const Atom& a);
  std::string render(const GroundRule& r) const;

 private:
  std::map<Atom, AtomId> index_;
};

struct GroundOptions {
  std::size_t maxGroundRules = 100'000;
};

/// All instances of each rule whose positive body could hold; facts always
/// included. Throws GroundingLimitError past the configured cap.
GroundProgram ground(const Program& program, const GroundOptions& options = {});

/// Gelfond-Lifschitz reduct: drops rules blocked by `candidate`, then strips
/// the remaining naf literals. Shares the atom table of `gp`.
GroundProgram reduct(const GroundProgram& gp, const AtomIdSet& candidate);

/// Least model of a naf-free ground program. Constraints are ignored.
AtomIdSet leastModel(const GroundProgram& positive);

struct AnswerSet {
  std::set<Atom> atoms;

  bool contains(const Atom& a) const { return atoms.count(a) != 0; }
  /// Atoms rendered and sorted as strings.
  std::vector<std::string> sortedRendering() const;
  std::string render() const;
  bool operator==(const AnswerSet&) const = default;
};

struct SolveOptions {
  GroundOptions ground;
  /// 0 means every answer set.
  std::size_t limit = 0;
};

/// Stable models in lexicographic order of their sorted atom renderings.
std::vector<AnswerSet> answerSets(const Program& program, const SolveOptions& options = {});
std::vector<AnswerSet> answerSets(const GroundProgram& gp, std::size_t limit = 0);

enum class Mode { Cautious, Brave };

/// Throws InconsistentProgramError when the program has no answer set.
bool entails(const Program& program, const Atom& query, Mode mode = Mode::Cautious);

/// Atoms true in every answer set. Throws InconsistentProgramError when there is none.
std::set<Atom> cautiousConsequences(const Program& program);

/// Derivation tree of an atom. Leaves are facts or naf literals whose atom is
/// absent from the answer set.
struct Derivation {
  enum class Kind { Fact, Rule, Naf };

  Kind kind = Kind::Fact;
  Atom atom;
  /// The program rule applied (for Fact, the fact itself; unset for Naf).
  std::optional<Rule> rule;
  Substitution theta;
  std::vector<Derivation> children;

  std::size_t depth() const;
};

/// A depth-minimal derivation of `query` in `answerSet`; ties go to the rule
/// that comes first in the program. Throws NoDerivationError if `query` is
/// not in the answer set.
Derivation explain(const Program& program, const Atom& query, const AnswerSet& answerSet);

/// Rules used in a derivation, pre-order, each with its substitution.
std::vector<std::pair<Rule, Substitution>> firedRules(const Derivation& d);

}  // namespace ethos::solver
