#pragma once

// Shared fixtures, independent oracles and random generators for the tests.

#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "ethos/dialogue.hpp"
#include "ethos/learner.hpp"
#include "ethos/logic.hpp"

namespace ethos::testing {

std::filesystem::path dataPath(const std::string& name);

std::vector<learn::ExampleWindow> table1Windows();
std::vector<dialogue::Scenario> table1Scenarios();
logic::Program table1Background();
learn::ModeSet table1Modes();

/// Running hypotheses printed in Table 1, one entry per window.
struct Table1Step {
  std::string window;
  std::vector<std::string> hypothesis;
  std::string action;
};
const std::vector<Table1Step>& table1Trace();

/// Fresh directory removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// ---------------------------------------------------------------------------
// Oracles. None of these call the grounder, solver or matcher.

/// Every stable model by testing each subset of the ground head atoms:
/// S is stable iff S is the least model of the reduct and no constraint
/// body holds in S. Rules are instantiated over the program's constants.
std::set<std::set<std::string>> bruteForceStableModels(const logic::Program& p);

/// Ground heads a single rule derives from a fixed set of ground facts,
/// trying every assignment of its variables to the constants in sight;
/// `not` literals are read under the closed-world assumption.
std::set<std::string> directConsequences(const logic::Rule& r, const std::set<std::string>& facts);

// ---------------------------------------------------------------------------
// Generators

using Rng = std::mt19937_64;

/// Normal program over p,q,r,s/0 and t,u/1 with constants a..d (at most 12
/// ground atoms), with up to `maxRules` safe rules and occasional constraints.
logic::Program randomProgram(Rng& rng, int maxRules = 20);

/// Safe clause over p/1, q/2, r/1 with head h/1, variables X, Y, Z and
/// constants a, b, c; `naf` allows negated body literals.
logic::Rule randomClause(Rng& rng, bool naf);

/// A clause θ-subsumed by `c`: a random substitution followed by extra
/// random body literals.
logic::Rule randomSpecialization(Rng& rng, const logic::Rule& c, bool naf);

/// Up to 10 random ground facts over p/1, q/2, r/1 and constants a, b, c.
std::set<std::string> randomWindowFacts(Rng& rng);

/// Hidden-target stream: 1 or 2 target clauses `unethical(V) :- answer(V),
/// f_i(V), ...` over the features f1..f4, and windows whose conclusion is the
/// target's verdict, evaluated directly.
struct HiddenTarget {
  std::vector<logic::Rule> rules;
  std::vector<learn::ExampleWindow> windows;
};
HiddenTarget randomHiddenTarget(Rng& rng, int windows);
learn::ModeSet hiddenTargetModes();

/// The target's verdict on a window: does some rule's body hold in its facts.
bool targetVerdict(const std::vector<logic::Rule>& rules, const learn::ExampleWindow& w);

std::vector<std::string> rendered(const std::vector<logic::Rule>& rules);

}  // namespace ethos::testing
