#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ethos/logic.hpp"

namespace ethos::learn {

using logic::Atom;
using logic::Program;
using logic::Rule;

// ---------------------------------------------------------------------------
// Mode declarations

enum class Placemarker { Ground, Input, Output };

struct ModeArg {
  Placemarker marker = Placemarker::Input;
  std::string type;
};

/// `modeh(1, unethical(+item)).` or `modeb(*, p(+t, -t, #t)).`
struct ModeDeclaration {
  enum class Kind { Head, Body };

  Kind kind = Kind::Body;
  std::optional<std::size_t> recall;  // unset: unbounded
  std::string predicate;
  std::vector<ModeArg> args;

  /// Same predicate and arity, and a constant wherever the scheme has `#`.
  bool matchesGround(const Atom& a) const;
  /// Same predicate and arity, constants at `#`, variables at `+` / `-`.
  bool matchesLiteral(const Atom& a) const;
  std::string render() const;
};

struct ModeSet {
  std::vector<ModeDeclaration> declarations;

  std::vector<const ModeDeclaration*> heads() const;
  std::vector<const ModeDeclaration*> bodies() const;
  /// Position of the first body declaration for `predicate`, or npos.
  std::size_t bodyRank(std::string_view predicate) const;
  bool isHeadPredicate(std::string_view predicate) const;
  std::string render() const;
};

/// Parses a mode file. Throws ParseError.
ModeSet parseModes(std::string_view text);

// ---------------------------------------------------------------------------
// Examples

enum class Polarity { Positive, Negative };

struct Conclusion {
  Atom atom;
  Polarity polarity = Polarity::Positive;

  bool operator==(const Conclusion&) const = default;
};

/// Reads a conclusion as written in the training tables: `not_unethical(x)`
/// is the negative example `unethical(x)`.
Conclusion conclusionFromTableAtom(const Atom& a);

struct ExampleWindow {
  std::string id;
  std::vector<Atom> facts;
  std::vector<Conclusion> conclusions;

  Program factProgram() const;
  bool operator==(const ExampleWindow&) const = default;
};

/// Throws InvalidWindowError: empty id, non-ground atom, an atom with both
/// polarities, or a conclusion predicate without a head declaration.
void validateWindow(const ExampleWindow& w, const ModeSet& modes);
/// Warnings for windows that state both `p(c)` and `not_p(c)`.
std::vector<std::string> lintWindow(const ExampleWindow& w);

// ---------------------------------------------------------------------------
// Kernels and hypotheses

/// Most specific clause explaining one positive conclusion of a window.
struct KernelClause {
  std::string id;  // K1, K2, ... once registered in a hypothesis
  std::string windowId;
  Atom head;
  std::vector<Atom> body;
  Rule clause;  // variabilized form

  Rule groundRule() const;
  bool operator==(const KernelClause&) const = default;
};

struct HypothesisClause {
  Rule clause;
  std::vector<std::string> support;  // kernel ids

  bool operator==(const HypothesisClause&) const = default;
};

enum class Action { Initialize, Specialize, Split, AddClause, SupportGrow, Unchanged };

std::string_view actionName(Action a);
std::optional<Action> parseAction(std::string_view name);

struct RevisionEntry {
  std::string windowId;
  Action action = Action::Unchanged;
  std::vector<std::string> before;
  std::vector<std::string> after;

  bool operator==(const RevisionEntry&) const = default;
};

struct Hypothesis {
  std::vector<HypothesisClause> clauses;
  std::vector<KernelClause> kernels;
  std::vector<RevisionEntry> revisionLog;

  const KernelClause* kernel(std::string_view id) const;
  std::vector<Rule> rules() const;
  Program program() const;
  std::vector<std::string> render() const;
  bool operator==(const Hypothesis&) const = default;
};

struct WindowAtom {
  std::string windowId;
  Atom atom;

  bool operator==(const WindowAtom&) const = default;
};

struct CoverageReport {
  std::vector<WindowAtom> truePositives;
  std::vector<WindowAtom> falsePositives;
  std::vector<WindowAtom> falseNegatives;

  bool sound() const { return falsePositives.empty() && falseNegatives.empty(); }
};

/// Kernel clauses for the positive conclusions of `window` that
/// background ∪ facts ∪ `current` does not already entail. Conclusions no head
/// declaration matches are reported in `diagnostics`.
std::vector<KernelClause> buildKernelSet(const ExampleWindow& window, const Program& background,
                                         const ModeSet& modes, const Hypothesis* current = nullptr,
                                         std::vector<std::string>* diagnostics = nullptr);

/// Replaces constants at `+` / `-` positions by variables V, X1, X2, ...
Rule variabilize(const KernelClause& kernel, const ModeSet& modes);

/// Whether a clause lies in the language of the mode declarations.
bool conformsToModes(const Rule& clause, const ModeSet& modes);

/// Cautious entailment of every conclusion over background ∪ facts ∪ hypothesis.
CoverageReport covers(const Hypothesis& h, std::span<const ExampleWindow> windows, const Program& background);

/// Minimal refinements of `clause` built from the bodies of its support
/// kernels that no longer fire on the negative conclusions of `negatives`.
/// Several refinements mean the clause splits. Throws QuarantineError.
std::vector<HypothesisClause> specialize(const HypothesisClause& clause, std::span<const KernelClause> kernels,
                                         std::span<const ExampleWindow> negatives, const Program& background,
                                         const ModeSet& modes);

/// Most general mode-conformant subset of a kernel consistent with the
/// kernel's own window.
Rule generalize(const KernelClause& kernel, const ExampleWindow& window, const Program& background,
                const ModeSet& modes);

/// One incremental revision step over a new window with full memory of the
/// windows seen before. Throws DuplicateWindowError, InvalidWindowError or
/// QuarantineError; the input hypothesis is never modified.
Hypothesis processWindow(const Hypothesis& state, const ExampleWindow& window, const Program& background,
                         const ModeSet& modes, std::span<const ExampleWindow> memory);

struct QuarantineRecord {
  std::string windowId;
  std::string reason;
  std::string detail;
};

struct LearnResult {
  Hypothesis hypothesis;
  std::vector<QuarantineRecord> quarantined;
};

/// Folds processWindow over a stream. Quarantined windows are skipped and
/// reported; a repeated id throws DuplicateWindowError.
LearnResult learnStream(std::span<const ExampleWindow> windows, const Program& background, const ModeSet& modes);

}  // namespace ethos::learn
