#pragma once

// Structured training/test conversations on top of the learner and store.

#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ethos/codec.hpp"
#include "ethos/learner.hpp"
#include "ethos/solver.hpp"
#include "ethos/store.hpp"

namespace ethos::dialogue {

enum class Label { Ethical, Unethical };

std::string_view labelName(Label l);

/// One request/response exchange with its annotations and optional label.
struct Scenario {
  std::optional<std::string> id;
  std::string product;
  std::string response;
  std::vector<std::string> annotations;
  std::optional<Label> label;
};

/// Reads `{"id"?, "request":{"product"}, "response":{"handle"},
/// "annotations":[...], "label"?}`. Throws MalformedTurnError.
Scenario parseScenario(const codec::Json& j);
codec::Json toJson(const Scenario& s);

/// The annotation predicates a knowledge base accepts: every modeb
/// predicate, its complement (`p` and `not_p`, where the complement of
/// `not_Xy` is `xy`), and every body predicate of the background.
std::set<std::string> annotationVocabulary(const learn::ModeSet& modes, const logic::Program& background);

/// Label-free context facts of a scenario: ask/2, answer/1 and one unary
/// fact per annotation on the response handle.
std::vector<logic::Atom> scenarioFacts(const Scenario& s);

/// Builds the training window. Throws MalformedTurnError for a missing label,
/// an unknown annotation or a handle that is not a constant.
learn::ExampleWindow ingestScenario(const Scenario& s, const std::set<std::string>& vocabulary,
                                    const std::string& windowId);

enum class Status { Ethical, Unethical, Unknown };

std::string_view statusName(Status s);

struct FiredRule {
  logic::Rule rule;
  logic::Substitution theta;
};

struct Verdict {
  Status status = Status::Unknown;
  logic::Atom query;
  std::vector<FiredRule> firedRules;
  std::optional<solver::Derivation> derivation;
  std::size_t hypothesisVersion = 0;
  std::size_t answerSetCount = 0;
  /// True when the query holds in some answer sets but not all.
  bool braveCautiousDisagree = false;
  std::string reason;
};

/// Cautious verdict on `unethical(R)` over background, hypothesis and the
/// scenario facts. No answer set, or disagreement between answer sets,
/// gives Unknown.
Verdict evaluateResponse(const Scenario& s, const logic::Program& background, const learn::Hypothesis& h,
                         std::size_t hypothesisVersion);

codec::Json toJson(const Verdict& v);

enum class Role { Customer, Agent, Trainer };
enum class TurnKind { Request, Response, Annotation, Label };

struct Turn {
  Role role = Role::Customer;
  TurnKind kind = TurnKind::Request;
  /// request: {"product"}; response: {"handle"}; annotation: {"predicate"};
  /// label: {"handle", "label"}.
  codec::Json content;
};

enum class Phase { Training, Test };

/// Turn-by-turn assembly of one scenario.
class Session {
 public:
  Session(std::string id, Phase phase) : id_(std::move(id)), phase_(phase) {}

  const std::string& id() const { return id_; }
  Phase phase() const { return phase_; }
  const std::vector<Turn>& turns() const { return turns_; }

  /// Throws MalformedTurnError for out-of-place turns and StaleHandleError
  /// for a label that does not name the latest response.
  void add(Turn turn);

  /// The scenario built from the turns so far; throws MalformedTurnError if
  /// the request or response is missing, or a training session has no label.
  Scenario scenario() const;

  std::optional<learn::ExampleWindow> derivedWindow;

 private:
  std::string id_;
  Phase phase_;
  std::vector<Turn> turns_;
};

/// The seed background: rule1, "it is unethical to give incorrect
/// information to the customers".
logic::Program seedBackground();
/// Mode declarations of the bundled ethics domain.
learn::ModeSet defaultModes();

/// Immutable view evaluations run against.
struct KnowledgeSnapshot {
  logic::Program background;
  learn::ModeSet modes;
  std::vector<learn::ExampleWindow> windows;
  learn::Hypothesis hypothesis;
  std::size_t hypothesisVersion = 0;
  std::set<std::string> vocabulary;
};

struct TrainingOutcome {
  std::string windowId;
  Verdict before;
  learn::Action action = learn::Action::Unchanged;
  std::vector<std::string> beforeClauses;
  std::vector<std::string> afterClauses;
  learn::Hypothesis hypothesis;
  std::size_t hypothesisVersion = 0;
  /// Human-readable revision diff.
  std::string diff;
};

struct RankedCandidate {
  Scenario scenario;
  Verdict verdict;
};

/// A knowledge base backed by a store: many concurrent readers, one writer.
class KnowledgeBase {
 public:
  /// Seeds background and modes into an empty store.
  explicit KnowledgeBase(std::shared_ptr<store::Store> store, logic::Program background = seedBackground(),
                         learn::ModeSet modes = defaultModes());

  std::shared_ptr<const KnowledgeSnapshot> snapshot() const;

  Verdict evaluate(const Scenario& s) const;

  /// Evaluates with the current hypothesis, learns from the labeled window
  /// and persists window and snapshot. Nothing is persisted when the learner
  /// rejects the window. A missing id becomes `w<N+1>`.
  TrainingOutcome train(const Scenario& s);

  /// Candidate responses to one request, ethical first, then unknown, then
  /// unethical; order is otherwise preserved.
  std::vector<RankedCandidate> rankCandidates(const std::vector<Scenario>& candidates) const;

  /// Derivation of a ground atom over background, hypothesis and the facts
  /// of every stored window. Throws NotFoundError when it is not entailed.
  solver::Derivation explain(const logic::Atom& atom) const;

  std::optional<learn::Hypothesis> hypothesisAt(std::size_t version) const;

 private:
  void publish(std::shared_ptr<const KnowledgeSnapshot> s);

  std::shared_ptr<store::Store> store_;
  std::mutex writer_;
  mutable std::mutex publishMutex_;
  std::shared_ptr<const KnowledgeSnapshot> current_;
};

std::string renderDiff(learn::Action action, const std::vector<std::string>& before,
                       const std::vector<std::string>& after);

}  // namespace ethos::dialogue
