#include "ethos/dialogue.hpp"

#include <algorithm>
#include <cctype>

namespace ethos::dialogue {

using codec::Json;
using logic::Atom;
using logic::Term;

std::string_view labelName(Label l) { return l == Label::Ethical ? "ethical" : "unethical"; }

std::string_view statusName(Status s) {
  switch (s) {
    case Status::Ethical: return "ethical";
    case Status::Unethical: return "unethical";
    case Status::Unknown: return "unknown";
  }
  return "unknown";
}

namespace {

std::string requireString(const Json& obj, const char* name, const char* where) {
  if (!obj.is_object() || !obj.contains(name))
    throw MalformedTurnError(std::string("missing field '") + where + "." + name + "'");
  const Json& v = obj.at(name);
  if (!v.is_string() || v.get<std::string>().empty())
    throw MalformedTurnError(std::string("field '") + where + "." + name + "' must be a non-empty string");
  return v.get<std::string>();
}

std::optional<Label> parseLabel(const std::string& s) {
  if (s == "ethical") return Label::Ethical;
  if (s == "unethical") return Label::Unethical;
  return std::nullopt;
}

Term constantTerm(const std::string& text, const char* what) {
  Atom probe;
  try {
    probe = logic::parseAtom("probe(" + text + ")");
  } catch (const ParseError&) {
    throw MalformedTurnError(std::string(what) + " is not a valid constant", text);
  }
  if (probe.args.size() != 1 || probe.args[0].kind != Term::Kind::Constant)
    throw MalformedTurnError(std::string(what) + " must be a lowercase constant", text);
  return probe.args[0];
}

std::string complement(const std::string& p) {
  if (p.rfind("not_", 0) == 0 && p.size() > 4) {
    std::string rest = p.substr(4);
    rest[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(rest[0])));
    return rest;
  }
  return "not_" + p;
}

Atom unethicalOf(const Term& handle) { return Atom{"unethical", {handle}}; }

}  // namespace

Scenario parseScenario(const Json& j) {
  if (!j.is_object()) throw MalformedTurnError("scenario must be a JSON object");
  Scenario s;
  if (j.contains("id")) {
    if (!j["id"].is_string() || j["id"].get<std::string>().empty())
      throw MalformedTurnError("field 'id' must be a non-empty string");
    s.id = j["id"].get<std::string>();
  }
  if (!j.contains("request")) throw MalformedTurnError("missing field 'request'");
  if (!j.contains("response")) throw MalformedTurnError("missing field 'response'");
  s.product = requireString(j["request"], "product", "request");
  s.response = requireString(j["response"], "handle", "response");
  if (j.contains("annotations")) {
    if (!j["annotations"].is_array()) throw MalformedTurnError("field 'annotations' must be an array");
    for (const auto& a : j["annotations"]) {
      if (!a.is_string()) throw MalformedTurnError("annotations must be strings");
      s.annotations.push_back(a.get<std::string>());
    }
  }
  if (j.contains("label") && !j["label"].is_null()) {
    auto l = j["label"].is_string() ? parseLabel(j["label"].get<std::string>()) : std::nullopt;
    if (!l) throw MalformedTurnError("label must be \"ethical\" or \"unethical\"", j["label"].dump());
    s.label = l;
  }
  return s;
}

Json toJson(const Scenario& s) {
  Json j;
  if (s.id) j["id"] = *s.id;
  j["request"] = Json{{"product", s.product}};
  j["response"] = Json{{"handle", s.response}};
  j["annotations"] = s.annotations;
  if (s.label) j["label"] = labelName(*s.label);
  return j;
}

std::set<std::string> annotationVocabulary(const learn::ModeSet& modes, const logic::Program& background) {
  std::set<std::string> out;
  for (const auto& d : modes.declarations) {
    if (d.kind != learn::ModeDeclaration::Kind::Body || d.args.size() != 1) continue;
    out.insert(d.predicate);
    out.insert(complement(d.predicate));
  }
  const auto heads = [&](const std::string& p) {
    return std::any_of(modes.declarations.begin(), modes.declarations.end(), [&](const auto& d) {
      return d.kind == learn::ModeDeclaration::Kind::Head && d.predicate == p;
    });
  };
  for (const auto& r : background.rules)
    for (const auto& l : r.body)
      if (l.atom.args.size() == 1 && l.atom.predicate != "answer" && !heads(l.atom.predicate)) {
        out.insert(l.atom.predicate);
        out.insert(complement(l.atom.predicate));
      }
  out.erase("answer");
  return out;
}

std::vector<Atom> scenarioFacts(const Scenario& s) {
  Term product = constantTerm(s.product, "request product");
  Term handle = constantTerm(s.response, "response handle");
  std::vector<Atom> facts;
  facts.push_back(Atom{"ask", {Term::constant("customer"), Term::compound("infoabout", {product})}});
  facts.push_back(Atom{"answer", {handle}});
  for (const auto& a : s.annotations) {
    if (a.empty() || !std::islower(static_cast<unsigned char>(a[0])))
      throw MalformedTurnError("annotation must be a lowercase predicate name", a);
    Atom fact{a, {handle}};
    if (std::find(facts.begin(), facts.end(), fact) == facts.end()) facts.push_back(std::move(fact));
  }
  return facts;
}

learn::ExampleWindow ingestScenario(const Scenario& s, const std::set<std::string>& vocabulary,
                                    const std::string& windowId) {
  if (!s.label) throw MalformedTurnError("training scenario has no label");
  for (const auto& a : s.annotations)
    if (!vocabulary.count(a)) throw MalformedTurnError("annotation outside the known vocabulary", a);
  learn::ExampleWindow w;
  w.id = windowId;
  w.facts = scenarioFacts(s);
  Atom target = unethicalOf(w.facts[1].args[0]);
  w.conclusions.push_back(
      {target, *s.label == Label::Unethical ? learn::Polarity::Positive : learn::Polarity::Negative});
  return w;
}

Verdict evaluateResponse(const Scenario& s, const logic::Program& background, const learn::Hypothesis& h,
                         std::size_t hypothesisVersion) {
  Verdict v;
  v.hypothesisVersion = hypothesisVersion;
  auto facts = scenarioFacts(s);
  v.query = unethicalOf(facts[1].args[0]);

  logic::Program program = background;
  for (auto& r : h.rules()) program.rules.push_back(std::move(r));
  for (const auto& f : facts) program.rules.push_back(logic::Rule{f, {}, {}});

  auto models = solver::answerSets(program);
  v.answerSetCount = models.size();
  if (models.empty()) {
    v.reason = "no answer set: entailment undefined";
    return v;
  }
  std::size_t holds = 0;
  for (const auto& m : models) holds += m.contains(v.query) ? 1 : 0;
  if (holds == models.size()) {
    v.status = Status::Unethical;
    v.derivation = solver::explain(program, v.query, models.front());
    for (auto& [rule, theta] : solver::firedRules(*v.derivation)) v.firedRules.push_back({rule, theta});
    v.reason = "cautiously entailed";
  } else if (holds == 0) {
    v.status = Status::Ethical;
    v.reason = "not entailed in any answer set";
  } else {
    v.braveCautiousDisagree = true;
    v.reason = "bravely but not cautiously entailed";
  }
  return v;
}

Json toJson(const Verdict& v) {
  Json j;
  j["status"] = statusName(v.status);
  j["query"] = logic::renderAtom(v.query);
  j["firedRules"] = Json::array();
  for (const auto& f : v.firedRules) {
    Json fj;
    fj["rule"] = logic::renderRule(f.rule);
    fj["ast"] = codec::ruleAst(f.rule);
    fj["substitution"] = codec::toJson(f.theta);
    j["firedRules"].push_back(std::move(fj));
  }
  j["derivation"] = v.derivation ? codec::toJson(*v.derivation) : Json(nullptr);
  j["hypothesisVersion"] = v.hypothesisVersion;
  j["answerSets"] = v.answerSetCount;
  j["braveCautiousDisagree"] = v.braveCautiousDisagree;
  j["reason"] = v.reason;
  return j;
}

// ---------------------------------------------------------------------------
// Sessions

void Session::add(Turn turn) {
  const auto latest = [&](TurnKind k) -> const Turn* {
    for (auto it = turns_.rbegin(); it != turns_.rend(); ++it)
      if (it->kind == k) return &*it;
    return nullptr;
  };
  switch (turn.kind) {
    case TurnKind::Request:
      if (turn.role != Role::Customer) throw MalformedTurnError("requests come from the customer");
      if (latest(TurnKind::Request)) throw MalformedTurnError("a session holds a single request");
      requireString(turn.content, "product", "request");
      break;
    case TurnKind::Response:
      if (turn.role != Role::Agent) throw MalformedTurnError("responses come from the agent");
      if (!latest(TurnKind::Request)) throw MalformedTurnError("response before any request");
      requireString(turn.content, "handle", "response");
      break;
    case TurnKind::Annotation:
      if (turn.role != Role::Trainer) throw MalformedTurnError("annotations come from the trainer");
      if (!latest(TurnKind::Response)) throw MalformedTurnError("annotation before any response");
      requireString(turn.content, "predicate", "annotation");
      break;
    case TurnKind::Label: {
      if (turn.role != Role::Trainer) throw MalformedTurnError("labels come from the trainer");
      if (phase_ != Phase::Training) throw MalformedTurnError("labels belong to the training phase");
      const Turn* response = latest(TurnKind::Response);
      if (!response) throw MalformedTurnError("label before any response");
      auto handle = requireString(turn.content, "handle", "label");
      if (!parseLabel(requireString(turn.content, "label", "label")))
        throw MalformedTurnError("label must be \"ethical\" or \"unethical\"");
      if (handle != response->content["handle"].get<std::string>())
        throw StaleHandleError("label does not refer to the latest response", handle);
      break;
    }
  }
  turns_.push_back(std::move(turn));
}

Scenario Session::scenario() const {
  Scenario s;
  bool haveRequest = false;
  bool haveResponse = false;
  for (const auto& t : turns_) {
    switch (t.kind) {
      case TurnKind::Request:
        s.product = t.content["product"].get<std::string>();
        haveRequest = true;
        break;
      case TurnKind::Response:
        s.response = t.content["handle"].get<std::string>();
        s.annotations.clear();
        s.label.reset();
        haveResponse = true;
        break;
      case TurnKind::Annotation:
        s.annotations.push_back(t.content["predicate"].get<std::string>());
        break;
      case TurnKind::Label:
        s.label = parseLabel(t.content["label"].get<std::string>());
        break;
    }
  }
  if (!haveRequest) throw MalformedTurnError("session has no request");
  if (!haveResponse) throw MalformedTurnError("session has no response");
  if (phase_ == Phase::Training && !s.label) throw MalformedTurnError("training session has no label");
  return s;
}

// ---------------------------------------------------------------------------
// Knowledge base

logic::Program seedBackground() { return logic::parseProgram("unethical(V) :- not_correct(V), answer(V).\n"); }

learn::ModeSet defaultModes() {
  return learn::parseModes(
      "modeh(1, unethical(+item)).\n"
      "modeb(1, answer(+item)).\n"
      "modeb(1, not_SupportEvidence(+item)).\n"
      "modeb(1, spreadFalseBelief(+item)).\n"
      "modeb(1, exploitEmotions(+item)).\n");
}

namespace {

std::shared_ptr<const KnowledgeSnapshot> snapshotOf(store::KnowledgeState state) {
  auto s = std::make_shared<KnowledgeSnapshot>();
  s->vocabulary = annotationVocabulary(state.modes, state.background);
  s->background = std::move(state.background);
  s->modes = std::move(state.modes);
  s->windows = std::move(state.windows);
  s->hypothesis = std::move(state.hypothesis);
  s->hypothesisVersion = state.hypothesisVersion;
  return s;
}

}  // namespace

KnowledgeBase::KnowledgeBase(std::shared_ptr<store::Store> store, logic::Program background, learn::ModeSet modes)
    : store_(std::move(store)) {
  if (store_->empty()) {
    store_->putBackground(background);
    store_->putModes(modes);
  }
  publish(snapshotOf(store_->loadState()));
}

std::shared_ptr<const KnowledgeSnapshot> KnowledgeBase::snapshot() const {
  std::lock_guard lock(publishMutex_);
  return current_;
}

void KnowledgeBase::publish(std::shared_ptr<const KnowledgeSnapshot> s) {
  std::lock_guard lock(publishMutex_);
  current_ = std::move(s);
}

Verdict KnowledgeBase::evaluate(const Scenario& s) const {
  auto snap = snapshot();
  for (const auto& a : s.annotations)
    if (!snap->vocabulary.count(a)) throw MalformedTurnError("annotation outside the known vocabulary", a);
  return evaluateResponse(s, snap->background, snap->hypothesis, snap->hypothesisVersion);
}

TrainingOutcome KnowledgeBase::train(const Scenario& s) {
  std::lock_guard writer(writer_);
  auto snap = snapshot();

  const auto taken = [&](const std::string& id) {
    return std::any_of(snap->windows.begin(), snap->windows.end(), [&](const auto& w) { return w.id == id; });
  };
  std::string id;
  if (s.id) {
    id = *s.id;
    if (taken(id)) throw DuplicateWindowError("window id already stored: " + id, id);
  } else {
    std::size_t n = snap->windows.size() + 1;
    while (taken("w" + std::to_string(n))) ++n;
    id = "w" + std::to_string(n);
  }

  learn::ExampleWindow window = ingestScenario(s, snap->vocabulary, id);
  TrainingOutcome out;
  out.windowId = id;
  out.before = evaluateResponse(s, snap->background, snap->hypothesis, snap->hypothesisVersion);
  out.beforeClauses = snap->hypothesis.render();

  learn::Hypothesis next = learn::processWindow(snap->hypothesis, window, snap->background, snap->modes, snap->windows);

  store_->appendWindow(window);
  store_->snapshotHypothesis(next);
  out.hypothesisVersion = store_->hypothesisVersion();
  publish(snapshotOf(store_->loadState()));

  out.action = next.revisionLog.empty() ? learn::Action::Unchanged : next.revisionLog.back().action;
  out.afterClauses = next.render();
  out.diff = renderDiff(out.action, out.beforeClauses, out.afterClauses);
  out.hypothesis = std::move(next);
  return out;
}

std::vector<RankedCandidate> KnowledgeBase::rankCandidates(const std::vector<Scenario>& candidates) const {
  std::vector<RankedCandidate> out;
  for (const auto& c : candidates) out.push_back({c, evaluate(c)});
  const auto rank = [](Status s) { return s == Status::Ethical ? 0 : s == Status::Unknown ? 1 : 2; };
  std::stable_sort(out.begin(), out.end(), [&](const RankedCandidate& a, const RankedCandidate& b) {
    return rank(a.verdict.status) < rank(b.verdict.status);
  });
  return out;
}

solver::Derivation KnowledgeBase::explain(const Atom& atom) const {
  auto snap = snapshot();
  logic::Program program = snap->background;
  for (auto& r : snap->hypothesis.rules()) program.rules.push_back(std::move(r));
  for (const auto& w : snap->windows)
    for (const auto& f : w.facts) program.rules.push_back(logic::Rule{f, {}, {}});
  auto models = solver::answerSets(program);
  if (models.empty()) throw InconsistentProgramError("knowledge base has no answer set");
  for (const auto& m : models)
    if (!m.contains(atom)) throw NotFoundError("atom is not entailed", logic::renderAtom(atom));
  return solver::explain(program, atom, models.front());
}

std::optional<learn::Hypothesis> KnowledgeBase::hypothesisAt(std::size_t version) const {
  return store_->hypothesis(version);
}

std::string renderDiff(learn::Action action, const std::vector<std::string>& before,
                       const std::vector<std::string>& after) {
  std::string out(learn::actionName(action));
  if (action == learn::Action::SupportGrow) out = "unchanged; support set grew";
  out += "\n";
  for (const auto& b : before)
    if (std::find(after.begin(), after.end(), b) == after.end()) out += "- " + b + "\n";
  for (const auto& a : after) {
    bool kept = std::find(before.begin(), before.end(), a) != before.end();
    out += (kept ? "  " : "+ ") + a + "\n";
  }
  return out;
}

}  // namespace ethos::dialogue
