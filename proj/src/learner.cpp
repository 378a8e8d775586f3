#include "ethos/learner.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "ethos/solver.hpp"

namespace ethos::learn {

using logic::Literal;
using logic::renderAtom;
using logic::renderRule;
using logic::Substitution;
using logic::Term;

// ---------------------------------------------------------------------------
// Windows

Conclusion conclusionFromTableAtom(const Atom& a) {
  constexpr std::string_view prefix = "not_";
  if (a.predicate.size() > prefix.size() && a.predicate.compare(0, prefix.size(), prefix) == 0) {
    Atom positive = a;
    positive.predicate = a.predicate.substr(prefix.size());
    return {std::move(positive), Polarity::Negative};
  }
  return {a, Polarity::Positive};
}

Program ExampleWindow::factProgram() const {
  Program p;
  for (const auto& f : facts) p.rules.push_back(Rule{f, {}, {}});
  return p;
}

void validateWindow(const ExampleWindow& w, const ModeSet& modes) {
  if (w.id.empty()) throw InvalidWindowError("window id is empty");
  for (const auto& f : w.facts)
    if (!f.isGround()) throw InvalidWindowError("window fact is not ground", renderAtom(f));
  for (std::size_t i = 0; i < w.conclusions.size(); ++i) {
    const auto& c = w.conclusions[i];
    if (!c.atom.isGround()) throw InvalidWindowError("conclusion is not ground", renderAtom(c.atom));
    if (!modes.isHeadPredicate(c.atom.predicate))
      throw InvalidWindowError("conclusion predicate has no head declaration", renderAtom(c.atom));
    for (std::size_t j = 0; j < i; ++j)
      if (w.conclusions[j].atom == c.atom && w.conclusions[j].polarity != c.polarity)
        throw InvalidWindowError("conclusion appears with both polarities in window " + w.id, renderAtom(c.atom));
  }
}

std::vector<std::string> lintWindow(const ExampleWindow& w) {
  std::vector<std::string> out;
  for (const auto& f : w.facts) {
    if (f.predicate.rfind("not_", 0) != 0 || f.predicate.size() <= 4) continue;
    std::string base = f.predicate.substr(4);
    std::string lowered = base;
    lowered[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(lowered[0])));
    for (const auto& g : w.facts) {
      if ((g.predicate == base || g.predicate == lowered) && g.args == f.args)
        out.push_back("window " + w.id + " states both " + renderAtom(g) + " and " + renderAtom(f));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Hypotheses

std::string_view actionName(Action a) {
  switch (a) {
    case Action::Initialize: return "initialize";
    case Action::Specialize: return "specialize";
    case Action::Split: return "split";
    case Action::AddClause: return "add-clause";
    case Action::SupportGrow: return "support-grow";
    case Action::Unchanged: return "unchanged";
  }
  return "unchanged";
}

std::optional<Action> parseAction(std::string_view name) {
  for (auto a : {Action::Initialize, Action::Specialize, Action::Split, Action::AddClause, Action::SupportGrow,
                 Action::Unchanged})
    if (actionName(a) == name) return a;
  return std::nullopt;
}

Rule KernelClause::groundRule() const {
  Rule r;
  r.head = head;
  for (const auto& b : body) r.body.push_back(Literal{b, false});
  return r;
}

const KernelClause* Hypothesis::kernel(std::string_view id) const {
  for (const auto& k : kernels)
    if (k.id == id) return &k;
  return nullptr;
}

std::vector<Rule> Hypothesis::rules() const {
  std::vector<Rule> out;
  for (const auto& c : clauses) out.push_back(c.clause);
  return out;
}

Program Hypothesis::program() const { return Program{rules()}; }

std::vector<std::string> Hypothesis::render() const {
  std::vector<std::string> out;
  for (const auto& c : clauses) out.push_back(renderRule(c.clause));
  return out;
}

// ---------------------------------------------------------------------------
// Clause evaluation against the closure of a window

namespace {

class FactIndex {
 public:
  FactIndex() = default;
  explicit FactIndex(const std::set<Atom>& atoms) {
    for (const auto& a : atoms) byPredicate_[a.predicate].push_back(a);
    all_ = atoms;
  }

  const std::vector<Atom>& with(const std::string& predicate) const {
    static const std::vector<Atom> none;
    auto it = byPredicate_.find(predicate);
    return it == byPredicate_.end() ? none : it->second;
  }
  bool contains(const Atom& a) const { return all_.count(a) != 0; }
  const std::set<Atom>& atoms() const { return all_; }

 private:
  std::map<std::string, std::vector<Atom>> byPredicate_;
  std::set<Atom> all_;
};

bool satisfyBody(const std::vector<Literal>& body, std::size_t i, const FactIndex& facts, Substitution& theta) {
  if (i == body.size()) {
    for (const auto& l : body)
      if (l.naf && facts.contains(logic::applySubstitution(l.atom, theta))) return false;
    return true;
  }
  if (body[i].naf) return satisfyBody(body, i + 1, facts, theta);
  for (const auto& f : facts.with(body[i].atom.predicate)) {
    Substitution trial = theta;
    if (!logic::match(body[i].atom, f, trial)) continue;
    if (satisfyBody(body, i + 1, facts, trial)) return true;
  }
  return false;
}

// Whether some instance of `clause` with head `target` has its body satisfied.
bool fires(const Rule& clause, const FactIndex& facts, const Atom& target) {
  Substitution theta;
  if (!clause.head || !logic::match(*clause.head, target, theta)) return false;
  return satisfyBody(clause.body, 0, facts, theta);
}

// Cautious consequences of background ∪ window facts, memoized per window id.
class ClosureCache {
 public:
  explicit ClosureCache(const Program& background) : background_(background) {}

  const FactIndex& of(const ExampleWindow& w) {
    auto it = cache_.find(w.id);
    if (it != cache_.end()) return it->second;
    Program p = background_;
    for (const auto& r : w.factProgram().rules) p.rules.push_back(r);
    return cache_.emplace(w.id, FactIndex(solver::cautiousConsequences(p))).first->second;
  }

 private:
  const Program& background_;
  std::map<std::string, FactIndex> cache_;
};

bool firesOnNegative(const Rule& clause, const ExampleWindow& w, ClosureCache& closures) {
  for (const auto& c : w.conclusions) {
    if (c.polarity != Polarity::Negative) continue;
    if (fires(clause, closures.of(w), c.atom)) return true;
  }
  return false;
}

// Calls `visit` with each k-subset of [0, n) in lexicographic order until it returns true.
bool forEachCombination(std::size_t n, std::size_t k, const std::function<bool(const std::vector<std::size_t>&)>& visit) {
  if (k > n) return false;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    if (visit(idx)) return true;
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
    if (i == 0) return false;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

// Candidate literal order: earlier body declaration first, then text.
void sortByModePreference(std::vector<Literal>& lits, const ModeSet& modes) {
  std::stable_sort(lits.begin(), lits.end(), [&](const Literal& a, const Literal& b) {
    auto ra = modes.bodyRank(a.atom.predicate);
    auto rb = modes.bodyRank(b.atom.predicate);
    if (ra != rb) return ra < rb;
    return logic::renderLiteral(a) < logic::renderLiteral(b);
  });
}

// Orders a body subset the way the literals appear in `reference`.
std::vector<Literal> inReferenceOrder(const std::vector<Literal>& chosen, const std::vector<Literal>& reference) {
  std::vector<Literal> out;
  for (const auto& l : reference)
    if (std::find(chosen.begin(), chosen.end(), l) != chosen.end() &&
        std::find(out.begin(), out.end(), l) == out.end())
      out.push_back(l);
  return out;
}

// Kernel for one ground positive conclusion, or nullopt when no head
// declaration matches it.
std::optional<KernelClause> kernelFor(const ExampleWindow& window, const Atom& conclusion, const ModeSet& modes,
                                      ClosureCache& closures) {
  const ModeDeclaration* headMode = nullptr;
  for (const auto* h : modes.heads())
    if (h->matchesGround(conclusion)) {
      headMode = h;
      break;
    }
  if (!headMode) return std::nullopt;

  // Window facts in their given order, then background consequences.
  std::vector<Atom> candidates;
  for (const auto& f : window.facts)
    if (std::find(candidates.begin(), candidates.end(), f) == candidates.end()) candidates.push_back(f);
  for (const auto& a : closures.of(window).atoms())
    if (std::find(candidates.begin(), candidates.end(), a) == candidates.end() && a != conclusion)
      candidates.push_back(a);

  std::set<Term> bound;
  for (std::size_t k = 0; k < headMode->args.size(); ++k)
    if (headMode->args[k].marker == Placemarker::Input) bound.insert(conclusion.args[k]);

  auto bodies = modes.bodies();
  std::map<const ModeDeclaration*, std::size_t> used;
  std::vector<bool> taken(candidates.size(), false);
  bool progress = true;
  while (progress) {
    progress = false;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (taken[i]) continue;
      const Atom& a = candidates[i];
      for (const auto* d : bodies) {
        if (!d->matchesGround(a)) continue;
        if (d->recall && used[d] >= *d->recall) continue;
        bool ready = true;
        for (std::size_t k = 0; k < d->args.size() && ready; ++k)
          if (d->args[k].marker == Placemarker::Input) ready = bound.count(a.args[k]) != 0;
        if (!ready) continue;
        ++used[d];
        for (std::size_t k = 0; k < d->args.size(); ++k)
          if (d->args[k].marker != Placemarker::Ground) bound.insert(a.args[k]);
        taken[i] = true;
        progress = true;
        break;
      }
    }
  }

  KernelClause k;
  k.windowId = window.id;
  k.head = conclusion;
  for (std::size_t i = 0; i < candidates.size(); ++i)
    if (taken[i]) k.body.push_back(candidates[i]);
  k.clause = variabilize(k, modes);
  return k;
}

bool entailsWith(const Program& background, const ExampleWindow& w, const Hypothesis* h, const Atom& query) {
  Program p = background;
  for (const auto& r : w.factProgram().rules) p.rules.push_back(r);
  if (h)
    for (const auto& r : h->rules()) p.rules.push_back(r);
  return solver::entails(p, query, solver::Mode::Cautious);
}

std::vector<HypothesisClause> specializeWith(const HypothesisClause& clause, std::span<const KernelClause> kernels,
                                             std::span<const ExampleWindow> negatives, const ModeSet& modes,
                                             ClosureCache& closures) {
  auto findKernel = [&](const std::string& id) -> const KernelClause* {
    for (const auto& k : kernels)
      if (k.id == id) return &k;
    return nullptr;
  };
  auto excludesAll = [&](const Rule& r) {
    return std::none_of(negatives.begin(), negatives.end(),
                        [&](const ExampleWindow& w) { return firesOnNegative(r, w, closures); });
  };

  std::vector<Rule> refined;
  for (const auto& id : clause.support) {
    const KernelClause* k = findKernel(id);
    if (!k) continue;
    auto theta = logic::subsumptionWitness(clause.clause, k->clause);
    if (!theta) continue;
    Rule base = logic::applySubstitution(clause.clause, *theta);
    base.body = inReferenceOrder(base.body, k->clause.body);

    std::vector<Literal> candidates;
    for (const auto& l : k->clause.body)
      if (std::find(base.body.begin(), base.body.end(), l) == base.body.end()) candidates.push_back(l);
    sortByModePreference(candidates, modes);

    std::optional<Rule> found;
    for (std::size_t size = 0; size <= candidates.size() && !found; ++size) {
      forEachCombination(candidates.size(), size, [&](const std::vector<std::size_t>& pick) {
        std::vector<Literal> chosen = base.body;
        for (auto i : pick) chosen.push_back(candidates[i]);
        Rule r{base.head, inReferenceOrder(chosen, k->clause.body), {}};
        if (!conformsToModes(r, modes) || !excludesAll(r)) return false;
        found = std::move(r);
        return true;
      });
    }
    if (!found)
      throw QuarantineError("no refinement from the support set removes the false positives",
                            negatives.empty() ? std::string{} : negatives.front().id,
                            renderRule(clause.clause) + " with kernel " + id);
    Rule r = logic::canonicalVariables(*found);
    if (std::none_of(refined.begin(), refined.end(), [&](const Rule& x) { return logic::isVariant(x, r); }))
      refined.push_back(std::move(r));
  }

  std::vector<HypothesisClause> out;
  for (auto& r : refined) {
    HypothesisClause hc{std::move(r), {}};
    for (const auto& id : clause.support) {
      const KernelClause* k = findKernel(id);
      if (k && logic::thetaSubsumes(hc.clause, k->clause)) hc.support.push_back(id);
    }
    out.push_back(std::move(hc));
  }
  return out;
}

Rule generalizeWith(const KernelClause& kernel, const ExampleWindow& window, const ModeSet& modes,
                    ClosureCache& closures) {
  std::vector<Literal> candidates = kernel.clause.body;
  sortByModePreference(candidates, modes);
  std::optional<Rule> found;
  for (std::size_t size = 0; size <= candidates.size() && !found; ++size) {
    forEachCombination(candidates.size(), size, [&](const std::vector<std::size_t>& pick) {
      std::vector<Literal> chosen;
      for (auto i : pick) chosen.push_back(candidates[i]);
      Rule r{kernel.clause.head, inReferenceOrder(chosen, kernel.clause.body), {}};
      if (!conformsToModes(r, modes) || firesOnNegative(r, window, closures)) return false;
      found = std::move(r);
      return true;
    });
  }
  // The kernel itself is always a candidate; if even that fires on a negative
  // of its own window the caller quarantines.
  if (!found) throw QuarantineError("kernel clause contradicts its own window", window.id, renderRule(kernel.clause));
  return logic::canonicalVariables(*found);
}

}  // namespace

// ---------------------------------------------------------------------------
// Kernel construction

Rule variabilize(const KernelClause& kernel, const ModeSet& modes) {
  std::map<Term, std::string> names;
  auto nameFor = [&](const Term& t) {
    auto it = names.find(t);
    if (it != names.end()) return Term::variable(it->second);
    std::string n = names.empty() ? "V" : "X" + std::to_string(names.size());
    names.emplace(t, n);
    return Term::variable(n);
  };
  auto lift = [&](const Atom& a, const ModeDeclaration* d) {
    Atom out = a;
    if (!d) return out;
    for (std::size_t k = 0; k < d->args.size(); ++k)
      if (d->args[k].marker != Placemarker::Ground) out.args[k] = nameFor(a.args[k]);
    return out;
  };
  auto schemeFor = [&](const Atom& a, const std::vector<const ModeDeclaration*>& decls) -> const ModeDeclaration* {
    for (const auto* d : decls)
      if (d->matchesGround(a)) return d;
    return nullptr;
  };

  Rule r;
  r.head = lift(kernel.head, schemeFor(kernel.head, modes.heads()));
  auto bodies = modes.bodies();
  for (const auto& b : kernel.body) r.body.push_back(Literal{lift(b, schemeFor(b, bodies)), false});
  return r;
}

std::vector<KernelClause> buildKernelSet(const ExampleWindow& window, const Program& background, const ModeSet& modes,
                                         const Hypothesis* current, std::vector<std::string>* diagnostics) {
  ClosureCache closures(background);
  std::vector<KernelClause> out;
  for (const auto& c : window.conclusions) {
    if (c.polarity != Polarity::Positive) continue;
    if (entailsWith(background, window, current, c.atom)) continue;
    auto k = kernelFor(window, c.atom, modes, closures);
    if (!k) {
      if (diagnostics) diagnostics->push_back("no head declaration matches " + renderAtom(c.atom));
      continue;
    }
    out.push_back(std::move(*k));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Coverage and revision operators

CoverageReport covers(const Hypothesis& h, std::span<const ExampleWindow> windows, const Program& background) {
  CoverageReport report;
  const auto hypothesisRules = h.rules();
  for (const auto& w : windows) {
    Program p = background;
    for (const auto& r : w.factProgram().rules) p.rules.push_back(r);
    for (const auto& r : hypothesisRules) p.rules.push_back(r);
    auto sets = solver::answerSets(p);
    if (sets.empty()) throw InconsistentProgramError("window " + w.id + " has no answer set under the hypothesis");
    for (const auto& c : w.conclusions) {
      bool entailed = std::all_of(sets.begin(), sets.end(), [&](const solver::AnswerSet& s) { return s.contains(c.atom); });
      WindowAtom wa{w.id, c.atom};
      if (c.polarity == Polarity::Positive)
        (entailed ? report.truePositives : report.falseNegatives).push_back(std::move(wa));
      else if (entailed)
        report.falsePositives.push_back(std::move(wa));
    }
  }
  return report;
}

std::vector<HypothesisClause> specialize(const HypothesisClause& clause, std::span<const KernelClause> kernels,
                                         std::span<const ExampleWindow> negatives, const Program& background,
                                         const ModeSet& modes) {
  ClosureCache closures(background);
  return specializeWith(clause, kernels, negatives, modes, closures);
}

Rule generalize(const KernelClause& kernel, const ExampleWindow& window, const Program& background,
                const ModeSet& modes) {
  ClosureCache closures(background);
  return generalizeWith(kernel, window, modes, closures);
}

// ---------------------------------------------------------------------------
// Incremental revision

namespace {

struct StepEvents {
  bool added = false;
  bool specialized = false;
  bool split = false;
  bool supportGrew = false;
};

class Reviser {
 public:
  Reviser(Hypothesis h, const Program& background, const ModeSet& modes, std::span<const ExampleWindow> seen)
      : h_(std::move(h)), background_(background), modes_(modes), seen_(seen), closures_(background) {
    for (const auto& c : h_.clauses) before_.push_back(c.clause);
  }

  Hypothesis run(const ExampleWindow& window) {
    std::span<const ExampleWindow> current(&window, 1);
    auto first = covers(h_, current, background_);
    for (const auto& tp : first.truePositives) attachCovered(window, tp.atom);
    for (const auto& fn : first.falseNegatives) absorb(window, fn.atom);

    const std::size_t maxRounds = 4 * (seen_.size() + 1);
    bool sound = false;
    for (std::size_t round = 0; round < maxRounds && !sound; ++round) {
      auto report = covers(h_, seen_, background_);
      if (report.sound()) {
        sound = true;
      } else if (!report.falsePositives.empty()) {
        repairFalsePositives(report.falsePositives);
      } else {
        for (const auto& fn : report.falseNegatives) absorb(windowById(fn.windowId), fn.atom);
      }
    }
    if (!sound) throw QuarantineError("revision did not converge on the windows seen so far", window.id);

    removeRedundant();
    nonEmptyAfter_ = !h_.clauses.empty();
    return std::move(h_);
  }

  Action action() const {
    if (before_.empty() && nonEmptyAfter_) return Action::Initialize;
    if (events_.split) return Action::Split;
    if (events_.specialized) return Action::Specialize;
    if (events_.added) return Action::AddClause;
    if (events_.supportGrew) return Action::SupportGrow;
    return Action::Unchanged;
  }

 private:
  const ExampleWindow& windowById(const std::string& id) const {
    for (const auto& w : seen_)
      if (w.id == id) return w;
    throw InvalidWindowError("unknown window " + id);
  }

  std::optional<KernelClause> kernel(const ExampleWindow& w, const Atom& conclusion) {
    return kernelFor(w, conclusion, modes_, closures_);
  }

  std::string registerKernel(KernelClause k) {
    k.id = "K" + std::to_string(h_.kernels.size() + 1);
    h_.kernels.push_back(std::move(k));
    return h_.kernels.back().id;
  }

  bool hasVariantKernel(const HypothesisClause& c, const KernelClause& k) const {
    return std::any_of(c.support.begin(), c.support.end(), [&](const std::string& id) {
      const KernelClause* other = h_.kernel(id);
      return other && logic::isVariant(other->clause, k.clause);
    });
  }

  // A covered positive still joins the support of every clause subsuming its
  // kernel, so later specializations keep covering it.
  void attachCovered(const ExampleWindow& w, const Atom& conclusion) {
    auto k = kernel(w, conclusion);
    if (!k) return;
    std::vector<std::size_t> targets;
    for (std::size_t i = 0; i < h_.clauses.size(); ++i)
      if (logic::thetaSubsumes(h_.clauses[i].clause, k->clause) && !hasVariantKernel(h_.clauses[i], *k))
        targets.push_back(i);
    if (targets.empty()) return;
    std::string id = registerKernel(std::move(*k));
    for (auto i : targets) h_.clauses[i].support.push_back(id);
    events_.supportGrew = true;
  }

  void absorb(const ExampleWindow& w, const Atom& conclusion) {
    auto k = kernel(w, conclusion);
    if (!k) throw QuarantineError("no head declaration matches the conclusion", w.id, renderAtom(conclusion));
    std::vector<std::size_t> targets;
    for (std::size_t i = 0; i < h_.clauses.size(); ++i)
      if (logic::thetaSubsumes(h_.clauses[i].clause, k->clause)) targets.push_back(i);
    if (!targets.empty()) {
      std::string id = registerKernel(std::move(*k));
      for (auto i : targets) h_.clauses[i].support.push_back(id);
      events_.supportGrew = true;
      return;
    }
    Rule clause = generalizeWith(*k, w, modes_, closures_);
    std::string id = registerKernel(std::move(*k));
    h_.clauses.push_back(HypothesisClause{std::move(clause), {id}});
    events_.added = true;
  }

  void repairFalsePositives(const std::vector<WindowAtom>& falsePositives) {
    std::vector<std::vector<const ExampleWindow*>> offending(h_.clauses.size());
    for (const auto& fp : falsePositives) {
      const ExampleWindow& w = windowById(fp.windowId);
      bool attributed = false;
      for (std::size_t i = 0; i < h_.clauses.size(); ++i) {
        if (!fires(h_.clauses[i].clause, closures_.of(w), fp.atom)) continue;
        attributed = true;
        if (std::find(offending[i].begin(), offending[i].end(), &w) == offending[i].end()) offending[i].push_back(&w);
      }
      if (!attributed)
        throw QuarantineError("negative example is derived without any learned clause", fp.windowId,
                              renderAtom(fp.atom));
    }
    std::vector<HypothesisClause> next;
    for (std::size_t i = 0; i < h_.clauses.size(); ++i) {
      if (offending[i].empty()) {
        next.push_back(h_.clauses[i]);
        continue;
      }
      std::vector<ExampleWindow> negatives;
      for (const auto* w : offending[i]) negatives.push_back(*w);
      auto refinements = specializeWith(h_.clauses[i], h_.kernels, negatives, modes_, closures_);
      bool existing = std::any_of(before_.begin(), before_.end(),
                                  [&](const Rule& r) { return logic::isVariant(r, h_.clauses[i].clause); });
      if (existing) (refinements.size() > 1 ? events_.split : events_.specialized) = true;
      for (auto& r : refinements) next.push_back(std::move(r));
    }
    h_.clauses = std::move(next);
  }

  // Drops clauses subsumed by another clause, handing their support over.
  void removeRedundant() {
    auto& cs = h_.clauses;
    for (std::size_t i = 0; i < cs.size();) {
      std::optional<std::size_t> keeper;
      for (std::size_t j = 0; j < cs.size() && !keeper; ++j) {
        if (i == j || !logic::thetaSubsumes(cs[j].clause, cs[i].clause)) continue;
        bool mutual = logic::thetaSubsumes(cs[i].clause, cs[j].clause);
        if (!mutual || j < i) keeper = j;
      }
      if (!keeper) {
        ++i;
        continue;
      }
      for (const auto& id : cs[i].support) {
        const KernelClause* k = h_.kernel(id);
        if (k && !hasVariantKernel(cs[*keeper], *k)) cs[*keeper].support.push_back(id);
      }
      cs.erase(cs.begin() + static_cast<std::ptrdiff_t>(i));
    }
  }

  Hypothesis h_;
  const Program& background_;
  const ModeSet& modes_;
  std::span<const ExampleWindow> seen_;
  ClosureCache closures_;
  std::vector<Rule> before_;
  StepEvents events_;
  bool nonEmptyAfter_ = false;
};

}  // namespace

Hypothesis processWindow(const Hypothesis& state, const ExampleWindow& window, const Program& background,
                         const ModeSet& modes, std::span<const ExampleWindow> memory) {
  for (const auto& w : memory)
    if (w.id == window.id) throw DuplicateWindowError("window id already seen: " + window.id, window.id);
  validateWindow(window, modes);

  std::vector<ExampleWindow> seen(memory.begin(), memory.end());
  seen.push_back(window);

  Reviser reviser(state, background, modes, seen);
  Hypothesis next = reviser.run(window);
  Action action = reviser.action();
  auto before = state.render();
  auto after = next.render();
  if (action == Action::Unchanged && before != after) action = Action::Specialize;
  next.revisionLog.push_back(RevisionEntry{window.id, action, std::move(before), std::move(after)});
  return next;
}

LearnResult learnStream(std::span<const ExampleWindow> windows, const Program& background, const ModeSet& modes) {
  LearnResult result;
  std::vector<ExampleWindow> memory;
  std::set<std::string> ids;
  for (const auto& w : windows) {
    if (!ids.insert(w.id).second) throw DuplicateWindowError("window id already seen: " + w.id, w.id);
    try {
      result.hypothesis = processWindow(result.hypothesis, w, background, modes, memory);
      memory.push_back(w);
    } catch (const QuarantineError& e) {
      result.quarantined.push_back(QuarantineRecord{w.id, e.what(), e.detail()});
    }
  }
  return result;
}

}  // namespace ethos::learn
