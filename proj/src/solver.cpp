#include "ethos/solver.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <limits>
#include <unordered_map>
#include <unordered_set>

namespace ethos::solver {

using logic::Literal;
using logic::renderAtom;

std::optional<AtomId> GroundProgram::find(const Atom& a) const {
  auto it = index_.find(a);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

AtomId GroundProgram::intern(const Atom& a) {
  auto [it, inserted] = index_.emplace(a, atoms.size());
  if (inserted) atoms.push_back(a);
  return it->second;
}

std::string GroundProgram::render(const GroundRule& r) const {
  logic::Rule out;
  if (r.head) out.head = atoms[*r.head];
  for (auto id : r.positive) out.body.push_back(Literal{atoms[id], false});
  for (auto id : r.negative) out.body.push_back(Literal{atoms[id], true});
  return logic::renderRule(out);
}

// ---------------------------------------------------------------------------
// Grounding

namespace {

class Grounder {
 public:
  Grounder(const Program& program, const GroundOptions& options) : program_(program), options_(options) {}

  GroundProgram run() {
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t i = 0; i < program_.rules.size(); ++i) {
        const Rule& rule = program_.rules[i];
        std::vector<const Atom*> positive;
        for (const auto& l : rule.body)
          if (!l.naf) positive.push_back(&l.atom);
        Substitution theta;
        enumerate(i, rule, positive, 0, theta, changed);
      }
    }
    return std::move(gp_);
  }

 private:
  void enumerate(std::size_t ruleIndex, const Rule& rule, const std::vector<const Atom*>& positive,
                 std::size_t at, Substitution& theta, bool& changed) {
    if (at == positive.size()) {
      emit(ruleIndex, rule, theta, changed);
      return;
    }
    auto it = possible_.find(positive[at]->predicate);
    if (it == possible_.end()) return;
    // Snapshot: atoms added during this pass are picked up by the next one.
    const std::size_t count = it->second.size();
    for (std::size_t k = 0; k < count; ++k) {
      const Atom& candidate = gp_.atoms[possible_[positive[at]->predicate][k]];
      Substitution trial = theta;
      if (!logic::match(*positive[at], candidate, trial)) continue;
      enumerate(ruleIndex, rule, positive, at + 1, trial, changed);
    }
  }

  void emit(std::size_t ruleIndex, const Rule& rule, const Substitution& theta, bool& changed) {
    Rule inst = logic::applySubstitution(rule, theta);
    std::string key = std::to_string(ruleIndex) + "|" + logic::renderRule(inst);
    if (!seen_.insert(key).second) return;
    if (gp_.rules.size() >= options_.maxGroundRules)
      throw GroundingLimitError("grounding exceeds " + std::to_string(options_.maxGroundRules) + " rules",
                                logic::renderRule(rule));
    GroundRule g;
    g.source = ruleIndex;
    g.theta = theta;
    if (inst.head) {
      AtomId h = gp_.intern(*inst.head);
      g.head = h;
      if (possibleIds_.insert(h).second) {
        possible_[inst.head->predicate].push_back(h);
        changed = true;
      }
    }
    for (const auto& l : inst.body) {
      AtomId id = gp_.intern(l.atom);
      (l.naf ? g.negative : g.positive).push_back(id);
    }
    gp_.rules.push_back(std::move(g));
    changed = true;
  }

  const Program& program_;
  GroundOptions options_;
  GroundProgram gp_;
  std::unordered_map<std::string, std::vector<AtomId>> possible_;
  std::unordered_set<AtomId> possibleIds_;
  std::unordered_set<std::string> seen_;
};

// Least model of the reduct of `gp` w.r.t. `candidate`, on dense bitmaps.
std::vector<char> gamma(const GroundProgram& gp, const std::vector<char>& candidate) {
  const std::size_t n = gp.atoms.size();
  std::vector<char> model(n, 0);
  std::vector<std::size_t> missing(gp.rules.size(), 0);
  std::vector<std::vector<std::size_t>> watchers(n);
  std::vector<AtomId> queue;
  for (std::size_t i = 0; i < gp.rules.size(); ++i) {
    const auto& r = gp.rules[i];
    if (!r.head) continue;
    bool blocked = std::any_of(r.negative.begin(), r.negative.end(), [&](AtomId a) { return candidate[a]; });
    if (blocked) {
      missing[i] = std::numeric_limits<std::size_t>::max();
      continue;
    }
    missing[i] = r.positive.size();
    for (auto a : r.positive) watchers[a].push_back(i);
    if (missing[i] == 0 && !model[*r.head]) {
      model[*r.head] = 1;
      queue.push_back(*r.head);
    }
  }
  while (!queue.empty()) {
    AtomId a = queue.back();
    queue.pop_back();
    for (auto i : watchers[a]) {
      if (--missing[i] == 0) {
        AtomId h = *gp.rules[i].head;
        if (!model[h]) {
          model[h] = 1;
          queue.push_back(h);
        }
      }
    }
  }
  return model;
}

bool violatesConstraint(const GroundProgram& gp, const std::vector<char>& s) {
  for (const auto& r : gp.rules) {
    if (r.head) continue;
    bool pos = std::all_of(r.positive.begin(), r.positive.end(), [&](AtomId a) { return s[a]; });
    bool neg = std::none_of(r.negative.begin(), r.negative.end(), [&](AtomId a) { return s[a]; });
    if (pos && neg) return true;
  }
  return false;
}

constexpr std::size_t kMaxUndecided = 24;

}  // namespace

GroundProgram ground(const Program& program, const GroundOptions& options) {
  return Grounder(program, options).run();
}

GroundProgram reduct(const GroundProgram& gp, const AtomIdSet& candidate) {
  GroundProgram out = gp;
  out.rules.clear();
  for (const auto& r : gp.rules) {
    bool blocked = std::any_of(r.negative.begin(), r.negative.end(), [&](AtomId a) { return candidate.count(a); });
    if (blocked) continue;
    GroundRule kept = r;
    kept.negative.clear();
    out.rules.push_back(std::move(kept));
  }
  return out;
}

AtomIdSet leastModel(const GroundProgram& positive) {
  std::vector<char> none(positive.atoms.size(), 0);
  auto model = gamma(positive, none);
  AtomIdSet out;
  for (AtomId a = 0; a < model.size(); ++a)
    if (model[a]) out.insert(a);
  return out;
}

std::vector<std::string> AnswerSet::sortedRendering() const {
  std::vector<std::string> out;
  out.reserve(atoms.size());
  for (const auto& a : atoms) out.push_back(renderAtom(a));
  std::sort(out.begin(), out.end());
  return out;
}

std::string AnswerSet::render() const {
  std::string out = "{";
  auto items = sortedRendering();
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += items[i];
  }
  return out + "}";
}

std::vector<AnswerSet> answerSets(const GroundProgram& gp, std::size_t limit) {
  const std::size_t n = gp.atoms.size();
  // Alternating fixpoint: every stable model S satisfies lower ⊆ S ⊆ upper.
  std::vector<char> empty(n, 0);
  std::vector<char> upper = gamma(gp, empty);
  std::vector<char> lower = gamma(gp, upper);
  while (true) {
    auto nextUpper = gamma(gp, lower);
    auto nextLower = gamma(gp, nextUpper);
    if (nextUpper == upper && nextLower == lower) break;
    upper = std::move(nextUpper);
    lower = std::move(nextLower);
  }
  std::vector<AtomId> undecided;
  for (AtomId a = 0; a < n; ++a)
    if (upper[a] && !lower[a]) undecided.push_back(a);
  if (undecided.size() > kMaxUndecided)
    throw GroundingLimitError("answer-set search over " + std::to_string(undecided.size()) +
                              " undecided atoms exceeds the limit of " + std::to_string(kMaxUndecided));

  std::vector<AnswerSet> out;
  std::vector<char> candidate = lower;
  const std::uint64_t total = std::uint64_t{1} << undecided.size();
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    for (std::size_t b = 0; b < undecided.size(); ++b) candidate[undecided[b]] = (mask >> b) & 1U;
    if (gamma(gp, candidate) != candidate) continue;
    if (violatesConstraint(gp, candidate)) continue;
    AnswerSet s;
    for (AtomId a = 0; a < n; ++a)
      if (candidate[a]) s.atoms.insert(gp.atoms[a]);
    out.push_back(std::move(s));
  }
  std::sort(out.begin(), out.end(), [](const AnswerSet& a, const AnswerSet& b) {
    return a.sortedRendering() < b.sortedRendering();
  });
#ifndef NDEBUG
  for (const auto& s : out) {
    AtomIdSet ids;
    for (const auto& a : s.atoms) ids.insert(*gp.find(a));
    assert(leastModel(reduct(gp, ids)) == ids);
  }
#endif
  if (limit != 0 && out.size() > limit) out.resize(limit);
  return out;
}

std::vector<AnswerSet> answerSets(const Program& program, const SolveOptions& options) {
  return answerSets(ground(program, options.ground), options.limit);
}

bool entails(const Program& program, const Atom& query, Mode mode) {
  auto sets = answerSets(program);
  if (sets.empty()) throw InconsistentProgramError("program has no answer set", renderAtom(query));
  if (mode == Mode::Cautious)
    return std::all_of(sets.begin(), sets.end(), [&](const AnswerSet& s) { return s.contains(query); });
  return std::any_of(sets.begin(), sets.end(), [&](const AnswerSet& s) { return s.contains(query); });
}

std::set<Atom> cautiousConsequences(const Program& program) {
  auto sets = answerSets(program);
  if (sets.empty()) throw InconsistentProgramError("program has no answer set");
  std::set<Atom> out = sets.front().atoms;
  for (std::size_t i = 1; i < sets.size(); ++i) {
    std::set<Atom> keep;
    std::set_intersection(out.begin(), out.end(), sets[i].atoms.begin(), sets[i].atoms.end(),
                          std::inserter(keep, keep.begin()));
    out = std::move(keep);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Explanations

std::size_t Derivation::depth() const {
  if (kind != Kind::Rule) return 0;
  std::size_t deepest = 0;
  for (const auto& c : children) deepest = std::max(deepest, c.depth());
  return deepest + 1;
}

Derivation explain(const Program& program, const Atom& query, const AnswerSet& answerSet) {
  if (!answerSet.contains(query))
    throw NoDerivationError("atom is not in the answer set", renderAtom(query));
  GroundProgram gp = ground(program);
  const std::size_t n = gp.atoms.size();
  std::vector<char> in(n, 0);
  for (AtomId a = 0; a < n; ++a) in[a] = answerSet.contains(gp.atoms[a]);

  constexpr std::size_t kInf = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> level(n, kInf);
  std::vector<std::size_t> best(n, kInf);
  auto better = [&](std::size_t lvl, std::size_t rule, AtomId h) {
    if (lvl != level[h]) return lvl < level[h];
    const auto& a = gp.rules[rule];
    const auto& b = gp.rules[best[h]];
    return a.source != b.source ? a.source < b.source : rule < best[h];
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < gp.rules.size(); ++i) {
      const auto& r = gp.rules[i];
      if (!r.head || !in[*r.head]) continue;
      if (std::any_of(r.negative.begin(), r.negative.end(), [&](AtomId a) { return in[a]; })) continue;
      std::size_t lvl = 0;
      bool ready = true;
      for (auto a : r.positive) {
        if (!in[a] || level[a] == kInf) {
          ready = false;
          break;
        }
        lvl = std::max(lvl, level[a] + 1);
      }
      if (!ready) continue;
      if (!r.positive.empty() || !r.negative.empty()) lvl = std::max<std::size_t>(lvl, 1);
      if (best[*r.head] == kInf || better(lvl, i, *r.head)) {
        level[*r.head] = lvl;
        best[*r.head] = i;
        changed = true;
      }
    }
  }

  auto root = gp.find(query);
  if (!root || best[*root] == kInf) throw NoDerivationError("no derivation in the answer set", renderAtom(query));

  std::function<Derivation(AtomId)> build = [&](AtomId a) {
    const GroundRule& g = gp.rules[best[a]];
    Derivation d;
    d.atom = gp.atoms[a];
    d.rule = program.rules[g.source];
    d.theta = g.theta;
    if (g.positive.empty() && g.negative.empty()) {
      d.kind = Derivation::Kind::Fact;
      return d;
    }
    d.kind = Derivation::Kind::Rule;
    // Children follow the literal order of the source rule.
    const Rule& src = program.rules[g.source];
    for (const auto& l : src.body) {
      Atom ga = logic::applySubstitution(l.atom, g.theta);
      if (l.naf) {
        Derivation leaf;
        leaf.kind = Derivation::Kind::Naf;
        leaf.atom = std::move(ga);
        d.children.push_back(std::move(leaf));
      } else {
        d.children.push_back(build(*gp.find(ga)));
      }
    }
    return d;
  };
  return build(*root);
}

std::vector<std::pair<Rule, Substitution>> firedRules(const Derivation& d) {
  std::vector<std::pair<Rule, Substitution>> out;
  std::function<void(const Derivation&)> walk = [&](const Derivation& node) {
    if (node.kind == Derivation::Kind::Rule) out.emplace_back(*node.rule, node.theta);
    for (const auto& c : node.children) walk(c);
  };
  walk(d);
  return out;
}

}  // namespace ethos::solver
