#include "support.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "ethos/codec.hpp"

namespace ethos::testing {

using logic::Atom;
using logic::Literal;
using logic::Program;
using logic::Rule;
using logic::Term;

std::filesystem::path dataPath(const std::string& name) { return std::filesystem::path(ETHOS_DATA_DIR) / name; }

namespace {

std::vector<codec::Json> jsonLines(const std::string& name) {
  std::ifstream in(dataPath(name));
  if (!in) throw std::runtime_error("missing data file " + name);
  std::vector<codec::Json> out;
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) out.push_back(codec::Json::parse(line));
  return out;
}

std::string slurp(const std::string& name) {
  std::ifstream in(dataPath(name));
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

std::vector<learn::ExampleWindow> table1Windows() {
  std::vector<learn::ExampleWindow> out;
  for (const auto& j : jsonLines("table1_windows.jsonl")) out.push_back(codec::windowFromJson(j));
  return out;
}

std::vector<dialogue::Scenario> table1Scenarios() {
  std::vector<dialogue::Scenario> out;
  for (const auto& j : jsonLines("table1_scenarios.jsonl")) out.push_back(dialogue::parseScenario(j));
  return out;
}

logic::Program table1Background() { return logic::parseProgram(slurp("background.lp")); }
learn::ModeSet table1Modes() { return learn::parseModes(slurp("modes.lp")); }

const std::vector<Table1Step>& table1Trace() {
  static const std::string h1 = "unethical(V) :- answer(V).";
  static const std::string h2 = "unethical(X1) :- answer(X1), not_SupportEvidence(X1).";
  static const std::string h32 = "unethical(X1) :- answer(X1), spreadFalseBelief(X1).";
  static const std::string h32final = "unethical(X1) :- answer(X1), spreadFalseBelief(X1), exploitEmotions(X1).";
  static const std::vector<Table1Step> trace{
      {"w1", {h1}, "initialize"},        {"w2", {h2}, "specialize"},
      {"w3", {h2}, "support-grow"},      {"w4", {h2, h32}, "split"},
      {"w5", {h2, h32}, "unchanged"},    {"w6", {h2, h32final}, "specialize"},
  };
  return trace;
}

TempDir::TempDir() {
  std::string tmpl = (std::filesystem::temp_directory_path() / "ethos-test-XXXXXX").string();
  if (!::mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

// ---------------------------------------------------------------------------
// Oracles

namespace {

void collectConstants(const Term& t, std::set<std::string>& out) {
  if (t.kind == Term::Kind::Constant) out.insert(t.name);
  for (const auto& a : t.args) collectConstants(a, out);
}

void collectVariables(const Term& t, std::vector<std::string>& out) {
  if (t.kind == Term::Kind::Variable && std::find(out.begin(), out.end(), t.name) == out.end()) out.push_back(t.name);
  for (const auto& a : t.args) collectVariables(a, out);
}

std::string groundTerm(const Term& t, const std::map<std::string, std::string>& env) {
  if (t.kind == Term::Kind::Variable) return env.at(t.name);
  if (t.kind == Term::Kind::Constant) return t.name;
  std::string s = t.name + "(";
  for (std::size_t i = 0; i < t.args.size(); ++i) s += (i ? "," : "") + groundTerm(t.args[i], env);
  return s + ")";
}

std::string groundAtom(const Atom& a, const std::map<std::string, std::string>& env) {
  if (a.args.empty()) return a.predicate;
  std::string s = a.predicate + "(";
  for (std::size_t i = 0; i < a.args.size(); ++i) s += (i ? "," : "") + groundTerm(a.args[i], env);
  return s + ")";
}

std::vector<std::string> ruleVariables(const Rule& r) {
  std::vector<std::string> vars;
  if (r.head)
    for (const auto& t : r.head->args) collectVariables(t, vars);
  for (const auto& l : r.body)
    for (const auto& t : l.atom.args) collectVariables(t, vars);
  return vars;
}

// Calls f for every assignment of `vars` to `constants`.
void forEachAssignment(const std::vector<std::string>& vars, const std::vector<std::string>& constants,
                       const std::function<void(const std::map<std::string, std::string>&)>& f) {
  std::map<std::string, std::string> env;
  std::function<void(std::size_t)> go = [&](std::size_t i) {
    if (i == vars.size()) {
      f(env);
      return;
    }
    for (const auto& c : constants) {
      env[vars[i]] = c;
      go(i + 1);
    }
  };
  if (!vars.empty() && constants.empty()) return;
  go(0);
}

struct PlainRule {
  std::optional<std::string> head;
  std::vector<std::string> pos, neg;
};

}  // namespace

std::set<std::set<std::string>> bruteForceStableModels(const Program& p) {
  std::set<std::string> constantSet;
  for (const auto& r : p.rules) {
    if (r.head)
      for (const auto& t : r.head->args) collectConstants(t, constantSet);
    for (const auto& l : r.body)
      for (const auto& t : l.atom.args) collectConstants(t, constantSet);
  }
  std::vector<std::string> constants(constantSet.begin(), constantSet.end());

  std::vector<PlainRule> ground;
  for (const auto& r : p.rules) {
    forEachAssignment(ruleVariables(r), constants, [&](const auto& env) {
      PlainRule g;
      if (r.head) g.head = groundAtom(*r.head, env);
      for (const auto& l : r.body) (l.naf ? g.neg : g.pos).push_back(groundAtom(l.atom, env));
      ground.push_back(std::move(g));
    });
  }
  std::set<std::string> headSet;
  for (const auto& g : ground)
    if (g.head) headSet.insert(*g.head);
  std::vector<std::string> heads(headSet.begin(), headSet.end());
  if (heads.size() > 20) throw std::runtime_error("oracle: too many head atoms");

  std::set<std::set<std::string>> models;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << heads.size()); ++mask) {
    std::set<std::string> s;
    for (std::size_t i = 0; i < heads.size(); ++i)
      if (mask >> i & 1) s.insert(heads[i]);
    const auto holds = [&](const PlainRule& g, const std::set<std::string>& in) {
      for (const auto& a : g.pos)
        if (!in.count(a)) return false;
      return true;
    };
    const auto blocked = [&](const PlainRule& g) {
      for (const auto& a : g.neg)
        if (s.count(a)) return true;
      return false;
    };
    bool violated = false;
    for (const auto& g : ground)
      if (!g.head && !blocked(g) && holds(g, s)) violated = true;
    if (violated) continue;
    std::set<std::string> lm;
    for (bool changed = true; changed;) {
      changed = false;
      for (const auto& g : ground)
        if (g.head && !blocked(g) && holds(g, lm) && lm.insert(*g.head).second) changed = true;
    }
    if (lm == s) models.insert(s);
  }
  return models;
}

std::set<std::string> directConsequences(const Rule& r, const std::set<std::string>& facts) {
  std::set<std::string> constantSet;
  for (const auto& f : facts)
    for (const auto& t : logic::parseAtom(f).args) collectConstants(t, constantSet);
  if (r.head)
    for (const auto& t : r.head->args) collectConstants(t, constantSet);
  for (const auto& l : r.body)
    for (const auto& t : l.atom.args) collectConstants(t, constantSet);
  std::vector<std::string> constants(constantSet.begin(), constantSet.end());
  std::set<std::string> out;
  forEachAssignment(ruleVariables(r), constants, [&](const auto& env) {
    for (const auto& l : r.body)
      if (facts.count(groundAtom(l.atom, env)) == static_cast<std::size_t>(l.naf)) return;
    if (r.head) out.insert(groundAtom(*r.head, env));
  });
  return out;
}

// ---------------------------------------------------------------------------
// Generators

namespace {

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& v) {
  return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

bool chance(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

bool mentions(const Atom& a, const std::string& var) {
  std::vector<std::string> vars;
  for (const auto& t : a.args) collectVariables(t, vars);
  return std::find(vars.begin(), vars.end(), var) != vars.end();
}

// Adds a positive literal for every variable only found in the head or
// under `not`.
void makeSafe(Rule& r, const std::string& guard) {
  std::vector<std::string> vars = ruleVariables(r);
  for (const auto& v : vars) {
    bool bound = false;
    for (const auto& l : r.body)
      if (!l.naf && mentions(l.atom, v)) bound = true;
    if (!bound) r.body.push_back(Literal{Atom{guard, {Term::variable(v)}}, false});
  }
}

}  // namespace

Program randomProgram(Rng& rng, int maxRules) {
  static const std::vector<std::string> props{"p", "q", "r", "s"};
  static const std::vector<std::string> unary{"t", "u"};
  static const std::vector<std::string> constants{"a", "b", "c", "d"};
  const auto randomAtom = [&](bool allowVar) {
    if (chance(rng, 0.5)) return Atom{pick(rng, props), {}};
    Term arg = allowVar && chance(rng, 0.5) ? Term::variable("X") : Term::constant(pick(rng, constants));
    return Atom{pick(rng, unary), {arg}};
  };
  Program p;
  int n = std::uniform_int_distribution<int>(1, maxRules)(rng);
  for (int i = 0; i < n; ++i) {
    Rule r;
    if (!chance(rng, 0.1)) r.head = randomAtom(true);
    int body = std::uniform_int_distribution<int>(r.head ? 0 : 1, 3)(rng);
    for (int b = 0; b < body; ++b) r.body.push_back(Literal{randomAtom(true), chance(rng, 0.4)});
    makeSafe(r, pick(rng, unary));
    p.rules.push_back(std::move(r));
  }
  return p;
}

namespace {

Literal randomClauseLiteral(Rng& rng, bool naf) {
  static const std::vector<std::string> vars{"X", "Y", "Z"};
  static const std::vector<std::string> constants{"a", "b", "c"};
  const auto term = [&] { return chance(rng, 0.7) ? Term::variable(pick(rng, vars)) : Term::constant(pick(rng, constants)); };
  int which = std::uniform_int_distribution<int>(0, 2)(rng);
  Atom a = which == 0   ? Atom{"p", {term()}}
           : which == 1 ? Atom{"q", {term(), term()}}
                        : Atom{"r", {term()}};
  return Literal{std::move(a), naf && chance(rng, 0.25)};
}

}  // namespace

Rule randomClause(Rng& rng, bool naf) {
  static const std::vector<std::string> vars{"X", "Y", "Z"};
  Rule r;
  r.head = Atom{"h", {Term::variable(pick(rng, vars))}};
  int n = std::uniform_int_distribution<int>(1, 4)(rng);
  for (int i = 0; i < n; ++i) r.body.push_back(randomClauseLiteral(rng, naf));
  makeSafe(r, "p");
  return r;
}

Rule randomSpecialization(Rng& rng, const Rule& c, bool naf) {
  static const std::vector<std::string> vars{"X", "Y", "Z"};
  static const std::vector<std::string> constants{"a", "b", "c"};
  logic::Substitution theta;
  for (const auto& v : ruleVariables(c)) {
    double roll = std::uniform_real_distribution<double>(0, 1)(rng);
    if (roll < 0.25)
      theta[v] = Term::constant(pick(rng, constants));
    else if (roll < 0.45)
      theta[v] = Term::variable(pick(rng, vars));
  }
  Rule d = logic::applySubstitution(c, theta);
  int extra = std::uniform_int_distribution<int>(0, 2)(rng);
  for (int i = 0; i < extra; ++i) d.body.push_back(randomClauseLiteral(rng, naf));
  makeSafe(d, "p");
  return d;
}

std::set<std::string> randomWindowFacts(Rng& rng) {
  static const std::vector<std::string> constants{"a", "b", "c"};
  std::set<std::string> facts;
  int n = std::uniform_int_distribution<int>(0, 10)(rng);
  while (static_cast<int>(facts.size()) < n) {
    int which = std::uniform_int_distribution<int>(0, 2)(rng);
    if (which == 0) facts.insert("p(" + pick(rng, constants) + ")");
    if (which == 1) facts.insert("q(" + pick(rng, constants) + "," + pick(rng, constants) + ")");
    if (which == 2) facts.insert("r(" + pick(rng, constants) + ")");
  }
  return facts;
}

learn::ModeSet hiddenTargetModes() {
  return learn::parseModes(
      "modeh(1, unethical(+item)).\n"
      "modeb(1, answer(+item)).\n"
      "modeb(1, f1(+item)).\n"
      "modeb(1, f2(+item)).\n"
      "modeb(1, f3(+item)).\n"
      "modeb(1, f4(+item)).\n");
}

bool targetVerdict(const std::vector<Rule>& rules, const learn::ExampleWindow& w) {
  std::set<std::string> facts;
  for (const auto& f : w.facts) facts.insert(logic::renderAtom(f));
  const std::string handle = logic::renderTerm(w.conclusions.at(0).atom.args.at(0));
  for (const auto& r : rules)
    if (directConsequences(r, facts).count("unethical(" + handle + ")")) return true;
  return false;
}

HiddenTarget randomHiddenTarget(Rng& rng, int windows) {
  static const std::vector<std::string> features{"f1", "f2", "f3", "f4"};
  HiddenTarget t;
  int rules = std::uniform_int_distribution<int>(1, 2)(rng);
  for (int i = 0; i < rules; ++i) {
    Rule r;
    r.head = Atom{"unethical", {Term::variable("V")}};
    r.body.push_back(Literal{Atom{"answer", {Term::variable("V")}}, false});
    std::vector<std::string> chosen;
    int n = std::uniform_int_distribution<int>(1, 2)(rng);
    while (static_cast<int>(chosen.size()) < n) {
      const std::string& f = pick(rng, features);
      if (std::find(chosen.begin(), chosen.end(), f) == chosen.end()) chosen.push_back(f);
    }
    std::sort(chosen.begin(), chosen.end());
    for (const auto& f : chosen) r.body.push_back(Literal{Atom{f, {Term::variable("V")}}, false});
    t.rules.push_back(std::move(r));
  }
  for (int i = 0; i < windows; ++i) {
    learn::ExampleWindow w;
    w.id = "s" + std::to_string(i + 1);
    Term handle = Term::constant("h" + std::to_string(i + 1));
    w.facts.push_back(
        Atom{"ask", {Term::constant("customer"), Term::compound("infoabout", {Term::constant("prod" + std::to_string(i + 1))})}});
    w.facts.push_back(Atom{"answer", {handle}});
    for (const auto& f : features)
      if (chance(rng, 0.5)) w.facts.push_back(Atom{f, {handle}});
    w.conclusions.push_back({Atom{"unethical", {handle}}, learn::Polarity::Positive});
    if (!targetVerdict(t.rules, w)) w.conclusions[0].polarity = learn::Polarity::Negative;
    t.windows.push_back(std::move(w));
  }
  return t;
}

std::vector<std::string> rendered(const std::vector<Rule>& rules) {
  std::vector<std::string> out;
  for (const auto& r : rules) out.push_back(logic::renderRule(r));
  return out;
}

}  // namespace ethos::testing
