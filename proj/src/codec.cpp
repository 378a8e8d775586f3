#include "ethos/codec.hpp"

namespace ethos::codec {

using learn::Polarity;
using logic::renderAtom;
using logic::renderRule;

namespace {

const Json& field(const Json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) throw InvalidWindowError(std::string("missing field '") + name + "'");
  return j.at(name);
}

std::string stringField(const Json& j, const char* name) {
  const Json& v = field(j, name);
  if (!v.is_string()) throw InvalidWindowError(std::string("field '") + name + "' must be a string");
  return v.get<std::string>();
}

logic::Atom atomFrom(const Json& v) {
  if (!v.is_string()) throw InvalidWindowError("atoms must be strings");
  try {
    return logic::parseAtom(v.get<std::string>());
  } catch (const ParseError& e) {
    throw InvalidWindowError(std::string("bad atom: ") + e.what(), v.get<std::string>());
  }
}

Json termAst(const logic::Term& t) {
  Json j;
  j["kind"] = t.kind == logic::Term::Kind::Variable   ? "variable"
              : t.kind == logic::Term::Kind::Compound ? "compound"
                                                      : "constant";
  j["name"] = t.name;
  if (!t.args.empty()) {
    j["args"] = Json::array();
    for (const auto& a : t.args) j["args"].push_back(termAst(a));
  }
  return j;
}

Json atomAst(const logic::Atom& a) {
  Json j;
  j["predicate"] = a.predicate;
  j["args"] = Json::array();
  for (const auto& t : a.args) j["args"].push_back(termAst(t));
  return j;
}

}  // namespace

Json toJson(const learn::ExampleWindow& w) {
  Json j;
  j["id"] = w.id;
  j["facts"] = Json::array();
  for (const auto& f : w.facts) j["facts"].push_back(renderAtom(f));
  j["conclusions"] = Json::array();
  for (const auto& c : w.conclusions) {
    Json cj;
    cj["atom"] = renderAtom(c.atom);
    cj["polarity"] = c.polarity == Polarity::Positive ? "positive" : "negative";
    j["conclusions"].push_back(std::move(cj));
  }
  return j;
}

learn::ExampleWindow windowFromJson(const Json& j) {
  learn::ExampleWindow w;
  w.id = stringField(j, "id");
  const Json& facts = field(j, "facts");
  if (!facts.is_array()) throw InvalidWindowError("field 'facts' must be an array");
  for (const auto& f : facts) w.facts.push_back(atomFrom(f));
  const Json& conclusions = field(j, "conclusions");
  if (!conclusions.is_array()) throw InvalidWindowError("field 'conclusions' must be an array");
  for (const auto& c : conclusions) {
    logic::Atom a = atomFrom(c.is_string() ? c : field(c, "atom"));
    if (c.is_object() && c.contains("polarity")) {
      std::string p = stringField(c, "polarity");
      if (p != "positive" && p != "negative") throw InvalidWindowError("polarity must be positive or negative", p);
      w.conclusions.push_back({std::move(a), p == "positive" ? Polarity::Positive : Polarity::Negative});
    } else {
      w.conclusions.push_back(learn::conclusionFromTableAtom(a));
    }
  }
  return w;
}

Json toJson(const learn::Hypothesis& h) {
  Json j;
  j["clauses"] = Json::array();
  for (const auto& c : h.clauses) {
    Json cj;
    cj["rule"] = renderRule(c.clause);
    cj["support"] = c.support;
    j["clauses"].push_back(std::move(cj));
  }
  j["kernels"] = Json::array();
  for (const auto& k : h.kernels) {
    Json kj;
    kj["id"] = k.id;
    kj["window"] = k.windowId;
    kj["head"] = renderAtom(k.head);
    kj["body"] = Json::array();
    for (const auto& b : k.body) kj["body"].push_back(renderAtom(b));
    kj["clause"] = renderRule(k.clause);
    j["kernels"].push_back(std::move(kj));
  }
  j["revision_log"] = Json::array();
  for (const auto& e : h.revisionLog) {
    Json ej;
    ej["window"] = e.windowId;
    ej["action"] = learn::actionName(e.action);
    ej["before"] = e.before;
    ej["after"] = e.after;
    j["revision_log"].push_back(std::move(ej));
  }
  return j;
}

learn::Hypothesis hypothesisFromJson(const Json& j) {
  learn::Hypothesis h;
  for (const auto& cj : j.at("clauses"))
    h.clauses.push_back({logic::parseRule(cj.at("rule").get<std::string>()),
                         cj.at("support").get<std::vector<std::string>>()});
  for (const auto& kj : j.at("kernels")) {
    learn::KernelClause k;
    k.id = kj.at("id").get<std::string>();
    k.windowId = kj.at("window").get<std::string>();
    k.head = logic::parseAtom(kj.at("head").get<std::string>());
    for (const auto& b : kj.at("body")) k.body.push_back(logic::parseAtom(b.get<std::string>()));
    k.clause = logic::parseRule(kj.at("clause").get<std::string>());
    h.kernels.push_back(std::move(k));
  }
  for (const auto& ej : j.at("revision_log")) {
    auto action = learn::parseAction(ej.at("action").get<std::string>());
    if (!action) throw InvalidWindowError("unknown revision action", ej.at("action").dump());
    h.revisionLog.push_back({ej.at("window").get<std::string>(), *action,
                             ej.at("before").get<std::vector<std::string>>(),
                             ej.at("after").get<std::vector<std::string>>()});
  }
  return h;
}

Json toJson(const logic::Program& p) {
  Json j;
  j["rules"] = Json::array();
  for (const auto& r : p.rules) j["rules"].push_back(renderRule(r));
  return j;
}

logic::Program programFromJson(const Json& j) {
  logic::Program p;
  for (const auto& r : j.at("rules")) p.rules.push_back(logic::parseRule(r.get<std::string>()));
  logic::checkArities(p);
  return p;
}

Json toJson(const learn::ModeSet& m) {
  Json j;
  j["modes"] = Json::array();
  for (const auto& d : m.declarations) j["modes"].push_back(d.render());
  return j;
}

learn::ModeSet modesFromJson(const Json& j) {
  std::string text;
  for (const auto& d : j.at("modes")) text += d.get<std::string>() + "\n";
  return learn::parseModes(text);
}

Json ruleAst(const logic::Rule& r) {
  Json j;
  j["head"] = r.head ? atomAst(*r.head) : Json(nullptr);
  j["body"] = Json::array();
  for (const auto& l : r.body) {
    Json lj;
    lj["naf"] = l.naf;
    lj["atom"] = atomAst(l.atom);
    j["body"].push_back(std::move(lj));
  }
  return j;
}

Json toJson(const logic::Substitution& theta) {
  Json j = Json::object();
  for (const auto& [var, term] : theta) j[var] = logic::renderTerm(term);
  return j;
}

Json toJson(const solver::Derivation& d) {
  Json j;
  j["atom"] = renderAtom(d.atom);
  switch (d.kind) {
    case solver::Derivation::Kind::Fact: j["kind"] = "fact"; break;
    case solver::Derivation::Kind::Rule: j["kind"] = "rule"; break;
    case solver::Derivation::Kind::Naf: j["kind"] = "naf"; break;
  }
  if (d.kind == solver::Derivation::Kind::Rule) {
    j["rule"] = renderRule(*d.rule);
    j["substitution"] = toJson(d.theta);
  }
  j["children"] = Json::array();
  for (const auto& c : d.children) j["children"].push_back(toJson(c));
  return j;
}

}  // namespace ethos::codec
