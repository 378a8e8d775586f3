#include "ethos/service.hpp"

#include <httplib.h>

#include <charconv>

namespace ethos::service {

using codec::Json;

std::string_view errorCodeName(ErrorCode c) {
  switch (c) {
    case ErrorCode::BadRequest: return "bad_request";
    case ErrorCode::Conflict: return "conflict";
    case ErrorCode::Quarantine: return "quarantine";
    case ErrorCode::InconsistentKb: return "inconsistent_kb";
    case ErrorCode::Io: return "io";
    case ErrorCode::NotFound: return "not_found";
  }
  return "bad_request";
}

int httpStatus(ErrorCode c) {
  switch (c) {
    case ErrorCode::BadRequest: return 400;
    case ErrorCode::Conflict:
    case ErrorCode::Quarantine:
    case ErrorCode::InconsistentKb: return 409;
    case ErrorCode::Io: return 500;
    case ErrorCode::NotFound: return 404;
  }
  return 500;
}

Json ApiError::toJson() const {
  Json j;
  j["error"] = Json{{"code", errorCodeName(code)}, {"message", message}, {"detail", detail}};
  return j;
}

ApiError classify(const std::exception& e) {
  const auto* err = dynamic_cast<const Error*>(&e);
  std::string detail = err ? err->detail() : "";
  const auto make = [&](ErrorCode c) { return ApiError{c, e.what(), detail}; };
  if (dynamic_cast<const DuplicateWindowError*>(&e)) return make(ErrorCode::Conflict);
  if (const auto* q = dynamic_cast<const QuarantineError*>(&e)) {
    ApiError a = make(ErrorCode::Quarantine);
    if (a.detail.empty()) a.detail = q->windowId();
    return a;
  }
  if (dynamic_cast<const InconsistentProgramError*>(&e) || dynamic_cast<const GroundingLimitError*>(&e))
    return make(ErrorCode::InconsistentKb);
  if (dynamic_cast<const StorageError*>(&e) || dynamic_cast<const CorruptJournalError*>(&e))
    return make(ErrorCode::Io);
  if (dynamic_cast<const NotFoundError*>(&e) || dynamic_cast<const NoDerivationError*>(&e))
    return make(ErrorCode::NotFound);
  if (err || dynamic_cast<const Json::exception*>(&e)) return make(ErrorCode::BadRequest);
  return make(ErrorCode::Io);
}

namespace {

Response ok(Json body) { return Response{200, std::move(body)}; }

Response failure(const ApiError& e) { return Response{httpStatus(e.code), e.toJson()}; }

Json parseBody(const std::string& body) {
  try {
    return Json::parse(body);
  } catch (const Json::parse_error& e) {
    throw MalformedTurnError("request body is not valid JSON", e.what());
  }
}

Json clauseJson(const learn::HypothesisClause& c) {
  Json j;
  j["rule"] = logic::renderRule(c.clause);
  j["ast"] = codec::ruleAst(c.clause);
  j["support"] = c.support;
  j["supportSize"] = c.support.size();
  return j;
}

}  // namespace

Json hypothesisJson(const learn::Hypothesis& h, std::size_t version) {
  Json j;
  j["version"] = version;
  j["clauses"] = Json::array();
  for (const auto& c : h.clauses) j["clauses"].push_back(clauseJson(c));
  j["revisionLog"] = codec::toJson(h)["revision_log"];
  return j;
}

Response Service::handle(const Request& r) const {
  try {
    if (r.method == "POST" && r.path == "/api/v1/evaluate") return evaluate(r);
    if (r.method == "POST" && r.path == "/api/v1/train") return train(r);
    if (r.method == "GET" && r.path == "/api/v1/hypothesis") return hypothesis(r);
    if (r.method == "GET" && r.path == "/api/v1/windows") return windows(r);
    if (r.method == "GET" && r.path == "/api/v1/explain") return explain(r);
    return failure({ErrorCode::NotFound, "no such endpoint", r.method + " " + r.path});
  } catch (const std::exception& e) {
    return failure(classify(e));
  }
}

Response Service::evaluate(const Request& r) const {
  auto scenario = dialogue::parseScenario(parseBody(r.body));
  return ok(dialogue::toJson(kb_->evaluate(scenario)));
}

Response Service::train(const Request& r) const {
  auto scenario = dialogue::parseScenario(parseBody(r.body));
  auto out = kb_->train(scenario);
  Json j;
  j["window"] = out.windowId;
  j["action"] = learn::actionName(out.action);
  j["before"] = out.beforeClauses;
  j["after"] = out.afterClauses;
  j["diff"] = out.diff;
  j["verdictBefore"] = dialogue::toJson(out.before);
  j["hypothesis"] = hypothesisJson(out.hypothesis, out.hypothesisVersion);
  return ok(std::move(j));
}

Response Service::hypothesis(const Request& r) const {
  auto snap = kb_->snapshot();
  learn::Hypothesis h = snap->hypothesis;
  std::size_t version = snap->hypothesisVersion;
  if (auto it = r.query.find("version"); it != r.query.end()) {
    const std::string& text = it->second;
    std::size_t v = 0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || end != text.data() + text.size())
      throw MalformedTurnError("version must be a non-negative integer", text);
    if (v == 0) {
      h = learn::Hypothesis{};
    } else {
      auto found = kb_->hypothesisAt(v);
      if (!found) throw NotFoundError("no such hypothesis version", text);
      h = std::move(*found);
    }
    version = v;
  }
  Json j = hypothesisJson(h, version);
  j["latestVersion"] = snap->hypothesisVersion;
  j["modes"] = codec::toJson(snap->modes)["modes"];
  j["vocabulary"] = snap->vocabulary;
  j["background"] = codec::toJson(snap->background)["rules"];
  return ok(std::move(j));
}

Response Service::windows(const Request&) const {
  auto snap = kb_->snapshot();
  Json j;
  j["windows"] = Json::array();
  for (const auto& w : snap->windows) j["windows"].push_back(codec::toJson(w));
  return ok(std::move(j));
}

Response Service::explain(const Request& r) const {
  auto it = r.query.find("atom");
  if (it == r.query.end() || it->second.empty()) throw MalformedTurnError("missing query parameter 'atom'");
  logic::Atom atom = logic::parseAtom(it->second);
  if (!logic::variablesOf(logic::Rule{atom, {}, {}}).empty()) throw MalformedTurnError("atom must be ground", it->second);
  Json j;
  j["atom"] = logic::renderAtom(atom);
  j["derivation"] = codec::toJson(kb_->explain(atom));
  return ok(std::move(j));
}

void Service::mount(httplib::Server& server) const {
  const auto bridge = [this](const httplib::Request& req, httplib::Response& res) {
    Request r{req.method, req.path, {}, req.body};
    for (const auto& [k, v] : req.params) r.query.emplace(k, v);
    Response out = handle(r);
    res.status = out.status;
    res.set_content(out.body.dump(), "application/json");
  };
  for (const char* path : {"/api/v1/evaluate", "/api/v1/train"}) server.Post(path, bridge);
  for (const char* path : {"/api/v1/hypothesis", "/api/v1/windows", "/api/v1/explain"}) server.Get(path, bridge);
}

}  // namespace ethos::service
