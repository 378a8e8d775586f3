#include <gtest/gtest.h>
#include <httplib.h>

#include <thread>

#include "ethos/error.hpp"
#include "ethos/service.hpp"
#include "support.hpp"

using namespace ethos;
using namespace ethos::service;
using codec::Json;
namespace t = ethos::testing;

namespace {

class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    kb_ = std::make_shared<dialogue::KnowledgeBase>(std::make_shared<store::JournalStore>(dir_.path()),
                                                    t::table1Background(), t::table1Modes());
    svc_ = std::make_unique<Service>(kb_);
  }

  Response post(const std::string& path, const std::string& body) const {
    return svc_->handle({"POST", path, {}, body});
  }
  Response get(const std::string& path, std::map<std::string, std::string> query = {}) const {
    return svc_->handle({"GET", path, std::move(query), ""});
  }
  Response train(std::size_t i) const {
    return post("/api/v1/train", dialogue::toJson(t::table1Scenarios().at(i)).dump());
  }
  static std::string unlabeled(std::size_t i) {
    auto s = t::table1Scenarios().at(i);
    s.label.reset();
    s.id.reset();
    return dialogue::toJson(s).dump();
  }

  t::TempDir dir_;
  std::shared_ptr<dialogue::KnowledgeBase> kb_;
  std::unique_ptr<Service> svc_;
};

}  // namespace

TEST_F(ServiceTest, TrainReportsActionsAndDiffs) {
  auto w1 = train(0);
  ASSERT_EQ(w1.status, 200) << w1.body.dump();
  EXPECT_EQ(w1.body["action"], "initialize");
  auto w2 = train(1);
  EXPECT_EQ(w2.body["action"], "specialize");
  EXPECT_EQ(w2.body["before"], Json::array({"unethical(V) :- answer(V)."}));
  EXPECT_EQ(w2.body["after"], Json::array({"unethical(V) :- answer(V), not_SupportEvidence(V)."}));
  EXPECT_EQ(w2.body["verdictBefore"]["status"], "unethical");
  EXPECT_EQ(w2.body["hypothesis"]["version"], 2);
  EXPECT_EQ(w2.body["hypothesis"]["clauses"][0]["supportSize"], 1);
  EXPECT_EQ(w2.body["hypothesis"]["clauses"][0]["ast"]["head"]["predicate"], "unethical");
}

TEST_F(ServiceTest, DuplicateIdIsAConflictAndChangesNothing) {
  train(0);
  auto before = get("/api/v1/hypothesis").body;
  auto again = train(0);
  EXPECT_EQ(again.status, 409);
  EXPECT_EQ(again.body["error"]["code"], "conflict");
  EXPECT_EQ(get("/api/v1/hypothesis").body, before);
  EXPECT_EQ(get("/api/v1/windows").body["windows"].size(), 1u);
}

TEST_F(ServiceTest, QuarantineIsAConflictWithExplanation) {
  train(0);
  auto s = t::table1Scenarios()[0];
  s.id = "w1-flipped";
  s.label = dialogue::Label::Ethical;
  auto r = post("/api/v1/train", dialogue::toJson(s).dump());
  EXPECT_EQ(r.status, 409);
  EXPECT_EQ(r.body["error"]["code"], "quarantine");
  EXPECT_FALSE(r.body["error"]["message"].get<std::string>().empty());
}

TEST_F(ServiceTest, EvaluateAfterTableOne) {
  for (std::size_t i = 0; i < 6; ++i) train(i);
  auto w6 = post("/api/v1/evaluate", unlabeled(5));
  ASSERT_EQ(w6.status, 200);
  EXPECT_EQ(w6.body["status"], "unethical");
  EXPECT_EQ(w6.body["firedRules"].size(), 1u);
  EXPECT_EQ(w6.body["hypothesisVersion"], 6);
  EXPECT_EQ(w6.body["derivation"]["atom"], "unethical(sss)");
  auto w5 = post("/api/v1/evaluate", unlabeled(4));
  EXPECT_EQ(w5.body["status"], "ethical");
  EXPECT_TRUE(w5.body["firedRules"].empty());
  EXPECT_EQ(get("/api/v1/hypothesis").body["version"], 6);
}

TEST_F(ServiceTest, BadRequests) {
  auto missing = post("/api/v1/evaluate", R"({"request":{"product":"p"}})");
  EXPECT_EQ(missing.status, 400);
  EXPECT_EQ(missing.body["error"]["code"], "bad_request");
  EXPECT_EQ(post("/api/v1/evaluate", "{oops").status, 400);
  EXPECT_EQ(post("/api/v1/train", unlabeled(0)).status, 400);
  EXPECT_EQ(post("/api/v1/evaluate", R"({"request":{"product":"p"},"response":{"handle":"h"},"annotations":["x"]})")
                .status,
            400);
  EXPECT_EQ(get("/api/v1/hypothesis", {{"version", "two"}}).status, 400);
  EXPECT_EQ(get("/api/v1/explain").status, 400);
  EXPECT_EQ(get("/api/v1/explain", {{"atom", "unethical(X)"}}).status, 400);
  EXPECT_EQ(get("/api/v1/nothing").status, 404);
  EXPECT_EQ(post("/api/v1/hypothesis", "{}").status, 404);
}

TEST_F(ServiceTest, HypothesisVersions) {
  auto fresh = get("/api/v1/hypothesis", {{"version", "99"}});
  EXPECT_EQ(fresh.status, 404);
  EXPECT_EQ(fresh.body["error"]["code"], "not_found");

  for (std::size_t i = 0; i < 6; ++i) train(i);
  auto v1 = get("/api/v1/hypothesis", {{"version", "1"}});
  ASSERT_EQ(v1.status, 200);
  ASSERT_EQ(v1.body["clauses"].size(), 1u);
  EXPECT_TRUE(logic::isVariant(logic::parseRule(v1.body["clauses"][0]["rule"].get<std::string>()),
                               logic::parseRule("unethical(V) :- answer(V).")));
  EXPECT_EQ(v1.body["revisionLog"].size(), 1u);

  auto latest = get("/api/v1/hypothesis").body;
  EXPECT_EQ(latest["clauses"].size(), 2u);
  EXPECT_EQ(latest["revisionLog"].size(), 6u);
  EXPECT_EQ(latest["modes"].size(), 5u);
  auto vocab = latest["vocabulary"].get<std::vector<std::string>>();
  EXPECT_NE(std::find(vocab.begin(), vocab.end(), "not_SupportEvidence"), vocab.end());
  EXPECT_EQ(get("/api/v1/hypothesis", {{"version", "0"}}).body["clauses"].size(), 0u);
}

TEST_F(ServiceTest, WindowsAndExplain) {
  for (std::size_t i = 0; i < 6; ++i) train(i);
  auto windows = get("/api/v1/windows").body["windows"];
  ASSERT_EQ(windows.size(), 6u);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(windows[i]["id"], "w" + std::to_string(i + 1));

  auto sss = get("/api/v1/explain", {{"atom", "unethical(sss)"}});
  ASSERT_EQ(sss.status, 200);
  EXPECT_EQ(sss.body["derivation"]["kind"], "rule");
  EXPECT_EQ(sss.body["derivation"]["rule"], logic::renderRule(kb_->snapshot()->hypothesis.clauses.at(1).clause));
  EXPECT_EQ(get("/api/v1/explain", {{"atom", "unethical(rrr)"}}).status, 404);
}

TEST(ErrorMapping, EveryErrorHasOneCode) {
  const std::vector<std::pair<std::exception_ptr, std::string>> cases{
      {std::make_exception_ptr(ParseError("x", 1, 1)), "bad_request"},
      {std::make_exception_ptr(UnsafeRuleError("x")), "bad_request"},
      {std::make_exception_ptr(ArityClashError("x")), "bad_request"},
      {std::make_exception_ptr(MalformedTurnError("x")), "bad_request"},
      {std::make_exception_ptr(InvalidWindowError("x")), "bad_request"},
      {std::make_exception_ptr(StaleHandleError("x")), "bad_request"},
      {std::make_exception_ptr(DuplicateWindowError("x")), "conflict"},
      {std::make_exception_ptr(QuarantineError("x", "w")), "quarantine"},
      {std::make_exception_ptr(InconsistentProgramError("x")), "inconsistent_kb"},
      {std::make_exception_ptr(GroundingLimitError("x")), "inconsistent_kb"},
      {std::make_exception_ptr(StorageError("x")), "io"},
      {std::make_exception_ptr(CorruptJournalError("x", 3)), "io"},
      {std::make_exception_ptr(NotFoundError("x")), "not_found"},
      {std::make_exception_ptr(NoDerivationError("x")), "not_found"},
  };
  for (const auto& [ptr, code] : cases) {
    try {
      std::rethrow_exception(ptr);
    } catch (const std::exception& e) {
      ApiError a = classify(e);
      EXPECT_EQ(errorCodeName(a.code), code) << e.what();
      EXPECT_EQ(httpStatus(a.code), code == "bad_request" ? 400 : code == "io" ? 500 : code == "not_found" ? 404 : 409);
    }
  }
}

TEST(Http, EndpointsOverTheWire) {
  t::TempDir dir;
  auto kb = std::make_shared<dialogue::KnowledgeBase>(std::make_shared<store::JournalStore>(dir.path()),
                                                      t::table1Background(), t::table1Modes());
  Service svc(kb);
  httplib::Server server;
  svc.mount(server);
  int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  auto body = dialogue::toJson(t::table1Scenarios()[0]).dump();
  auto r = client.Post("/api/v1/train", body, "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(r->get_header_value("Content-Type"), "application/json");
  EXPECT_EQ(Json::parse(r->body)["action"], "initialize");
  auto dup = client.Post("/api/v1/train", body, "application/json");
  ASSERT_TRUE(dup);
  EXPECT_EQ(dup->status, 409);
  auto h = client.Get("/api/v1/hypothesis?version=1");
  ASSERT_TRUE(h);
  EXPECT_EQ(Json::parse(h->body)["clauses"].size(), 1u);
  auto e = client.Get("/api/v1/explain?atom=unethical(healthy-way-to-loose-wieght)");
  ASSERT_TRUE(e);
  EXPECT_EQ(e->status, 200);

  server.stop();
  th.join();
}
