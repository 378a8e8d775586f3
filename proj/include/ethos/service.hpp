#pragma once

// HTTP/JSON facade over a knowledge base, under the /api/v1 prefix.

#include <map>
#include <memory>
#include <string>

#include "ethos/codec.hpp"
#include "ethos/dialogue.hpp"

namespace httplib {
class Server;
}

namespace ethos::service {

enum class ErrorCode { BadRequest, Conflict, Quarantine, InconsistentKb, Io, NotFound };

std::string_view errorCodeName(ErrorCode c);
int httpStatus(ErrorCode c);

struct ApiError {
  ErrorCode code = ErrorCode::BadRequest;
  std::string message;
  std::string detail;

  codec::Json toJson() const;
};

/// Maps a thrown exception to exactly one API error.
ApiError classify(const std::exception& e);

struct Request {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct Response {
  int status = 200;
  codec::Json body;
};

class Service {
 public:
  explicit Service(std::shared_ptr<dialogue::KnowledgeBase> kb) : kb_(std::move(kb)) {}

  /// Routes one request; never throws.
  Response handle(const Request& request) const;

  /// Registers every endpoint on an httplib server.
  void mount(httplib::Server& server) const;

 private:
  Response evaluate(const Request& r) const;
  Response train(const Request& r) const;
  Response hypothesis(const Request& r) const;
  Response windows(const Request& r) const;
  Response explain(const Request& r) const;

  std::shared_ptr<dialogue::KnowledgeBase> kb_;
};

/// JSON form of a hypothesis with per-clause ASTs and support sizes.
codec::Json hypothesisJson(const learn::Hypothesis& h, std::size_t version);

}  // namespace ethos::service
