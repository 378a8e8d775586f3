#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ethos {

// Root of every error raised by the engine. `detail` carries the rendering of
// the offending rule, window or record when there is one.
class Error : public std::runtime_error {
 public:
  Error(const std::string& what, std::string detail = {})
      : std::runtime_error(what), detail_(std::move(detail)) {}
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string detail_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& msg, int line, int column, std::string detail = {})
      : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg,
              std::move(detail)),
        line_(line),
        column_(column) {}
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

class UnsafeRuleError : public Error {
  using Error::Error;
};

class ArityClashError : public Error {
  using Error::Error;
};

class GroundingLimitError : public Error {
  using Error::Error;
};

// No answer set exists, so cautious entailment is undefined.
class InconsistentProgramError : public Error {
  using Error::Error;
};

class NoDerivationError : public Error {
  using Error::Error;
};

// The learner could not revise the hypothesis for a window; the window is
// quarantined and the hypothesis left as it was.
class QuarantineError : public Error {
 public:
  QuarantineError(const std::string& what, std::string windowId, std::string detail = {})
      : Error(what, std::move(detail)), windowId_(std::move(windowId)) {}
  const std::string& windowId() const noexcept { return windowId_; }

 private:
  std::string windowId_;
};

class DuplicateWindowError : public Error {
  using Error::Error;
};

class StorageError : public Error {
  using Error::Error;
};

class CorruptJournalError : public Error {
 public:
  CorruptJournalError(const std::string& what, std::uint64_t sequence)
      : Error(what, "sequence " + std::to_string(sequence)), sequence_(sequence) {}
  std::uint64_t sequence() const noexcept { return sequence_; }

 private:
  std::uint64_t sequence_;
};

class MalformedTurnError : public Error {
  using Error::Error;
};

class InvalidWindowError : public Error {
  using Error::Error;
};

class StaleHandleError : public Error {
  using Error::Error;
};

class NotFoundError : public Error {
  using Error::Error;
};

}  // namespace ethos
