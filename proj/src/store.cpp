#include "ethos/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>

namespace ethos::store {

using codec::Json;

codec::Json KnowledgeState::canonical() const {
  Json j;
  j["background"] = codec::toJson(background);
  j["modes"] = codec::toJson(modes);
  j["windows"] = Json::array();
  for (const auto& w : windows) j["windows"].push_back(codec::toJson(w));
  j["hypothesis"] = codec::toJson(hypothesis);
  j["hypothesis_version"] = hypothesisVersion;
  return j;
}

std::string KnowledgeState::digest() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical().dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string_view recordKindName(RecordKind k) {
  switch (k) {
    case RecordKind::Window: return "window";
    case RecordKind::HypothesisSnapshot: return "hypothesis-snapshot";
    case RecordKind::Background: return "background";
    case RecordKind::Modes: return "modes";
  }
  return "window";
}

std::string systemTimestamp() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace {

std::optional<RecordKind> kindFromName(const std::string& name) {
  for (auto k : {RecordKind::Window, RecordKind::HypothesisSnapshot, RecordKind::Background, RecordKind::Modes})
    if (recordKindName(k) == name) return k;
  return std::nullopt;
}

// Applies one record; throws CorruptJournalError on any inconsistency.
void apply(const Json& record, std::uint64_t expected, KnowledgeState& state,
           std::vector<learn::Hypothesis>& snapshots) {
  try {
    if (!record.is_object() || !record.contains("sequence") || !record["sequence"].is_number_unsigned() ||
        record["sequence"].get<std::uint64_t>() != expected)
      throw CorruptJournalError("record out of sequence", expected);
    auto kind = kindFromName(record.at("kind").get<std::string>());
    if (!kind) throw CorruptJournalError("unknown record kind", expected);
    const Json& payload = record.at("payload");
    switch (*kind) {
      case RecordKind::Window: {
        auto w = codec::windowFromJson(payload);
        for (const auto& other : state.windows)
          if (other.id == w.id) throw CorruptJournalError("duplicate window " + w.id, expected);
        state.windows.push_back(std::move(w));
        break;
      }
      case RecordKind::Background:
        state.background = codec::programFromJson(payload);
        break;
      case RecordKind::Modes:
        state.modes = codec::modesFromJson(payload);
        break;
      case RecordKind::HypothesisSnapshot: {
        auto version = payload.at("version").get<std::size_t>();
        if (version != snapshots.size() + 1) throw CorruptJournalError("hypothesis version out of order", expected);
        auto h = codec::hypothesisFromJson(payload.at("hypothesis"));
        state.hypothesis = h;
        state.hypothesisVersion = version;
        snapshots.push_back(std::move(h));
        if (payload.at("state_digest").get<std::string>() != state.digest())
          throw CorruptJournalError("state digest mismatch on replay", expected);
        break;
      }
    }
  } catch (const CorruptJournalError&) {
    throw;
  } catch (const std::exception& e) {
    throw CorruptJournalError(std::string("unreadable record: ") + e.what(), expected);
  }
}

struct Replayed {
  KnowledgeState state;
  std::vector<learn::Hypothesis> snapshots;
  std::uint64_t lastSequence = 0;
};

Replayed replayFile(const std::filesystem::path& journal) {
  Replayed out;
  std::ifstream in(journal, std::ios::binary);
  if (!in) return out;
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  std::size_t at = 0;
  while (at < text.size()) {
    std::size_t end = text.find('\n', at);
    const std::uint64_t expected = out.lastSequence + 1;
    if (end == std::string::npos) throw CorruptJournalError("truncated record at end of journal", expected);
    Json record;
    try {
      record = Json::parse(text.substr(at, end - at));
    } catch (const std::exception&) {
      throw CorruptJournalError("record is not valid JSON", expected);
    }
    apply(record, expected, out.state, out.snapshots);
    out.lastSequence = expected;
    at = end + 1;
  }
  return out;
}

void writeDurably(const std::filesystem::path& path, const std::string& line) {
  int fd = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) throw StorageError("cannot open " + path.string() + ": " + std::strerror(errno));
  std::size_t written = 0;
  while (written < line.size()) {
    ssize_t n = ::write(fd, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      int err = errno;
      ::close(fd);
      throw StorageError("write to " + path.string() + " failed: " + std::strerror(err));
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0) {
    int err = errno;
    ::close(fd);
    throw StorageError("fsync of " + path.string() + " failed: " + std::strerror(err));
  }
  ::close(fd);
}

}  // namespace

JournalStore::JournalStore(std::filesystem::path dir, Clock clock)
    : dir_(std::move(dir)), journal_(dir_ / "journal.jsonl"), clock_(std::move(clock)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw StorageError("cannot create store directory " + dir_.string() + ": " + ec.message());
  auto meta = dir_ / "store.json";
  if (std::filesystem::exists(meta)) {
    std::ifstream in(meta);
    Json j;
    try {
      j = Json::parse(in);
    } catch (const std::exception& e) {
      throw StorageError("unreadable " + meta.string() + ": " + e.what());
    }
    if (j.value("schema_version", 0) != kSchemaVersion)
      throw StorageError("unsupported store schema version in " + meta.string());
  } else {
    Json j;
    j["schema_version"] = kSchemaVersion;
    std::ofstream out(meta);
    out << j.dump() << "\n";
    if (!out) throw StorageError("cannot write " + meta.string());
  }
  auto replayed = replayFile(journal_);
  state_ = std::move(replayed.state);
  snapshots_ = std::move(replayed.snapshots);
  lastSequence_ = replayed.lastSequence;
}

std::uint64_t JournalStore::append(RecordKind kind, Json payload) {
  Json record;
  record["sequence"] = lastSequence_ + 1;
  record["kind"] = recordKindName(kind);
  record["timestamp"] = clock_();
  record["payload"] = std::move(payload);

  // Validate against a copy first so a rejected record never reaches disk.
  KnowledgeState next = state_;
  auto snapshots = snapshots_;
  apply(record, lastSequence_ + 1, next, snapshots);

  writeDurably(journal_, record.dump() + "\n");
  state_ = std::move(next);
  snapshots_ = std::move(snapshots);
  return ++lastSequence_;
}

std::uint64_t JournalStore::appendWindow(const learn::ExampleWindow& w) {
  std::lock_guard lock(mutex_);
  for (const auto& other : state_.windows)
    if (other.id == w.id) throw DuplicateWindowError("window id already stored: " + w.id, w.id);
  return append(RecordKind::Window, codec::toJson(w));
}

std::uint64_t JournalStore::snapshotHypothesis(const learn::Hypothesis& h) {
  std::lock_guard lock(mutex_);
  KnowledgeState next = state_;
  next.hypothesis = h;
  next.hypothesisVersion = snapshots_.size() + 1;
  Json payload;
  payload["version"] = next.hypothesisVersion;
  payload["hypothesis"] = codec::toJson(h);
  payload["state_digest"] = next.digest();
  return append(RecordKind::HypothesisSnapshot, std::move(payload));
}

std::uint64_t JournalStore::putBackground(const logic::Program& p) {
  std::lock_guard lock(mutex_);
  return append(RecordKind::Background, codec::toJson(p));
}

std::uint64_t JournalStore::putModes(const learn::ModeSet& m) {
  std::lock_guard lock(mutex_);
  return append(RecordKind::Modes, codec::toJson(m));
}

KnowledgeState JournalStore::loadState() const {
  std::lock_guard lock(mutex_);
  return state_;
}

std::optional<learn::Hypothesis> JournalStore::hypothesis(std::size_t version) const {
  std::lock_guard lock(mutex_);
  if (version == 0 || version > snapshots_.size()) return std::nullopt;
  return snapshots_[version - 1];
}

std::size_t JournalStore::hypothesisVersion() const {
  std::lock_guard lock(mutex_);
  return snapshots_.size();
}

bool JournalStore::empty() const {
  std::lock_guard lock(mutex_);
  return lastSequence_ == 0;
}

KnowledgeState JournalStore::replay(const std::filesystem::path& journal) { return replayFile(journal).state; }

}  // namespace ethos::store
