#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ethos/codec.hpp"
#include "ethos/learner.hpp"

namespace ethos::store {

/// Everything a knowledge base holds. Replaying a journal rebuilds it.
struct KnowledgeState {
  logic::Program background;
  learn::ModeSet modes;
  std::vector<learn::ExampleWindow> windows;
  learn::Hypothesis hypothesis;
  std::size_t hypothesisVersion = 0;

  codec::Json canonical() const;
  /// FNV-1a of the canonical JSON, as 16 hex digits.
  std::string digest() const;
  bool operator==(const KnowledgeState& o) const { return canonical() == o.canonical(); }
};

enum class RecordKind { Window, HypothesisSnapshot, Background, Modes };

std::string_view recordKindName(RecordKind k);

struct StoreRecord {
  std::uint64_t sequence = 0;
  RecordKind kind = RecordKind::Window;
  std::string timestamp;
  codec::Json payload;
};

/// Append-only, versioned persistence for one knowledge base.
class Store {
 public:
  virtual ~Store() = default;

  virtual std::uint64_t appendWindow(const learn::ExampleWindow& w) = 0;
  virtual std::uint64_t snapshotHypothesis(const learn::Hypothesis& h) = 0;
  virtual std::uint64_t putBackground(const logic::Program& p) = 0;
  virtual std::uint64_t putModes(const learn::ModeSet& m) = 0;

  virtual KnowledgeState loadState() const = 0;
  /// Snapshot by 1-based version; nullopt if there is no such version.
  virtual std::optional<learn::Hypothesis> hypothesis(std::size_t version) const = 0;
  virtual std::size_t hypothesisVersion() const = 0;
  virtual bool empty() const = 0;
};

using Clock = std::function<std::string()>;

/// RFC 3339 UTC timestamp of the current time.
std::string systemTimestamp();

/// One JSON object per line in `<dir>/journal.jsonl`, fsync'd before each
/// append returns; `<dir>/store.json` records the schema version.
class JournalStore final : public Store {
 public:
  static constexpr int kSchemaVersion = 1;

  /// Creates the directory and files when missing, then replays the journal.
  /// Throws CorruptJournalError naming the first bad record.
  explicit JournalStore(std::filesystem::path dir, Clock clock = systemTimestamp);

  std::uint64_t appendWindow(const learn::ExampleWindow& w) override;
  std::uint64_t snapshotHypothesis(const learn::Hypothesis& h) override;
  std::uint64_t putBackground(const logic::Program& p) override;
  std::uint64_t putModes(const learn::ModeSet& m) override;

  KnowledgeState loadState() const override;
  std::optional<learn::Hypothesis> hypothesis(std::size_t version) const override;
  std::size_t hypothesisVersion() const override;
  bool empty() const override;

  const std::filesystem::path& journalPath() const { return journal_; }

  /// Replays a journal file without opening a store.
  static KnowledgeState replay(const std::filesystem::path& journal);

 private:
  std::uint64_t append(RecordKind kind, codec::Json payload);

  std::filesystem::path dir_;
  std::filesystem::path journal_;
  Clock clock_;
  mutable std::mutex mutex_;
  KnowledgeState state_;
  std::vector<learn::Hypothesis> snapshots_;
  std::uint64_t lastSequence_ = 0;
};

}  // namespace ethos::store
