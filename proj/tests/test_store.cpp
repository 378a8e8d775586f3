#include <gtest/gtest.h>

#include <fstream>
#include <regex>
#include <sstream>

#include "ethos/error.hpp"
#include "ethos/store.hpp"
#include "support.hpp"

using namespace ethos;
using namespace ethos::store;
namespace t = ethos::testing;
namespace fs = std::filesystem;

namespace {

std::string fixedClock() { return "2024-01-01T00:00:00Z"; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l + "\n");
  return out;
}

// Runs the Table 1 stream against a store, recording the state after every append.
std::vector<KnowledgeState> recordTableOne(JournalStore& s) {
  std::vector<KnowledgeState> states;
  auto bg = t::table1Background();
  auto modes = t::table1Modes();
  s.putBackground(bg);
  states.push_back(s.loadState());
  s.putModes(modes);
  states.push_back(s.loadState());
  learn::Hypothesis h;
  std::vector<learn::ExampleWindow> memory;
  for (const auto& w : t::table1Windows()) {
    h = learn::processWindow(h, w, bg, modes, memory);
    memory.push_back(w);
    s.appendWindow(w);
    states.push_back(s.loadState());
    s.snapshotHypothesis(h);
    states.push_back(s.loadState());
  }
  return states;
}

}  // namespace

TEST(Journal, SequencesAndDuplicates) {
  t::TempDir dir;
  JournalStore s(dir.path(), fixedClock);
  EXPECT_TRUE(s.empty());
  auto windows = t::table1Windows();
  EXPECT_EQ(s.appendWindow(windows[0]), 1u);
  EXPECT_THROW(s.appendWindow(windows[0]), DuplicateWindowError);
  EXPECT_EQ(s.appendWindow(windows[1]), 2u);
  EXPECT_FALSE(s.empty());
  EXPECT_EQ(lines(slurp(s.journalPath())).size(), 2u);
}

TEST(Journal, LineFormatIsExact) {
  t::TempDir dir;
  JournalStore s(dir.path(), fixedClock);
  s.appendWindow(t::table1Windows()[0]);
  EXPECT_EQ(slurp(s.journalPath()),
            "{\"sequence\":1,\"kind\":\"window\",\"timestamp\":\"2024-01-01T00:00:00Z\",\"payload\":"
            "{\"id\":\"w1\",\"facts\":[\"ask(customer,infoabout(productx))\",\"answer(healthy-way-to-loose-wieght)\","
            "\"not_SupportEvidence(healthy-way-to-loose-wieght)\"],\"conclusions\":[{\"atom\":"
            "\"unethical(healthy-way-to-loose-wieght)\",\"polarity\":\"positive\"}]}}\n");
  EXPECT_EQ(slurp(dir.path() / "store.json"), "{\"schema_version\":1}\n");
}

TEST(Journal, SystemTimestampIsRfc3339) {
  EXPECT_TRUE(std::regex_match(systemTimestamp(), std::regex(R"(\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}Z)")));
}

TEST(Journal, SnapshotsAreVersioned) {
  t::TempDir dir;
  JournalStore s(dir.path(), fixedClock);
  EXPECT_EQ(s.hypothesisVersion(), 0u);
  EXPECT_FALSE(s.hypothesis(1).has_value());

  learn::Hypothesis empty;
  s.snapshotHypothesis(empty);
  auto windows = t::table1Windows();
  auto h1 = learn::processWindow({}, windows[0], t::table1Background(), t::table1Modes(), {});
  s.snapshotHypothesis(h1);
  EXPECT_EQ(s.hypothesisVersion(), 2u);
  EXPECT_EQ(*s.hypothesis(1), empty);
  EXPECT_EQ(*s.hypothesis(2), h1);
  EXPECT_NE(*s.hypothesis(1), *s.hypothesis(2));
  EXPECT_TRUE(logic::isVariant(s.hypothesis(2)->rules().at(0), logic::parseRule("unethical(V) :- answer(V).")));
}

TEST(Journal, ReopenRestoresState) {
  t::TempDir dir;
  KnowledgeState before;
  {
    JournalStore s(dir.path(), fixedClock);
    recordTableOne(s);
    before = s.loadState();
  }
  std::string bytes = slurp(dir.path() / "journal.jsonl");
  JournalStore reopened(dir.path(), fixedClock);
  EXPECT_EQ(reopened.loadState().canonical().dump(), before.canonical().dump());
  EXPECT_EQ(reopened.loadState().digest(), before.digest());
  EXPECT_EQ(reopened.hypothesisVersion(), 6u);
  EXPECT_EQ(slurp(dir.path() / "journal.jsonl"), bytes);
  EXPECT_EQ(JournalStore::replay(dir.path() / "journal.jsonl"), before);
}

TEST(Journal, EveryRecordPrefixReplaysToItsState) {
  t::TempDir dir;
  std::vector<KnowledgeState> states;
  {
    JournalStore s(dir.path(), fixedClock);
    states = recordTableOne(s);
  }
  auto records = lines(slurp(dir.path() / "journal.jsonl"));
  ASSERT_EQ(records.size(), states.size());
  for (std::size_t k = 0; k <= records.size(); ++k) {
    t::TempDir prefix;
    {
      std::ofstream out(prefix.path() / "journal.jsonl", std::ios::binary);
      for (std::size_t i = 0; i < k; ++i) out << records[i];
    }
    JournalStore s(prefix.path(), fixedClock);
    KnowledgeState expected = k == 0 ? KnowledgeState{} : states[k - 1];
    EXPECT_EQ(s.loadState().canonical().dump(), expected.canonical().dump()) << "prefix " << k;
  }
}

TEST(Journal, TruncatedLastLineNamesTheRecord) {
  t::TempDir dir;
  {
    JournalStore s(dir.path(), fixedClock);
    recordTableOne(s);
  }
  auto path = dir.path() / "journal.jsonl";
  std::string text = slurp(path);
  auto records = lines(text);
  fs::resize_file(path, text.size() - records.back().size() / 2);
  try {
    JournalStore s(dir.path(), fixedClock);
    FAIL() << "expected corruption";
  } catch (const CorruptJournalError& e) {
    EXPECT_EQ(e.sequence(), records.size());
  }
}

TEST(Journal, CorruptRecordsAreRejected) {
  t::TempDir dir;
  {
    JournalStore s(dir.path(), fixedClock);
    recordTableOne(s);
  }
  auto records = lines(slurp(dir.path() / "journal.jsonl"));
  const auto expectCorruptAt = [&](std::vector<std::string> edited, std::uint64_t seq) {
    t::TempDir other;
    {
      std::ofstream out(other.path() / "journal.jsonl", std::ios::binary);
      for (const auto& r : edited) out << r;
    }
    try {
      JournalStore s(other.path(), fixedClock);
      ADD_FAILURE() << "expected corruption at " << seq;
    } catch (const CorruptJournalError& e) {
      EXPECT_EQ(e.sequence(), seq);
    }
  };

  auto garbage = records;
  garbage[4] = "{not json\n";
  expectCorruptAt(garbage, 5);

  auto gap = records;
  gap.erase(gap.begin() + 2);
  expectCorruptAt(gap, 3);

  auto tampered = records;
  auto pos = tampered[2].find("productx");
  tampered[2].replace(pos, 8, "producty");
  expectCorruptAt(tampered, 4);

  auto unknown = records;
  unknown[0].replace(unknown[0].find("\"background\""), 12, "\"mystery!!!\"");
  expectCorruptAt(unknown, 1);
}

TEST(Journal, RejectsUnknownSchemaVersion) {
  t::TempDir dir;
  {
    std::ofstream out(dir.path() / "store.json");
    out << "{\"schema_version\":2}\n";
  }
  EXPECT_THROW(JournalStore(dir.path(), fixedClock), StorageError);
}

TEST(Journal, UnwritableDirectoryIsAStorageError) {
  t::TempDir dir;
  { std::ofstream(dir.path() / "file") << "x"; }
  EXPECT_THROW(JournalStore(dir.path() / "file" / "store", fixedClock), StorageError);
}

TEST(Codec, DomainTypesRoundTrip) {
  t::Rng rng(6);
  for (int i = 0; i < 30; ++i) {
    auto target = t::randomHiddenTarget(rng, 8);
    auto result = learn::learnStream(target.windows, {}, t::hiddenTargetModes());
    EXPECT_EQ(codec::hypothesisFromJson(codec::toJson(result.hypothesis)), result.hypothesis);
    for (const auto& w : target.windows) EXPECT_EQ(codec::windowFromJson(codec::toJson(w)), w);
    auto p = t::randomProgram(rng);
    EXPECT_EQ(codec::programFromJson(codec::toJson(p)).rules, p.rules);
  }
  auto modes = t::table1Modes();
  EXPECT_EQ(codec::modesFromJson(codec::toJson(modes)).render(), modes.render());
}
