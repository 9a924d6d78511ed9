#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "tml/ingest.hpp"

using namespace tml;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = TML_FIXTURES;

fs::path temp_dir(const std::string& name) {
  auto d = fs::temp_directory_path() / ("tml_ingest_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

void write(const fs::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

std::string read(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST(Ingest, FiveRecordFixture) {
  EventStore s = ingest({kFixtures / "sample.jsonl"});
  ASSERT_EQ(s.size(), 5u);
  // Sorted by (ts, id); ids were computed with hashlib.
  EXPECT_EQ(s[0].event_id, "0a4ff05eb6862e0df0d042a0ee5622947e6e907d4a0426d94eb39519c4c109bf");
  EXPECT_EQ(s[1].event_id, "ecdb703012a97d0c9749ccf574a2e2cd64c86192add3879ea88ce74ee9184f52");
  EXPECT_EQ(s[2].event_id, "5f7b8cf3cc6512641b0468ef2791e410e5d1888023fcf70b2665cef8d73bd561");
  EXPECT_EQ(s[3].event_id, "a69f2311e8a432d013da12e15f7c5a732578a5f9f5d32244fe9cb8093032e0cc");
  EXPECT_EQ(s[4].event_id, "custom-5");

  EXPECT_EQ(format_iso(s[2].ts), "2025-04-01T10:30:00Z");
  EXPECT_EQ(s[0].context.at("region"), "eu");
  EXPECT_EQ(s[1].context.at("scanner"), "ext-1");
  EXPECT_EQ(s[2].tech, std::vector<std::string>{"cloud_storage"});
  EXPECT_EQ(s[4].text_repr, "github | repo_clone | private repository cloned by dave");
  EXPECT_EQ(s.manifest().naive_timestamps, 2u);
  EXPECT_EQ(s.manifest().min_week.str(), "2025-W14");
  EXPECT_EQ(s.manifest().max_week.str(), "2025-W14");
}

TEST(Ingest, CsvWithMappingEqualsJsonl) {
  EventStore a = ingest({kFixtures / "sample.jsonl"});
  EventStore b = ingest({kFixtures / "sample.csv"}, CsvMapping::load(kFixtures / "sample_mapping.txt"));
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]) << i;
}

TEST(Ingest, CsvWithoutMappingIsFatal) {
  EXPECT_THROW(ingest({kFixtures / "sample.csv"}), IngestError);
}

TEST(Ingest, MappingMustNameTs) {
  EXPECT_THROW(CsvMapping::parse("msg=message\n"), IngestError);
  EXPECT_THROW(CsvMapping::parse("ts=time\nbogus=x\n"), IngestError);
  auto m = CsvMapping::parse("# c\nts = time\nlist_separator=|\n");
  EXPECT_EQ(m.field_to_column.at("ts"), "time");
  EXPECT_EQ(m.list_separator, '|');
}

TEST(Ingest, BadRecordsAreCountedNotFatal) {
  auto d = temp_dir("bad");
  write(d / "a.jsonl",
        "{\"ts\":\"2025-04-01T00:00:00Z\",\"msg\":\"ok\"}\n"
        "not json\n"
        "{\"ts\":\"never\",\"msg\":\"bad ts\"}\n"
        "{\"ts\":\"2025-04-01T00:00:00Z\"}\n"
        "{\"msg\":\"no ts\"}\n");
  EventStore s = ingest({d / "a.jsonl"});
  EXPECT_EQ(s.size(), 1u);
  const auto& m = s.manifest();
  ASSERT_EQ(m.errors.size(), 4u);
  EXPECT_EQ(m.errors[0].line, 2u);
  EXPECT_EQ(m.errors[1].line, 3u);
  EXPECT_EQ(m.errors[2].line, 4u);
  EXPECT_EQ(m.sources[0].records, 5u);
  EXPECT_EQ(m.sources[0].skipped, 4u);
}

TEST(Ingest, NothingParseableThrows) {
  auto d = temp_dir("empty");
  write(d / "a.jsonl", "garbage\n");
  EXPECT_THROW(ingest({d / "a.jsonl"}), IngestError);
}

TEST(Ingest, CsvQuotingAndRaggedRows) {
  auto rows = parse_csv("a,b\n\"x, y\",\"he said \"\"hi\"\"\"\n\"multi\nline\",2\n");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1][0], "x, y");
  EXPECT_EQ(rows[1][1], "he said \"hi\"");
  EXPECT_EQ(rows[2][0], "multi\nline");

  auto d = temp_dir("ragged");
  write(d / "r.csv", "time,message\n2025-04-01,ok\n2025-04-01,too,many\n");
  EventStore s = ingest({d / "r.csv"}, CsvMapping::parse("ts=time\nmsg=message\n"));
  EXPECT_EQ(s.size(), 1u);
  ASSERT_EQ(s.manifest().errors.size(), 1u);
  EXPECT_EQ(s.manifest().errors[0].line, 3u);
}

TEST(Ingest, IdempotentThroughCanonicalForm) {
  auto d = temp_dir("idem");
  EventStore a = ingest({kFixtures / "sample.jsonl"});
  write_events_jsonl(a, d / "events.jsonl");
  EventStore b = ingest({d / "events.jsonl"});
  write_events_jsonl(b, d / "events2.jsonl");
  EXPECT_EQ(read(d / "events.jsonl"), read(d / "events2.jsonl"));
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
}

TEST(Ingest, ShuffledInputGivesSameStore) {
  auto d = temp_dir("shuffle");
  std::vector<std::string> lines;
  {
    std::ifstream in(kFixtures / "sample.jsonl");
    for (std::string l; std::getline(in, l);) lines.push_back(l);
  }
  // Duplicate one record so dedup is exercised under permutation too.
  lines.push_back(lines[2]);
  std::mt19937_64 rng(5);
  EventStore ref = ingest({kFixtures / "sample.jsonl"});
  for (int trial = 0; trial < 10; ++trial) {
    std::shuffle(lines.begin(), lines.end(), rng);
    std::string body;
    for (const auto& l : lines) body += l + "\n";
    write(d / "s.jsonl", body);
    EventStore s = ingest({d / "s.jsonl"});
    ASSERT_EQ(s.size(), ref.size());
    for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(s[i], ref[i]);
    EXPECT_EQ(s.manifest().duplicates, 1u);
  }
}

TEST(Ingest, ListsLogFilesSorted) {
  auto d = temp_dir("list");
  write(d / "b.jsonl", "");
  write(d / "a.csv", "");
  write(d / "notes.txt", "");
  auto files = list_log_files(d);
  ASSERT_EQ(files.size(), 2u);
  EXPECT_EQ(files[0].filename(), "a.csv");
  EXPECT_EQ(files[1].filename(), "b.jsonl");
}
