#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "tml/embedding.hpp"
#include "tml/ingest.hpp"

using namespace tml;
namespace fs = std::filesystem;
using Kind = VectorFileError::Kind;

namespace {

VectorStore random_store(std::size_t n, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> nd;
  std::vector<float> rows(n * dim);
  for (auto& x : rows) x = nd(rng);
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back("id-" + std::to_string(i));
  return VectorStore::from_floats(dim, ids, rows);
}

Kind kind_of(std::string_view bytes, std::optional<std::size_t> dim = std::nullopt,
             std::optional<std::size_t> count = std::nullopt) {
  try {
    parse_vectors(bytes, dim, count);
  } catch (const VectorFileError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error";
  return Kind::kIo;
}

}  // namespace

TEST(VectorFile, LayoutIsExact) {
  auto vs = VectorStore::from_floats(2, {"a", "bc"}, std::vector<float>{1.0f, -2.0f, 0.5f, 0.0f});
  const std::string b = serialize_vectors(vs);
  const std::string expect = std::string("TMV1") + std::string("\x02\x00\x00\x00", 4) +
                             std::string("\x02\x00\x00\x00\x00\x00\x00\x00", 8) + "a\nbc\n" +
                             std::string("\x00\x3c\x00\xc0\x00\x38\x00\x00", 8);
  EXPECT_EQ(b, expect);
}

TEST(VectorFile, RoundTripIsByteExact) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto vs = random_store(1 + seed * 3, 8 + seed, seed);
    const std::string b = serialize_vectors(vs);
    auto back = parse_vectors(b);
    EXPECT_EQ(back, vs);
    EXPECT_EQ(serialize_vectors(back), b);
  }
}

TEST(VectorFile, WriteReadThroughDisk) {
  auto p = fs::temp_directory_path() / "tml_vf_roundtrip.tmv";
  auto vs = random_store(7, 384, 1);
  write_vector_file(p, vs);
  EXPECT_EQ(read_vector_file(p, 384, 7), vs);
}

TEST(VectorFile, DistinctErrorKinds) {
  const std::string good = serialize_vectors(random_store(3, 4, 2));
  EXPECT_EQ(kind_of("XYZ1" + good.substr(4)), Kind::kBadMagic);
  EXPECT_EQ(kind_of("TMV2" + good.substr(4)), Kind::kBadVersion);
  EXPECT_EQ(kind_of(good, 5), Kind::kDimMismatch);
  EXPECT_EQ(kind_of(good, std::nullopt, 4), Kind::kCountMismatch);
  EXPECT_EQ(kind_of(good.substr(0, good.size() - 3)), Kind::kTruncated);
  EXPECT_EQ(kind_of(good.substr(0, 10)), Kind::kTruncated);
  EXPECT_EQ(kind_of(good.substr(0, 18)), Kind::kTruncated);
  EXPECT_EQ(kind_of(good + "xx"), Kind::kCountMismatch);
  try {
    read_vector_file("/nonexistent/file.tmv");
    FAIL();
  } catch (const VectorFileError& e) {
    EXPECT_EQ(e.kind(), Kind::kIo);
  }
}

TEST(VectorFile, ExternallyProducedFileIsAccepted) {
  // Written by tests/fixtures/make_external_vectors.py with numpy.
  const fs::path dir = TML_FIXTURES;
  EventStore store = ingest({dir / "sample.jsonl"});
  auto vs = read_vector_file(dir / "ext_vectors.tmv", 384, store.size());
  EXPECT_NO_THROW(check_alignment(store, vs));
  for (std::size_t i = 0; i < vs.size(); ++i) EXPECT_NEAR(vs.norm(i), 1.0, 2e-3);
}

TEST(VectorFile, AlignmentMustMatchStoreOrder) {
  const fs::path dir = TML_FIXTURES;
  EventStore store = ingest({dir / "sample.jsonl"});
  auto vs = random_store(5, 4, 3);
  EXPECT_THROW(check_alignment(store, vs), std::invalid_argument);
}
