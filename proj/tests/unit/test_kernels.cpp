#include <gtest/gtest.h>
#include <omp.h>

#include <random>

#include "tml/embedding.hpp"
#include "tml/kernels.hpp"

using namespace tml;

namespace {

struct ThreadGuard {
  int saved = omp_get_max_threads();
  explicit ThreadGuard(int n) { omp_set_num_threads(n); }
  ~ThreadGuard() { omp_set_num_threads(saved); }
};

VectorStore random_store(std::size_t n, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> nd;
  std::vector<float> rows(n * dim);
  for (auto& x : rows) x = nd(rng);
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back(std::to_string(i));
  return VectorStore::from_floats(dim, ids, rows);
}

}  // namespace

TEST(Kernels, CosineParallelEqualsSerialBitwise) {
  ThreadGuard g(4);
  auto vs = random_store(2000, 96, 1);
  std::vector<float> q(96);
  std::mt19937_64 rng(2);
  std::normal_distribution<float> nd;
  for (auto& x : q) x = nd(rng);
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < vs.size(); i += 3) rows.push_back(i);
  std::vector<double> a(rows.size()), b(rows.size());
  kernels::cosine_rows_serial(q, vs, rows, a);
  kernels::cosine_rows_parallel(q, vs, rows, b);
  EXPECT_EQ(a, b);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_NEAR(a[i], cosine(q, vs.row(rows[i])), 1e-12);
  }
}

TEST(Kernels, AssignParallelEqualsSerial) {
  ThreadGuard g(4);
  const std::size_t n = 1500, dim = 32, k = 7;
  std::mt19937_64 rng(3);
  std::normal_distribution<float> nd;
  std::vector<float> pts(n * dim);
  for (auto& x : pts) x = nd(rng);
  std::vector<double> cents(k * dim);
  for (auto& x : cents) x = nd(rng);
  std::vector<std::uint32_t> la(n), lb(n);
  std::vector<double> da(n), db(n);
  kernels::assign_serial(pts, dim, cents, la, da);
  kernels::assign_parallel(pts, dim, cents, lb, db);
  EXPECT_EQ(la, lb);
  EXPECT_EQ(da, db);
}

TEST(Kernels, AssignTiesGoToLowestIndex) {
  std::vector<float> pts{0.0f, 0.0f};
  std::vector<double> cents{1.0, 0.0, -1.0, 0.0};
  std::vector<std::uint32_t> l(1);
  std::vector<double> d(1);
  kernels::assign_serial(pts, 2, cents, l, d);
  EXPECT_EQ(l[0], 0u);
  EXPECT_DOUBLE_EQ(d[0], 1.0);
}

TEST(Kernels, EmbedParallelEqualsSerialAndKeepsOrder) {
  ThreadGuard g(4);
  std::vector<std::string> texts;
  for (int i = 0; i < 500; ++i) texts.push_back("event " + std::to_string(i) + " on host " + std::to_string(i % 17));
  texts[123] = "--";
  HashEmbedder emb(64);
  std::vector<float> a(texts.size() * 64), b(texts.size() * 64);
  std::vector<std::string> ea, eb;
  kernels::embed_serial(texts, emb, a, ea);
  kernels::embed_parallel(texts, emb, b, eb);
  EXPECT_EQ(a, b);
  EXPECT_EQ(ea, eb);
  EXPECT_FALSE(ea[123].empty());
  auto v7 = hash_embed(texts[7], 64);
  EXPECT_TRUE(std::equal(v7.begin(), v7.end(), a.begin() + 7 * 64));
}
