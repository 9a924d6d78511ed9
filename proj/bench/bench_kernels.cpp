// Serial reference vs OpenMP kernels on the synthetic stream.
#include <benchmark/benchmark.h>

#include <random>
#include <sstream>

#include "tml/embedding.hpp"
#include "tml/ingest.hpp"
#include "tml/kernels.hpp"
#include "tml/synth.hpp"

using namespace tml;

namespace {

struct Corpus {
  EventStore store;
  VectorStore vecs;
  std::vector<std::string> texts;
  std::vector<float> points;
  std::vector<double> centroids;
};

const Corpus& corpus() {
  static const Corpus c = [] {
    Corpus c;
    auto s = synth::generate_stream(synth::GeneratorConfig::standard(42));
    std::vector<Event> evs;
    for (const auto& [name, body] : s.files) {
      std::istringstream in(body);
      std::string line;
      while (std::getline(in, line)) evs.push_back(normalize_record(nlohmann::json::parse(line)));
    }
    c.store = EventStore(std::move(evs));
    c.vecs = encode_store(c.store, HashEmbedder());
    for (const auto& e : c.store.events()) c.texts.push_back(e.text_repr);
    for (std::size_t i = 0; i < c.vecs.size(); ++i) {
      auto r = c.vecs.row(i);
      c.points.insert(c.points.end(), r.begin(), r.end());
    }
    std::mt19937_64 rng(1);
    for (int k = 0; k < 8; ++k) {
      auto r = c.vecs.row(rng() % c.vecs.size());
      c.centroids.insert(c.centroids.end(), r.begin(), r.end());
    }
    return c;
  }();
  return c;
}

template <bool Parallel>
void BM_Cosine(benchmark::State& st) {
  const auto& c = corpus();
  auto q = hash_embed("okta mfa push denied for alice", c.vecs.dim());
  std::vector<std::size_t> rows(c.vecs.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  std::vector<double> out(rows.size());
  for (auto _ : st) {
    if constexpr (Parallel) kernels::cosine_rows_parallel(q, c.vecs, rows, out);
    else kernels::cosine_rows_serial(q, c.vecs, rows, out);
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(rows.size()));
}

template <bool Parallel>
void BM_Assign(benchmark::State& st) {
  const auto& c = corpus();
  const std::size_t n = c.vecs.size();
  std::vector<std::uint32_t> labels(n);
  std::vector<double> dist2(n);
  for (auto _ : st) {
    if constexpr (Parallel) kernels::assign_parallel(c.points, c.vecs.dim(), c.centroids, labels, dist2);
    else kernels::assign_serial(c.points, c.vecs.dim(), c.centroids, labels, dist2);
    benchmark::DoNotOptimize(labels.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(n));
}

template <bool Parallel>
void BM_Embed(benchmark::State& st) {
  const auto& c = corpus();
  HashEmbedder emb;
  std::vector<float> out(c.texts.size() * emb.dim());
  std::vector<std::string> errors;
  for (auto _ : st) {
    if constexpr (Parallel) kernels::embed_parallel(c.texts, emb, out, errors);
    else kernels::embed_serial(c.texts, emb, out, errors);
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(c.texts.size()));
}

}  // namespace

BENCHMARK(BM_Cosine<false>)->Name("cosine_rows/serial");
BENCHMARK(BM_Cosine<true>)->Name("cosine_rows/parallel");
BENCHMARK(BM_Assign<false>)->Name("assign/serial");
BENCHMARK(BM_Assign<true>)->Name("assign/parallel");
BENCHMARK(BM_Embed<false>)->Name("embed/serial");
BENCHMARK(BM_Embed<true>)->Name("embed/parallel");

BENCHMARK_MAIN();
