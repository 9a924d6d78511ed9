#include "tml/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tml/kernels.hpp"

namespace tml {

void RetrievalParams::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must be in [0, 1]");
  if (!(half_life_days > 0.0)) throw std::invalid_argument("half_life_days must be positive");
  if (top_k == 0) throw std::invalid_argument("top_k must be positive");
}

RankMode parse_rank_mode(std::string_view s) {
  if (s == "fused") return RankMode::kFused;
  if (s == "cosine" || s == "cosine_only") return RankMode::kCosineOnly;
  throw std::invalid_argument("mode must be fused or cosine, got '" + std::string(s) + "'");
}

nlohmann::ordered_json RankedHit::to_json() const {
  return {{"event_id", event_id},   {"ts", format_iso(ts)},
          {"cosine_sim", cosine_sim}, {"age_days", age_days},
          {"recency_weight", recency_weight}, {"fused", fused}};
}

double age_days(Instant now, Instant t, Diagnostics* diag) {
  if (t > now) {
    if (diag) diag->warn("document at " + format_iso(t) + " is after now=" + format_iso(now) +
                         "; age clamped to 0");
    return 0.0;
  }
  auto us = (now - t).count();
  return static_cast<double>(us) / 1e6 / 86400.0;
}

double recency_weight(double age, double half_life_days) {
  return std::pow(0.5, age / half_life_days);
}

double fused_score(double cos_sim, double age, const RetrievalParams& p) {
  return p.alpha * cos_sim + (1.0 - p.alpha) * recency_weight(age, p.half_life_days);
}

std::vector<std::size_t> as_of_filter(const EventStore& store, Instant cutoff) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < store.size(); ++i) {
    if (store[i].ts <= cutoff) out.push_back(i);
  }
  return out;
}

std::vector<RankedHit> rank(std::span<const float> query_vec, const EventStore& store,
                            const VectorStore& vecs, const RetrievalParams& p, RankMode mode,
                            std::optional<Instant> as_of, Diagnostics* diag) {
  p.validate();
  if (query_vec.size() != vecs.dim()) {
    throw std::invalid_argument("query dim " + std::to_string(query_vec.size()) +
                                " does not match store dim " + std::to_string(vecs.dim()));
  }
  check_alignment(store, vecs);

  std::vector<std::size_t> rows;
  if (as_of) {
    rows = as_of_filter(store, *as_of);
  } else {
    rows.resize(store.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  }
  if (rows.empty()) return {};

  std::vector<double> cos(rows.size());
  kernels::cosine_rows_parallel(query_vec, vecs, rows, cos);

  std::vector<RankedHit> hits(rows.size());
  std::size_t future = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Event& e = store[rows[i]];
    RankedHit& h = hits[i];
    h.event_id = e.event_id;
    h.ts = e.ts;
    h.cosine_sim = cos[i];
    if (e.ts > p.now) ++future;
    h.age_days = age_days(p.now, e.ts);
    h.recency_weight = recency_weight(h.age_days, p.half_life_days);
    h.fused = mode == RankMode::kFused ? fused_score(h.cosine_sim, h.age_days, p) : h.cosine_sim;
  }
  if (future > 0 && diag) {
    diag->warn(std::to_string(future) + " document(s) dated after now=" + format_iso(p.now) +
               "; ages clamped to 0");
  }

  auto before = [](const RankedHit& a, const RankedHit& b) {
    if (a.fused != b.fused) return a.fused > b.fused;
    if (a.ts != b.ts) return a.ts > b.ts;
    return a.event_id < b.event_id;
  };
  const std::size_t k = std::min(p.top_k, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(k), hits.end(),
                    before);
  hits.resize(k);
  return hits;
}

}  // namespace tml
