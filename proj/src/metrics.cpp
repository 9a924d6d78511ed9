#include "tml/metrics.hpp"

#include <algorithm>
#include <stdexcept>

namespace tml {

F1Report macro_f1(std::span<const LabelPair> pairs) {
  F1Report r;
  double sum = 0.0;
  for (auto c : kScoredLabels) {
    ClassScore s;
    for (const auto& p : pairs) {
      const bool t = p.truth == c;
      const bool pr = p.predicted && *p.predicted == c;
      if (t && pr) ++s.tp;
      else if (pr) ++s.fp;
      else if (t) ++s.fn;
    }
    if (s.tp + s.fp > 0) s.precision = static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fp);
    if (s.tp + s.fn > 0) s.recall = static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fn);
    const std::size_t denom = 2 * s.tp + s.fp + s.fn;
    s.f1 = denom == 0 ? 0.0 : 2.0 * static_cast<double>(s.tp) / static_cast<double>(denom);
    sum += s.f1;
    r.per_class[c] = s;
  }
  r.macro_f1 = sum / static_cast<double>(kScoredLabels.size());
  return r;
}

F1Report trend_macro_f1(const TrackResult& predicted, std::span<const TopicLabels> truth,
                        std::vector<AlignedLabel>* aligned) {
  std::vector<LabelPair> pairs;
  std::vector<AlignedLabel> rows;
  std::size_t any_overlap = 0;

  for (const auto& topic : truth) {
    for (const auto& [slice, label] : topic.labels) {
      AlignedLabel a;
      a.slice = slice;
      a.topic = topic.name;
      a.truth = label;
      for (std::size_t i = 0; i < predicted.clusters.size(); ++i) {
        const auto& c = predicted.clusters[i];
        if (c.week.label != slice) continue;
        std::size_t ov = 0;
        for (const auto& id : c.member_ids) ov += topic.event_ids.count(id);
        if (ov > a.overlap || (ov == a.overlap && ov > 0 && c.cluster_id < *a.cluster_id)) {
          a.overlap = ov;
          a.cluster_id = c.cluster_id;
          a.predicted = predicted.trends[i].label;
        }
      }
      if (a.overlap > 0) ++any_overlap;
      pairs.push_back({a.truth, a.predicted});
      rows.push_back(std::move(a));
    }
  }

  F1Report r;
  if (any_overlap == 0) {
    r.diagnostics.push_back("no predicted cluster overlaps any ground-truth topic");
    for (auto c : kScoredLabels) r.per_class[c] = ClassScore{};
  } else {
    r = macro_f1(pairs);
  }
  if (aligned) *aligned = std::move(rows);
  return r;
}

double asof_correctness(std::span<const RankedHit> hits, Instant cutoff, Diagnostics* diag) {
  if (hits.empty()) {
    if (diag) diag->warn("as-of correctness over zero hits is vacuously 1.0");
    return 1.0;
  }
  auto ok = std::count_if(hits.begin(), hits.end(), [&](const RankedHit& h) { return h.ts <= cutoff; });
  return static_cast<double>(ok) / static_cast<double>(hits.size());
}

namespace {

struct Newest {
  Instant ts{};
  std::string first_id;
};

Newest newest_relevant(const EventStore& store, const std::set<std::string>& relevant_ids) {
  bool found = false;
  Newest n;
  for (const auto& id : relevant_ids) {
    auto i = store.find(id);
    if (i == EventStore::npos) continue;
    const auto& e = store[i];
    if (!found || e.ts > n.ts || (e.ts == n.ts && e.event_id < n.first_id)) {
      n.ts = e.ts;
      n.first_id = e.event_id;
      found = true;
    }
  }
  if (!found) throw std::invalid_argument("freshness query has no relevant events in the store");
  return n;
}

}  // namespace

int latest_set_at_k(std::span<const RankedHit> hits, const EventStore& store,
                    const std::set<std::string>& relevant_ids, std::size_t k) {
  const Newest n = newest_relevant(store, relevant_ids);
  const std::size_t lim = std::min(k, hits.size());
  for (std::size_t i = 0; i < lim; ++i) {
    if (hits[i].ts == n.ts && relevant_ids.count(hits[i].event_id)) return 1;
  }
  return 0;
}

int latest_at_k(std::span<const RankedHit> hits, const EventStore& store,
                const std::set<std::string>& relevant_ids, std::size_t k) {
  const Newest n = newest_relevant(store, relevant_ids);
  const std::size_t lim = std::min(k, hits.size());
  for (std::size_t i = 0; i < lim; ++i) {
    if (hits[i].event_id == n.first_id) return 1;
  }
  return 0;
}

}  // namespace tml
