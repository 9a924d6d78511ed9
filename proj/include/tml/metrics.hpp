#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "tml/retrieval.hpp"
#include "tml/topics.hpp"

namespace tml {

/// The classes scored by the trend metric; stable and emergence are excluded.
inline constexpr std::array<TrendLabel, 3> kScoredLabels = {TrendLabel::kGrowth,
                                                            TrendLabel::kDrift,
                                                            TrendLabel::kDecay};

struct LabelPair {
  TrendLabel truth;
  std::optional<TrendLabel> predicted;  // nullopt: no cluster aligned
};

struct ClassScore {
  std::size_t tp = 0, fp = 0, fn = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
};

struct F1Report {
  double macro_f1 = 0.0;
  std::map<TrendLabel, ClassScore> per_class;
  std::vector<std::string> diagnostics;
};

/// Per-class F1 over growth, drift and decay, macro-averaged with equal
/// weight. A class without any truth or prediction scores 0.
F1Report macro_f1(std::span<const LabelPair> pairs);

struct TopicLabels {
  std::string name;
  std::set<std::string> event_ids;
  std::map<std::string, TrendLabel> labels;  // slice label -> scripted label
};

struct AlignedLabel {
  std::string slice;
  std::string topic;
  TrendLabel truth = TrendLabel::kStable;
  std::optional<TrendLabel> predicted;
  std::optional<std::uint32_t> cluster_id;
  std::size_t overlap = 0;
};

/// Aligns each (slice, topic) to the slice's cluster with the largest member
/// overlap with the topic (ties: lower cluster id), then scores the labels.
F1Report trend_macro_f1(const TrackResult& predicted, std::span<const TopicLabels> truth,
                        std::vector<AlignedLabel>* aligned = nullptr);

/// Fraction of hits with ts <= cutoff; vacuously 1 (with a warning) if empty.
double asof_correctness(std::span<const RankedHit> hits, Instant cutoff,
                        Diagnostics* diag = nullptr);

/// 1 when the top-k hits contain any relevant event sharing the newest
/// relevant timestamp. Throws std::invalid_argument if no relevant event is
/// in the store.
int latest_set_at_k(std::span<const RankedHit> hits, const EventStore& store,
                    const std::set<std::string>& relevant_ids, std::size_t k);

/// Stricter variant: only the single newest relevant event (ties broken by
/// the smallest event id) counts.
int latest_at_k(std::span<const RankedHit> hits, const EventStore& store,
                const std::set<std::string>& relevant_ids, std::size_t k);

}  // namespace tml
