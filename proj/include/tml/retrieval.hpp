#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "tml/embedding.hpp"
#include "tml/event.hpp"
#include "tml/time.hpp"

namespace tml {

/// Collects non-fatal warnings for the caller to surface.
struct Diagnostics {
  std::vector<std::string> warnings;
  void warn(std::string msg) { warnings.push_back(std::move(msg)); }
};

struct RetrievalParams {
  double alpha = 0.7;
  double half_life_days = 14.0;
  std::size_t top_k = 10;
  Instant now{};

  void validate() const;
};

enum class RankMode { kCosineOnly, kFused };

RankMode parse_rank_mode(std::string_view s);

struct RankedHit {
  std::string event_id;
  Instant ts{};
  double cosine_sim = 0.0;
  double age_days = 0.0;
  double recency_weight = 1.0;
  double fused = 0.0;

  nlohmann::ordered_json to_json() const;
};

/// (now - t) in fractional days. Future instants clamp to 0 and warn.
double age_days(Instant now, Instant t, Diagnostics* diag = nullptr);

/// 0.5^(age / half_life)
double recency_weight(double age, double half_life_days);

/// alpha * cos + (1 - alpha) * 0.5^(age / half_life)
double fused_score(double cos_sim, double age, const RetrievalParams& p);

/// Indices of events with ts <= cutoff, in store order.
std::vector<std::size_t> as_of_filter(const EventStore& store, Instant cutoff);

/// Exhaustive scoring of the (optionally as-of filtered) store, ordered by
/// score descending, then ts descending, then event_id ascending; top_k kept.
/// Cosine-only mode ranks by cosine alone and ignores time.
std::vector<RankedHit> rank(std::span<const float> query_vec, const EventStore& store,
                            const VectorStore& vecs, const RetrievalParams& p, RankMode mode,
                            std::optional<Instant> as_of = std::nullopt,
                            Diagnostics* diag = nullptr);

}  // namespace tml
