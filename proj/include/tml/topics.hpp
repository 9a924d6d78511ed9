#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tml/embedding.hpp"
#include "tml/event.hpp"
#include "tml/time.hpp"

namespace tml {

enum class Granularity { kDay, kWeek, kMonth };

Granularity parse_granularity(std::string_view s);
std::string to_string(Granularity g);

/// A time bucket. Ordinals of adjacent buckets differ by exactly one.
struct SliceKey {
  Granularity granularity = Granularity::kWeek;
  std::int64_t ordinal = 0;
  std::string label;  // "YYYY-Www", "YYYY-MM-DD" or "YYYY-MM"

  bool operator==(const SliceKey& o) const {
    return granularity == o.granularity && ordinal == o.ordinal;
  }
  bool operator<(const SliceKey& o) const { return ordinal < o.ordinal; }
};

SliceKey slice_of(Instant t, Granularity g);

enum class TrendLabel { kEmergence, kGrowth, kDecay, kDrift, kStable };

std::string to_string(TrendLabel l);
TrendLabel parse_trend_label(std::string_view s);
inline constexpr TrendLabel kAllLabels[] = {TrendLabel::kEmergence, TrendLabel::kGrowth,
                                            TrendLabel::kDecay, TrendLabel::kDrift,
                                            TrendLabel::kStable};

struct TrendParams {
  double match_threshold = 0.5;
  double growth_factor = 1.5;
  std::size_t growth_min_events = 30;
  double decay_factor = 0.5;
  double drift_threshold = 0.2;
  /// nullopt selects k per slice with the elbow rule.
  std::optional<std::size_t> fixed_k;
  /// Elbow search bound; nullopt uses default_k_max(n).
  std::optional<std::size_t> k_max;

  /// Throws std::invalid_argument when thresholds are out of range.
  void validate() const;
};

struct WeekCluster {
  SliceKey week;
  std::uint32_t cluster_id = 0;
  std::vector<std::string> member_ids;
  std::vector<float> centroid;  // unit norm
  std::size_t size = 0;
  std::vector<std::string> top_terms;
};

struct TrendRecord {
  SliceKey week;
  std::uint32_t cluster_id = 0;
  TrendLabel label = TrendLabel::kEmergence;
  std::optional<std::uint32_t> matched_prev_id;
  std::optional<double> match_sim;
  std::optional<double> drift_value;
  std::size_t size = 0;
  std::optional<std::size_t> prev_size;
};

struct ClusterMatch {
  std::uint32_t curr_id = 0;
  std::uint32_t prev_id = 0;
  double sim = 0.0;
};

/// Terms of the member text representations ranked by document frequency
/// (ties lexicographic), stopwords and pure numbers dropped, at most `limit`.
std::vector<std::string> top_terms(std::span<const std::string> texts, std::size_t limit = 8);
std::vector<std::string> top_terms(const WeekCluster& cluster, const EventStore& store,
                                   std::size_t limit = 8);

/// Greedy one-to-one linking of current to prior clusters by centroid cosine.
std::vector<ClusterMatch> match_weeks(std::span<const WeekCluster> prev,
                                      std::span<const WeekCluster> curr, const TrendParams& p);

/// 1 - cos(prev, curr).
double drift_of(std::span<const float> prev_centroid, std::span<const float> curr_centroid);

struct PriorLink {
  std::size_t prev_size = 0;
  double drift = 0.0;
};

/// Rule precedence: emergence (no prior), growth, decay, drift, stable.
TrendLabel label_trend(std::size_t size, const std::optional<PriorLink>& prior,
                       const TrendParams& p);

struct SliceK {
  SliceKey slice;
  std::size_t n_events = 0;
  std::size_t k = 0;
};

struct TrackResult {
  std::vector<WeekCluster> clusters;
  std::vector<TrendRecord> trends;  // one per cluster, same order
  std::vector<SliceK> slice_k;
};

/// Clusters every slice independently, then labels clusters against the
/// immediately preceding slice. A slice with no events breaks the chain.
TrackResult track(const EventStore& store, const VectorStore& vecs, const TrendParams& p,
                  std::uint64_t seed, Granularity g = Granularity::kWeek);

void write_clusters_csv(const TrackResult& r, const std::filesystem::path& path);
void write_trends_summary_csv(const TrackResult& r, const std::filesystem::path& path);

}  // namespace tml
