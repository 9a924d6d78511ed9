#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tml/embedding.hpp"
#include "tml/metrics.hpp"
#include "tml/retrieval.hpp"
#include "tml/topics.hpp"

namespace tml {

enum class QueryType { kFreshness, kAsOf };

struct QuerySpec {
  std::string text;
  QueryType type = QueryType::kFreshness;
  std::string topic;
  std::optional<Instant> cutoff;   // as_of only
  std::vector<float> vector;       // optional precomputed query vector
};

struct EvalConfig {
  std::filesystem::path truth_path;
  std::optional<Instant> now;  // defaults to the newest event in the store
  std::size_t top_k = 10;
  double alpha = 0.7;
  double half_life_days = 14.0;
  std::vector<double> alphas{0.4, 0.5, 0.7, 0.9, 0.95};
  std::vector<QuerySpec> queries;

  /// Relative truth paths resolve against base_dir.
  static EvalConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
  static EvalConfig load(const std::filesystem::path& path);
};

struct GroundTruth {
  std::vector<TopicLabels> topics;

  static GroundTruth from_json(const nlohmann::json& j);
  static GroundTruth load(const std::filesystem::path& path);
  const TopicLabels* find(const std::string& topic) const;
};

struct QueryOutcome {
  std::string text;
  QueryType type = QueryType::kFreshness;
  std::string topic;
  std::optional<Instant> cutoff;
  // freshness
  int latest_set_cosine = 0;
  int latest_set_fused = 0;
  int latest_cosine = 0;
  int latest_fused = 0;
  // as_of
  double asof_correctness = 1.0;
  std::size_t asof_violations = 0;
  std::vector<RankedHit> fused_hits;
};

struct EvalReport {
  double trend_macro_f1 = 0.0;
  F1Report trend;
  std::vector<AlignedLabel> aligned;
  double asof_correctness = 1.0;
  std::size_t asof_violations = 0;
  std::map<std::string, double> latest_set_at_10;  // "cosine" / "fused"
  std::map<std::string, double> latest_at_10;
  std::map<double, double> sensitivity;            // alpha -> Latest-Set@k
  std::vector<SliceK> per_week_k;
  std::vector<QueryOutcome> queries;
  std::vector<std::string> warnings;

  nlohmann::ordered_json to_json() const;
  /// Markdown summary: the metric table plus the alpha sweep.
  std::string to_markdown() const;
};

/// Mean Latest-Set@k of the freshness queries at each alpha.
std::map<double, double> sensitivity_sweep(const std::vector<double>& alphas,
                                           const EventStore& store, const VectorStore& vecs,
                                           const EvalConfig& cfg, const GroundTruth& truth,
                                           const Embedder& emb);

EvalReport run_eval(const EventStore& store, const VectorStore& vecs, const TrackResult& tracked,
                    const EvalConfig& cfg, const GroundTruth& truth, const Embedder& emb);

}  // namespace tml
