#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "tml/embedding.hpp"
#include "tml/topics.hpp"

namespace tml::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitMissing = 2;
inline constexpr int kExitUsage = 64;

inline constexpr const char* kVersion = "0.1.0";

/// A required upstream artifact does not exist (exit 2).
class MissingArtifact : public std::runtime_error {
 public:
  explicit MissingArtifact(const std::filesystem::path& p, const std::string& producer);
};

/// Flag values that parse but are out of range (exit 64).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Workspace {
  std::filesystem::path root;

  std::filesystem::path logs() const { return root / "logs"; }
  std::filesystem::path data() const { return root / "data"; }
  std::filesystem::path results() const { return root / "results"; }
  std::filesystem::path runs() const { return root / "runs"; }

  std::filesystem::path events() const { return data() / "events.jsonl"; }
  std::filesystem::path ingest_manifest() const { return data() / "ingest_manifest.json"; }
  std::filesystem::path vectors() const { return data() / "vectors.tmv"; }
  std::filesystem::path embed_manifest() const { return data() / "embed_manifest.json"; }
  std::filesystem::path clusters() const { return data() / "clusters.json"; }

  std::filesystem::path clusters_csv() const { return results() / "clusters_weekly.csv"; }
  std::filesystem::path trends_csv() const { return results() / "trends_summary.csv"; }
  std::filesystem::path k_csv() const { return results() / "k_per_week.csv"; }
  std::filesystem::path eval_report() const { return results() / "eval_report.json"; }
  std::filesystem::path eval_summary() const { return results() / "eval_summary.md"; }

  /// Path relative to the workspace root when it lies inside it.
  std::string rel(const std::filesystem::path& p) const;
};

/// Exclusive advisory lock on <root>/.tml.lock for the lifetime of the object.
class WorkspaceLock {
 public:
  explicit WorkspaceLock(const std::filesystem::path& root);
  ~WorkspaceLock();
  WorkspaceLock(const WorkspaceLock&) = delete;
  WorkspaceLock& operator=(const WorkspaceLock&) = delete;

 private:
  int fd_ = -1;
};

struct GenOptions {
  std::uint64_t seed = 42;
  std::string out;  // empty: <workspace>/logs
};

struct IngestOptions {
  std::vector<std::string> inputs;  // files or directories; empty: <workspace>/logs
  std::string csv_mapping;
};

struct EmbedOptions {
  std::size_t dim = kDefaultDim;
  bool dim_given = false;
  std::string embedder = "hash";  // or external:<path>
};

struct TrendOptions {
  std::string k = "auto";
  double match_threshold = 0.5;
  double growth_factor = 1.5;
  std::size_t growth_min_events = 30;
  double decay_factor = 0.5;
  double drift_threshold = 0.2;
  std::uint64_t seed = 42;
  std::string granularity = "week";

  TrendParams params() const;
};

struct QueryOptions {
  std::string text;
  std::string query_vector;  // JSON array, inline or a file path
  std::string as_of;
  std::string mode = "fused";
  double alpha = 0.7;
  double half_life_days = 14.0;
  std::size_t k = 10;
  std::string now;
};

struct EvalOptions {
  std::string config;  // empty: <workspace>/logs/eval.json
  std::optional<double> alpha;
  std::optional<double> half_life_days;
};

/// Each stage writes its artifacts plus runs/<stage>.json and returns that
/// run manifest.
nlohmann::ordered_json run_gen(const Workspace& ws, const GenOptions& o, std::ostream& log);
nlohmann::ordered_json run_ingest(const Workspace& ws, const IngestOptions& o, std::ostream& log);
nlohmann::ordered_json run_embed(const Workspace& ws, const EmbedOptions& o, std::ostream& log);
nlohmann::ordered_json run_trends(const Workspace& ws, const TrendOptions& o, std::ostream& log);
nlohmann::ordered_json run_query(const Workspace& ws, const QueryOptions& o, std::ostream& out,
                                 std::ostream& log);
nlohmann::ordered_json run_eval(const Workspace& ws, const EvalOptions& o, std::ostream& log);

nlohmann::ordered_json to_json(const TrackResult& r);
TrackResult track_result_from_json(const nlohmann::json& j);

/// As-of cutoff: a bare date means the end of that day.
Instant parse_as_of(const std::string& s);

/// Parses flags, runs one subcommand and maps failures to exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tml::cli
