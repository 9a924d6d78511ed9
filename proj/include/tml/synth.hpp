#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "tml/time.hpp"
#include "tml/topics.hpp"

namespace tml::synth {

/// One message pattern. "{user}" and "{n}" placeholders are filled per event.
struct Template {
  std::string event_type;
  std::string msg;
};

struct TopicSpec {
  std::string name;
  std::string product;
  std::vector<std::string> tech;
  std::vector<std::string> attack;
  std::vector<std::string> risk_tag;
  std::string asset_prefix;
  std::size_t asset_pool = 6;
  /// Events per week before any dynamics apply.
  std::size_t base_rate = 10;

  enum class Dynamics { kNone, kGrow, kDrift, kDecay } dynamics = Dynamics::kNone;
  /// kGrow: rate multiplies by factor in weeks [first_week, last_week] and holds after.
  /// kDecay: rate multiplies by factor every week after first_week - 1.
  /// kDrift: templates switch to drift_templates from first_week on.
  int first_week = 0;
  int last_week = 0;
  double factor = 1.0;
  /// Fraction of new-phase templates in the first weeks of a drift
  /// (index 0 = first_week); 1.0 afterwards.
  std::vector<double> drift_mix;

  std::vector<Template> templates;
  std::vector<Template> drift_templates;

  /// Old near-duplicates for the freshness suite: `burst_count` copies of
  /// burst_template on one asset, spread over burst weeks, counted inside the
  /// weekly volume.
  Template burst_template;
  std::string burst_asset;
  std::size_t burst_count = 0;
  int burst_first_week = 1;
  int burst_last_week = 2;

  /// The newest evidence for the freshness query: the last `fresh_count`
  /// events of the final week, timestamped within the stream's last day.
  Template fresh_template;
  std::string fresh_asset;
  std::size_t fresh_count = 0;

  /// Freshness query text for this topic.
  std::string freshness_query;
};

struct GeneratorConfig {
  std::uint64_t seed = 42;
  WeekKey first_week{2025, 14};
  int weeks = 13;
  std::vector<TopicSpec> topics;
  /// Distractor events per week drawn from noise_templates (with products).
  std::size_t noise_rate = 8;
  std::vector<std::pair<std::string, Template>> noise_templates;
  std::vector<std::string> users;
  /// As-of cutoffs as (week index, day offset within week).
  std::vector<std::pair<int, int>> as_of_points;

  /// The scripted stream: auth-failure growth, S3-to-Snowflake drift,
  /// vulnerability-scan decay, plus distractors.
  static GeneratorConfig standard(std::uint64_t seed);
};

struct TopicTruth {
  std::string name;
  std::vector<std::string> event_ids;
  std::map<std::string, std::size_t> weekly_counts;  // week label -> count
  std::map<std::string, TrendLabel> labels;           // week label -> label
};

struct GeneratedStream {
  /// One JSONL payload per week, keyed by file name.
  std::vector<std::pair<std::string, std::string>> files;
  std::vector<TopicTruth> truth;
  std::vector<std::string> noise_ids;
  nlohmann::ordered_json eval_config;
  Instant end{};

  nlohmann::ordered_json truth_json(std::uint64_t seed) const;
};

/// Weekly volume of a topic at 1-based week index w.
std::size_t weekly_count(const TopicSpec& t, int w);

/// Scripted ground-truth label of a topic at week w (1-based).
TrendLabel scripted_label(const TopicSpec& t, int w);

GeneratedStream generate_stream(const GeneratorConfig& cfg);

/// Writes the weekly JSONL files, ground_truth.json and eval.json under dir.
void write_stream(const GeneratedStream& s, std::uint64_t seed, const std::filesystem::path& dir);

}  // namespace tml::synth
