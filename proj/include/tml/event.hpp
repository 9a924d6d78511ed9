#pragma once

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "tml/time.hpp"

namespace tml {

/// One normalized log record.
struct Event {
  std::string event_id;
  Instant ts{};
  std::string product;
  std::string event_type;
  std::string asset_id;
  std::string msg;
  std::map<std::string, std::string> context;
  std::vector<std::string> tech;
  std::vector<std::string> attack;
  std::vector<std::string> risk_tag;
  std::string text_repr;

  bool operator==(const Event&) const = default;
};

class UnembeddableEvent : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Salient fields joined with " | " in fixed order: product, event_type,
/// asset_id, msg, then tech, attack and risk_tag elements. Empty values are
/// skipped. Throws UnembeddableEvent when nothing is left.
std::string build_text_repr(const Event& e);

/// SHA-256 over ts_iso, product, event_type, asset_id and msg joined by 0x1f.
std::string derive_event_id(const Event& e);

/// Canonical interchange form (the field names of the normalized schema).
nlohmann::ordered_json to_json(const Event& e);

struct SourceStats {
  std::string file;
  std::size_t records = 0;
  std::size_t kept = 0;
  std::size_t skipped = 0;
};

struct RecordError {
  std::string file;
  std::size_t line = 0;
  std::string reason;
};

struct Manifest {
  std::vector<SourceStats> sources;
  std::vector<RecordError> errors;
  std::size_t total_events = 0;
  std::size_t duplicates = 0;
  std::size_t naive_timestamps = 0;
  WeekKey min_week{};
  WeekKey max_week{};

  nlohmann::ordered_json to_json() const;
};

/// Immutable, ordered by (ts, event_id), unique event ids.
class EventStore {
 public:
  EventStore() = default;
  /// Sorts and deduplicates; the first event per id in sorted order wins.
  explicit EventStore(std::vector<Event> events, Manifest manifest = {});

  const std::vector<Event>& events() const { return events_; }
  const Manifest& manifest() const { return manifest_; }
  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }
  const Event& operator[](std::size_t i) const { return events_[i]; }

  /// Index of the event with this id, or npos.
  std::size_t find(std::string_view event_id) const;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::vector<Event> events_;
  Manifest manifest_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace tml
