#include "tml/event.hpp"

#include <algorithm>

#include "tml/digest.hpp"

namespace tml {

std::string build_text_repr(const Event& e) {
  std::string out;
  auto add = [&out](const std::string& v) {
    if (v.empty()) return;
    if (!out.empty()) out += " | ";
    out += v;
  };
  add(e.product);
  add(e.event_type);
  add(e.asset_id);
  add(e.msg);
  for (const auto& t : e.tech) add(t);
  for (const auto& t : e.attack) add(t);
  for (const auto& t : e.risk_tag) add(t);
  if (out.empty()) {
    throw UnembeddableEvent("event has no text fields to embed");
  }
  return out;
}

std::string derive_event_id(const Event& e) {
  std::string buf = format_iso(e.ts);
  for (const std::string* f : {&e.product, &e.event_type, &e.asset_id, &e.msg}) {
    buf.push_back('\x1f');
    buf += *f;
  }
  return sha256_hex(buf);
}

nlohmann::ordered_json to_json(const Event& e) {
  nlohmann::ordered_json j;
  j["event_id"] = e.event_id;
  j["ts"] = format_iso(e.ts);
  j["product"] = e.product;
  j["event_type"] = e.event_type;
  j["asset_id"] = e.asset_id;
  j["msg"] = e.msg;
  j["context"] = e.context;
  j["tech"] = e.tech;
  j["attack"] = e.attack;
  j["risk_tag"] = e.risk_tag;
  j["text_repr"] = e.text_repr;
  return j;
}

nlohmann::ordered_json Manifest::to_json() const {
  nlohmann::ordered_json j;
  j["sources"] = nlohmann::ordered_json::array();
  for (const auto& s : sources) {
    j["sources"].push_back(
        {{"file", s.file}, {"records", s.records}, {"kept", s.kept}, {"skipped", s.skipped}});
  }
  j["total_events"] = total_events;
  j["duplicates"] = duplicates;
  j["naive_timestamps"] = naive_timestamps;
  j["week_range"] = {min_week.str(), max_week.str()};
  j["errors"] = nlohmann::ordered_json::array();
  for (const auto& e : errors) {
    j["errors"].push_back({{"file", e.file}, {"line", e.line}, {"reason", e.reason}});
  }
  return j;
}

EventStore::EventStore(std::vector<Event> events, Manifest manifest)
    : manifest_(std::move(manifest)) {
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    if (a.ts != b.ts) return a.ts < b.ts;
    if (a.event_id != b.event_id) return a.event_id < b.event_id;
    // Same id and instant: fall back to full content so input order never matters.
    return to_json(a).dump() < to_json(b).dump();
  });

  events_.reserve(events.size());
  std::size_t dropped = 0;
  for (auto& e : events) {
    if (index_.count(e.event_id) != 0) {
      ++dropped;
      continue;
    }
    index_.emplace(e.event_id, events_.size());
    events_.push_back(std::move(e));
  }
  manifest_.duplicates += dropped;
  manifest_.total_events = events_.size();
  if (!events_.empty()) {
    manifest_.min_week = iso_week_of(events_.front().ts);
    manifest_.max_week = iso_week_of(events_.back().ts);
  }
}

std::size_t EventStore::find(std::string_view event_id) const {
  auto it = index_.find(std::string(event_id));
  return it == index_.end() ? npos : it->second;
}

}  // namespace tml
