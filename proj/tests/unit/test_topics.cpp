#include <gtest/gtest.h>

#include <fstream>

#include <cmath>
#include <set>

#include "tml/embedding.hpp"
#include "tml/ingest.hpp"
#include "tml/synth.hpp"
#include "tml/topics.hpp"

using namespace tml;

namespace {

WeekCluster cluster(std::uint32_t id, std::vector<float> c, std::size_t size = 10) {
  double n = 0;
  for (float x : c) n += static_cast<double>(x) * x;
  for (auto& x : c) x = static_cast<float>(x / std::sqrt(n));
  WeekCluster w;
  w.cluster_id = id;
  w.centroid = std::move(c);
  w.size = size;
  return w;
}

struct Tracked {
  EventStore store;
  VectorStore vecs;
  TrackResult result;
};

const Tracked& synthetic_tracked() {
  static const Tracked t = [] {
    auto stream = synth::generate_stream(synth::GeneratorConfig::standard(42));
    std::vector<Event> evs;
    for (const auto& [name, body] : stream.files) {
      std::istringstream in(body);
      for (std::string line; std::getline(in, line);) {
        evs.push_back(normalize_record(nlohmann::json::parse(line)));
      }
    }
    Tracked r;
    r.store = EventStore(std::move(evs));
    r.vecs = encode_store(r.store, HashEmbedder());
    r.result = track(r.store, r.vecs, TrendParams{}, 42);
    return r;
  }();
  return t;
}

}  // namespace

TEST(Slices, LabelsAndAdjacentOrdinals) {
  Instant sun = coerce_timestamp("2025-04-06T23:59:59Z").instant;
  Instant mon = coerce_timestamp("2025-04-07T00:00:00Z").instant;
  auto a = slice_of(sun, Granularity::kWeek), b = slice_of(mon, Granularity::kWeek);
  EXPECT_EQ(a.label, "2025-W14");
  EXPECT_EQ(b.label, "2025-W15");
  EXPECT_EQ(b.ordinal, a.ordinal + 1);

  auto ny = slice_of(coerce_timestamp("2025-12-31").instant, Granularity::kWeek);
  auto ny2 = slice_of(coerce_timestamp("2026-01-05").instant, Granularity::kWeek);
  EXPECT_EQ(ny.label, "2026-W01");
  EXPECT_EQ(ny2.ordinal, ny.ordinal + 1);

  auto d1 = slice_of(sun, Granularity::kDay), d2 = slice_of(mon, Granularity::kDay);
  EXPECT_EQ(d1.label, "2025-04-06");
  EXPECT_EQ(d2.ordinal, d1.ordinal + 1);

  auto m1 = slice_of(coerce_timestamp("2024-12-31").instant, Granularity::kMonth);
  auto m2 = slice_of(coerce_timestamp("2025-01-01").instant, Granularity::kMonth);
  EXPECT_EQ(m1.label, "2024-12");
  EXPECT_EQ(m2.label, "2025-01");
  EXPECT_EQ(m2.ordinal, m1.ordinal + 1);
}

TEST(TopTerms, SimpleCases) {
  std::vector<std::string> same(4, "okta auth_fail");
  EXPECT_EQ(top_terms(same), (std::vector<std::string>{"auth_fail", "okta"}));
  std::vector<std::string> freq{"alpha beta", "beta", "beta gamma"};
  EXPECT_EQ(top_terms(freq).front(), "beta");
}

TEST(TopTerms, HandCountedFixture) {
  std::vector<std::string> texts{
      "okta | auth_fail | idp-01 | mfa push denied for alice",
      "okta | auth_fail | idp-02 | mfa push denied for bob",
      "okta | auth_fail | idp-01 | invalid password entered by carol",
      "okta | auth_fail | idp-03 | sign in blocked for dave",
      "okta | auth_fail | idp-01 | mfa push denied for erin",
      "okta | auth_fail | idp-02 | invalid password entered by frank",
      "okta | auth_fail | idp-01 | sign in blocked for alice",
      "okta | auth_fail | idp-04 | mfa push denied for alice",
      "okta | login | idp-01 | password spray detected against svc_backup",
      "okta | auth_fail | idp-02 | mfa push denied for 2025",
  };
  // idp 10, okta 10, auth_fail 9, denied/mfa/push 5, alice/password 3;
  // "for", "by", "in" are stopwords and "01", "2025" are numbers.
  EXPECT_EQ(top_terms(texts), (std::vector<std::string>{"idp", "okta", "auth_fail", "denied", "mfa",
                                                        "push", "alice", "password"}));
  EXPECT_EQ(top_terms(texts, 3), (std::vector<std::string>{"idp", "okta", "auth_fail"}));
}

TEST(MatchWeeks, IdentityOnIdenticalSets) {
  std::vector<WeekCluster> prev{cluster(0, {1, 0, 0}), cluster(1, {0, 1, 0}), cluster(2, {0, 0, 1})};
  auto m = match_weeks(prev, prev, TrendParams{});
  ASSERT_EQ(m.size(), 3u);
  for (const auto& x : m) {
    EXPECT_EQ(x.curr_id, x.prev_id);
    EXPECT_NEAR(x.sim, 1.0, 1e-12);
  }
}

TEST(MatchWeeks, EquidistantGoesToLowerPrevId) {
  // cos(curr, prev_k) = 0.9 for both prev clusters.
  const float s = std::sqrt(1.0f - 0.81f / 0.5f * 0.5f);
  std::vector<WeekCluster> prev{cluster(0, {0.9f, s, 0}), cluster(1, {0.9f, -s, 0})};
  std::vector<WeekCluster> curr{cluster(0, {1, 0, 0})};
  auto m = match_weeks(prev, curr, TrendParams{});
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m[0].prev_id, 0u);
}

TEST(MatchWeeks, BelowThresholdIsEmpty) {
  const float s = std::sqrt(1.0f - 0.09f);
  std::vector<WeekCluster> prev{cluster(0, {0.3f, s, 0})};
  std::vector<WeekCluster> curr{cluster(0, {1, 0, 0})};
  EXPECT_TRUE(match_weeks(prev, curr, TrendParams{}).empty());
  EXPECT_TRUE(match_weeks({}, curr, TrendParams{}).empty());
}

TEST(MatchWeeks, GreedyTakesBestPairFirst) {
  std::vector<WeekCluster> prev{cluster(0, {1, 0.2f, 0}), cluster(1, {1, 0.6f, 0})};
  std::vector<WeekCluster> curr{cluster(0, {1, 0.5f, 0}), cluster(1, {1, 0.7f, 0})};
  auto m = match_weeks(prev, curr, TrendParams{});
  ASSERT_EQ(m.size(), 2u);
  // (curr1, prev1) is the best pair, which leaves curr0 with prev0.
  EXPECT_EQ(m[0].curr_id, 1u);
  EXPECT_EQ(m[0].prev_id, 1u);
  EXPECT_EQ(m[1].curr_id, 0u);
  EXPECT_EQ(m[1].prev_id, 0u);
}

TEST(Drift, Cases) {
  std::vector<float> a{1, 0}, b{0, 1}, c{0.75f, std::sqrt(1 - 0.5625f)};
  EXPECT_NEAR(drift_of(a, a), 0.0, 1e-12);
  EXPECT_NEAR(drift_of(a, b), 1.0, 1e-12);
  EXPECT_NEAR(drift_of(a, c), 0.25, 1e-7);
  EXPECT_EQ(label_trend(32, PriorLink{30, drift_of(a, c)}, TrendParams{}), TrendLabel::kDrift);
}

TEST(LabelTrend, TableRules) {
  TrendParams p;
  EXPECT_EQ(label_trend(40, PriorLink{20, 0.05}, p), TrendLabel::kGrowth);
  EXPECT_EQ(label_trend(40, PriorLink{100, 0.0}, p), TrendLabel::kDecay);
  EXPECT_EQ(label_trend(32, PriorLink{30, 0.25}, p), TrendLabel::kDrift);
  EXPECT_EQ(label_trend(32, std::nullopt, p), TrendLabel::kEmergence);
  EXPECT_EQ(label_trend(31, PriorLink{30, 0.1}, p), TrendLabel::kStable);
  // 1.5x but under the 30-event floor
  EXPECT_EQ(label_trend(15, PriorLink{10, 0.0}, p), TrendLabel::kStable);
  // growth wins over drift, decay wins over drift
  EXPECT_EQ(label_trend(45, PriorLink{30, 0.4}, p), TrendLabel::kGrowth);
  EXPECT_EQ(label_trend(10, PriorLink{30, 0.4}, p), TrendLabel::kDecay);
  // boundaries: exactly 1.5x grows, exactly 0.5x does not decay
  EXPECT_EQ(label_trend(30, PriorLink{20, 0.0}, p), TrendLabel::kGrowth);
  EXPECT_EQ(label_trend(15, PriorLink{30, 0.0}, p), TrendLabel::kStable);
}

TEST(TrendParams, Validation) {
  TrendParams p;
  EXPECT_NO_THROW(p.validate());
  p.growth_factor = 0.9;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = TrendParams{};
  p.decay_factor = 1.2;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = TrendParams{};
  p.match_threshold = 0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(Track, SingleWeekIsAllEmergence) {
  std::vector<Event> evs;
  for (int i = 0; i < 12; ++i) {
    Event e;
    e.event_id = "e" + std::to_string(i);
    e.ts = make_instant(2025, 4, 1, i);
    e.msg = (i % 2 ? "vpn login from new country " : "disk usage warning on ") + std::to_string(i);
    e.text_repr = build_text_repr(e);
    evs.push_back(e);
  }
  EventStore store(evs);
  auto vecs = encode_store(store, HashEmbedder());
  auto r = track(store, vecs, TrendParams{}, 42);
  ASSERT_FALSE(r.trends.empty());
  for (const auto& t : r.trends) {
    EXPECT_EQ(t.label, TrendLabel::kEmergence);
    EXPECT_FALSE(t.matched_prev_id);
  }
}

TEST(Track, EmptyWeekBreaksTheChain) {
  std::vector<Event> evs;
  for (int w : {0, 2}) {
    for (int i = 0; i < 6; ++i) {
      Event e;
      e.event_id = "w" + std::to_string(w) + "-" + std::to_string(i);
      e.ts = make_instant(2025, 4, 7 + 7 * w, i);
      e.msg = "same message every week";
      e.text_repr = build_text_repr(e);
      evs.push_back(e);
    }
  }
  EventStore store(evs);
  auto vecs = encode_store(store, HashEmbedder());
  auto r = track(store, vecs, TrendParams{}, 42);
  ASSERT_EQ(r.slice_k.size(), 2u);
  for (const auto& t : r.trends) EXPECT_EQ(t.label, TrendLabel::kEmergence);
}

TEST(Track, FixedK) {
  const auto& t = synthetic_tracked();
  TrendParams p;
  p.fixed_k = 6;
  auto r = track(t.store, t.vecs, p, 42);
  for (const auto& s : r.slice_k) EXPECT_EQ(s.k, 6u);
}

TEST(Track, SyntheticInvariants) {
  const auto& t = synthetic_tracked();
  const auto& r = t.result;
  ASSERT_EQ(r.clusters.size(), r.trends.size());
  std::map<std::string, std::size_t> week_events;
  for (const auto& e : t.store.events()) ++week_events[slice_of(e.ts, Granularity::kWeek).label];

  std::map<std::string, std::set<std::string>> seen;
  std::map<std::string, std::set<std::uint32_t>> prev_used;
  std::map<std::string, std::size_t> size_sum;
  for (std::size_t i = 0; i < r.clusters.size(); ++i) {
    const auto& c = r.clusters[i];
    const auto& tr = r.trends[i];
    EXPECT_GE(c.size, 1u);
    EXPECT_EQ(c.size, c.member_ids.size());
    EXPECT_LE(c.top_terms.size(), 8u);
    double n = 0;
    for (float x : c.centroid) n += static_cast<double>(x) * x;
    EXPECT_NEAR(std::sqrt(n), 1.0, 1e-6);
    for (const auto& id : c.member_ids) {
      EXPECT_TRUE(seen[c.week.label].insert(id).second) << "member in two clusters";
    }
    size_sum[c.week.label] += c.size;

    EXPECT_EQ(tr.label == TrendLabel::kEmergence, !tr.matched_prev_id.has_value());
    EXPECT_EQ(tr.drift_value.has_value(), tr.matched_prev_id.has_value());
    if (tr.matched_prev_id) {
      EXPECT_TRUE(prev_used[c.week.label].insert(*tr.matched_prev_id).second) << "prev reused";
      EXPECT_GE(*tr.match_sim, 0.5);
      EXPECT_GE(*tr.drift_value, -1e-12);
      EXPECT_LE(*tr.drift_value, 0.5 + 1e-12);
    }
  }
  for (const auto& [week, n] : week_events) EXPECT_EQ(size_sum[week], n) << week;
}

TEST(Track, DeterministicCsv) {
  const auto& t = synthetic_tracked();
  auto again = track(t.store, t.vecs, TrendParams{}, 42);
  auto dir = std::filesystem::temp_directory_path();
  write_clusters_csv(t.result, dir / "tml_c1.csv");
  write_clusters_csv(again, dir / "tml_c2.csv");
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  EXPECT_EQ(slurp(dir / "tml_c1.csv"), slurp(dir / "tml_c2.csv"));
  const auto csv = slurp(dir / "tml_c1.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "week,cluster_id,size,top_terms,matched_prev_id,match_sim,drift,label");

  write_trends_summary_csv(t.result, dir / "tml_s.csv");
  const auto summary = slurp(dir / "tml_s.csv");
  EXPECT_EQ(static_cast<std::size_t>(std::count(summary.begin(), summary.end(), '\n')),
            1 + 5 * t.result.slice_k.size());
}

TEST(Track, GrowthFlaggedForAuthTopicInGrowthWeeks) {
  const auto& t = synthetic_tracked();
  auto stream = synth::generate_stream(synth::GeneratorConfig::standard(42));
  std::set<std::string> auth(stream.truth[0].event_ids.begin(), stream.truth[0].event_ids.end());
  const std::set<std::string> weeks{"2025-W17", "2025-W18", "2025-W19", "2025-W20", "2025-W21"};
  bool found = false;
  for (std::size_t i = 0; i < t.result.clusters.size(); ++i) {
    const auto& c = t.result.clusters[i];
    if (!weeks.count(c.week.label) || t.result.trends[i].label != TrendLabel::kGrowth) continue;
    for (const auto& id : c.member_ids) found = found || auth.count(id);
  }
  EXPECT_TRUE(found);
}
