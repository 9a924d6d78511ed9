#include <gtest/gtest.h>

#include <random>

#include "tml/metrics.hpp"

using namespace tml;

namespace {

constexpr auto G = TrendLabel::kGrowth;
constexpr auto D = TrendLabel::kDrift;
constexpr auto C = TrendLabel::kDecay;
constexpr auto S = TrendLabel::kStable;
constexpr auto E = TrendLabel::kEmergence;

RankedHit hit(const std::string& id, Instant ts) {
  RankedHit h;
  h.event_id = id;
  h.ts = ts;
  return h;
}

Event ev(const std::string& id, Instant ts) {
  Event e;
  e.event_id = id;
  e.ts = ts;
  e.msg = id;
  e.text_repr = build_text_repr(e);
  return e;
}

// Confusion-matrix formulation, used as a second route to macro F1.
double macro_f1_oracle(const std::vector<LabelPair>& pairs) {
  double total = 0;
  for (auto c : {G, D, C}) {
    double tp = 0, pred = 0, truth = 0;
    for (const auto& p : pairs) {
      bool pc = p.predicted && *p.predicted == c;
      pred += pc;
      truth += p.truth == c;
      tp += pc && p.truth == c;
    }
    double prec = pred ? tp / pred : 0, rec = truth ? tp / truth : 0;
    total += prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0;
  }
  return total / 3;
}

}  // namespace

TEST(MacroF1, HandConfusion) {
  std::vector<LabelPair> pairs{{G, G}, {D, S}, {S, C}};
  auto r = macro_f1(pairs);
  EXPECT_NEAR(r.macro_f1, 1.0 / 3.0, 1e-9);
  EXPECT_EQ(r.per_class[G].tp, 1u);
  EXPECT_EQ(r.per_class[D].fn, 1u);
  EXPECT_EQ(r.per_class[C].fp, 1u);
  EXPECT_EQ(r.per_class[C].f1, 0.0);
}

TEST(MacroF1, IdenticalIsOneAndAllStableIsZero) {
  std::vector<LabelPair> same{{G, G}, {D, D}, {C, C}, {S, S}, {E, E}};
  EXPECT_DOUBLE_EQ(macro_f1(same).macro_f1, 1.0);
  std::vector<LabelPair> stable{{G, S}, {D, S}, {C, S}};
  EXPECT_DOUBLE_EQ(macro_f1(stable).macro_f1, 0.0);
  std::vector<LabelPair> unaligned{{G, std::nullopt}, {D, D}, {C, C}};
  EXPECT_NEAR(macro_f1(unaligned).macro_f1, 2.0 / 3.0, 1e-12);
}

TEST(MacroF1, AgreesWithConfusionMatrixRoute) {
  std::mt19937_64 rng(11);
  const TrendLabel all[] = {G, D, C, S, E};
  for (int t = 0; t < 300; ++t) {
    std::vector<LabelPair> pairs;
    const std::size_t n = 1 + rng() % 30;
    for (std::size_t i = 0; i < n; ++i) {
      std::optional<TrendLabel> p;
      if (rng() % 6) p = all[rng() % 5];
      pairs.push_back({all[rng() % 5], p});
    }
    EXPECT_NEAR(macro_f1(pairs).macro_f1, macro_f1_oracle(pairs), 1e-12);
  }
}

TEST(TrendF1, AlignsByLargestOverlap) {
  TrackResult r;
  SliceKey w{Granularity::kWeek, 10, "2025-W15"};
  r.clusters = {{w, 0, {"a", "b", "x"}, {}, 3, {}}, {w, 1, {"c", "d", "e"}, {}, 3, {}}};
  TrendRecord t0, t1;
  t0.week = t1.week = w;
  t0.cluster_id = 0;
  t0.label = G;
  t1.cluster_id = 1;
  t1.label = C;
  r.trends = {t0, t1};
  std::vector<TopicLabels> truth{{"auth", {"a", "b", "c"}, {{"2025-W15", G}}},
                                 {"vuln", {"d", "e", "x"}, {{"2025-W15", C}}}};
  std::vector<AlignedLabel> al;
  auto f = trend_macro_f1(r, truth, &al);
  ASSERT_EQ(al.size(), 2u);
  EXPECT_EQ(*al[0].cluster_id, 0u);
  EXPECT_EQ(al[0].overlap, 2u);
  EXPECT_EQ(*al[1].cluster_id, 1u);
  EXPECT_NEAR(f.macro_f1, 2.0 / 3.0, 1e-12);
  EXPECT_TRUE(f.diagnostics.empty());
}

TEST(TrendF1, NoOverlapScoresZeroWithDiagnostic) {
  TrackResult r;
  SliceKey w{Granularity::kWeek, 10, "2025-W15"};
  r.clusters = {{w, 0, {"q"}, {}, 1, {}}};
  r.trends = {TrendRecord{w, 0, G}};
  std::vector<TopicLabels> truth{{"auth", {"a"}, {{"2025-W15", G}}}};
  auto f = trend_macro_f1(r, truth);
  EXPECT_EQ(f.macro_f1, 0.0);
  ASSERT_EQ(f.diagnostics.size(), 1u);
}

TEST(AsOfCorrectness, Fractions) {
  Instant cut = make_instant(2025, 5, 1);
  std::vector<RankedHit> ok{hit("a", cut), hit("b", cut - std::chrono::days{3})};
  EXPECT_EQ(asof_correctness(ok, cut), 1.0);
  std::vector<RankedHit> half{hit("a", cut), hit("b", cut + std::chrono::seconds{1})};
  EXPECT_EQ(asof_correctness(half, cut), 0.5);
  Diagnostics d;
  EXPECT_EQ(asof_correctness({}, cut, &d), 1.0);
  EXPECT_EQ(d.warnings.size(), 1u);
}

TEST(Latest, SetAndStrictVariants) {
  Instant t = make_instant(2025, 5, 1);
  EventStore s({ev("old", t - std::chrono::days{5}), ev("new-b", t), ev("new-a", t),
                ev("other", t + std::chrono::days{1})});
  std::set<std::string> rel{"old", "new-a", "new-b"};
  std::vector<RankedHit> hits{hit("other", t + std::chrono::days{1}), hit("old", t - std::chrono::days{5}),
                              hit("new-b", t)};
  EXPECT_EQ(latest_set_at_k(hits, s, rel, 3), 1);
  EXPECT_EQ(latest_set_at_k(hits, s, rel, 2), 0);
  // strict: only new-a (smallest id at the newest ts) counts
  EXPECT_EQ(latest_at_k(hits, s, rel, 3), 0);
  hits.push_back(hit("new-a", t));
  EXPECT_EQ(latest_at_k(hits, s, rel, 4), 1);
  EXPECT_EQ(latest_at_k(hits, s, rel, 3), 0);
  EXPECT_THROW(latest_set_at_k(hits, s, {"missing"}, 10), std::invalid_argument);
}

TEST(Latest, AgreesWithBruteForceOn20Events) {
  std::mt19937_64 rng(5);
  const Instant t0 = make_instant(2025, 4, 1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Event> evs;
    for (int i = 0; i < 20; ++i) {
      char id[8];
      std::snprintf(id, sizeof id, "e%02d", i);
      evs.push_back(ev(id, t0 + std::chrono::days{static_cast<long>(rng() % 6)}));
    }
    EventStore s(evs);
    std::set<std::string> rel;
    for (const auto& e : evs)
      if (rng() % 3 == 0) rel.insert(e.event_id);
    if (rel.empty()) rel.insert("e00");
    std::vector<RankedHit> hits;
    std::vector<Event> shuffled = evs;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    for (const auto& e : shuffled) hits.push_back(hit(e.event_id, e.ts));
    const std::size_t k = 1 + rng() % 10;

    Instant newest = t0 - std::chrono::days{1};
    for (const auto& e : evs)
      if (rel.count(e.event_id) && e.ts > newest) newest = e.ts;
    std::string strict;
    for (const auto& e : evs)
      if (rel.count(e.event_id) && e.ts == newest && (strict.empty() || e.event_id < strict))
        strict = e.event_id;
    int want_set = 0, want_strict = 0;
    for (std::size_t i = 0; i < k; ++i) {
      if (rel.count(hits[i].event_id) && hits[i].ts == newest) want_set = 1;
      if (hits[i].event_id == strict) want_strict = 1;
    }
    ASSERT_EQ(latest_set_at_k(hits, s, rel, k), want_set);
    ASSERT_EQ(latest_at_k(hits, s, rel, k), want_strict);
    ASSERT_LE(want_strict, want_set);
  }
}
