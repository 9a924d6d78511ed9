#include "tml/topics.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

#include "tml/kmeans.hpp"

namespace tml {

namespace {

constexpr std::array<std::string_view, 30> kStopwords = {
    "a",  "an", "and", "are", "as",   "at",  "be",   "but",  "by",   "for",
    "from", "has", "have", "in", "is", "it",  "its",  "no",   "not",  "of",
    "on", "or", "that", "the", "this", "to", "was", "were", "will", "with"};

bool is_stopword(std::string_view t) {
  return std::find(kStopwords.begin(), kStopwords.end(), t) != kStopwords.end();
}

bool all_digits(std::string_view t) {
  return std::all_of(t.begin(), t.end(), [](char c) { return c >= '0' && c <= '9'; });
}

// Word characters are alphanumerics and '_' (so "auth_fail" stays one term).
std::vector<std::string> term_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty() && !all_digits(cur) && !is_stopword(cur)) out.push_back(cur);
    cur.clear();
  };
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || c == '_' || c >= 0x80) {
      cur.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
    } else {
      flush();
    }
  }
  flush();
  return out;
}

std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

Granularity parse_granularity(std::string_view s) {
  if (s == "day") return Granularity::kDay;
  if (s == "week") return Granularity::kWeek;
  if (s == "month") return Granularity::kMonth;
  throw std::invalid_argument("granularity must be day, week or month, got '" + std::string(s) +
                              "'");
}

std::string to_string(Granularity g) {
  switch (g) {
    case Granularity::kDay: return "day";
    case Granularity::kWeek: return "week";
    case Granularity::kMonth: return "month";
  }
  return "week";
}

SliceKey slice_of(Instant t, Granularity g) {
  using namespace std::chrono;
  SliceKey k;
  k.granularity = g;
  switch (g) {
    case Granularity::kDay: {
      k.ordinal = floor<days>(t).time_since_epoch().count();
      k.label = format_date(t);
      break;
    }
    case Granularity::kWeek: {
      WeekKey w = iso_week_of(t);
      auto monday = floor<days>(week_start(w)).time_since_epoch().count();
      // 1970-01-05 (day 4) was a Monday.
      k.ordinal = (monday - 4) / 7;
      k.label = w.str();
      break;
    }
    case Granularity::kMonth: {
      year_month_day ymd{floor<days>(t)};
      k.ordinal = static_cast<int>(ymd.year()) * 12 + static_cast<int>(unsigned(ymd.month())) - 1;
      char buf[16];
      std::snprintf(buf, sizeof buf, "%04d-%02u", static_cast<int>(ymd.year()),
                    static_cast<unsigned>(ymd.month()));
      k.label = buf;
      break;
    }
  }
  return k;
}

std::string to_string(TrendLabel l) {
  switch (l) {
    case TrendLabel::kEmergence: return "emergence";
    case TrendLabel::kGrowth: return "growth";
    case TrendLabel::kDecay: return "decay";
    case TrendLabel::kDrift: return "drift";
    case TrendLabel::kStable: return "stable";
  }
  return "stable";
}

TrendLabel parse_trend_label(std::string_view s) {
  for (auto l : kAllLabels) {
    if (to_string(l) == s) return l;
  }
  throw std::invalid_argument("unknown trend label '" + std::string(s) + "'");
}

void TrendParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw std::invalid_argument(std::string(name) + " must be positive");
  };
  positive(match_threshold, "match_threshold");
  positive(growth_factor, "growth_factor");
  positive(decay_factor, "decay_factor");
  positive(drift_threshold, "drift_threshold");
  if (growth_min_events == 0) throw std::invalid_argument("growth_min_events must be positive");
  if (match_threshold > 1.0) throw std::invalid_argument("match_threshold must be <= 1");
  if (!(growth_factor > 1.0 && decay_factor < 1.0)) {
    throw std::invalid_argument("need growth_factor > 1 > decay_factor");
  }
  if (fixed_k && *fixed_k == 0) throw std::invalid_argument("k must be >= 1");
  if (k_max && *k_max < 2) throw std::invalid_argument("k_max must be >= 2");
}

std::vector<std::string> top_terms(std::span<const std::string> texts, std::size_t limit) {
  std::map<std::string, std::size_t> df;
  for (const auto& t : texts) {
    auto toks = term_tokens(t);
    std::set<std::string> uniq(toks.begin(), toks.end());
    for (const auto& u : uniq) ++df[u];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(df.begin(), df.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < ranked.size() && i < limit; ++i) out.push_back(ranked[i].first);
  return out;
}

std::vector<std::string> top_terms(const WeekCluster& cluster, const EventStore& store,
                                   std::size_t limit) {
  std::vector<std::string> texts;
  texts.reserve(cluster.member_ids.size());
  for (const auto& id : cluster.member_ids) {
    auto i = store.find(id);
    if (i != EventStore::npos) texts.push_back(store[i].text_repr);
  }
  return top_terms(texts, limit);
}

std::vector<ClusterMatch> match_weeks(std::span<const WeekCluster> prev,
                                      std::span<const WeekCluster> curr, const TrendParams& p) {
  std::vector<ClusterMatch> candidates;
  for (const auto& c : curr) {
    for (const auto& q : prev) {
      double sim = cosine(c.centroid, q.centroid);
      if (sim >= p.match_threshold) candidates.push_back({c.cluster_id, q.cluster_id, sim});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const ClusterMatch& a, const ClusterMatch& b) {
    if (a.sim != b.sim) return a.sim > b.sim;
    if (a.curr_id != b.curr_id) return a.curr_id < b.curr_id;
    return a.prev_id < b.prev_id;
  });
  std::set<std::uint32_t> used_curr, used_prev;
  std::vector<ClusterMatch> out;
  for (const auto& m : candidates) {
    if (used_curr.count(m.curr_id) || used_prev.count(m.prev_id)) continue;
    used_curr.insert(m.curr_id);
    used_prev.insert(m.prev_id);
    out.push_back(m);
  }
  return out;
}

double drift_of(std::span<const float> prev_centroid, std::span<const float> curr_centroid) {
  return 1.0 - cosine(prev_centroid, curr_centroid);
}

TrendLabel label_trend(std::size_t size, const std::optional<PriorLink>& prior,
                       const TrendParams& p) {
  if (!prior) return TrendLabel::kEmergence;
  const double s = static_cast<double>(size);
  const double prev = static_cast<double>(prior->prev_size);
  if (s >= p.growth_factor * prev && size >= p.growth_min_events) return TrendLabel::kGrowth;
  if (s < p.decay_factor * prev) return TrendLabel::kDecay;
  if (prior->drift >= p.drift_threshold) return TrendLabel::kDrift;
  return TrendLabel::kStable;
}

TrackResult track(const EventStore& store, const VectorStore& vecs, const TrendParams& p,
                  std::uint64_t seed, Granularity g) {
  p.validate();
  check_alignment(store, vecs);
  const std::size_t dim = vecs.dim();

  // Bucket event indices by slice; store order is already chronological.
  std::vector<SliceKey> slices;
  std::vector<std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < store.size(); ++i) {
    SliceKey k = slice_of(store[i].ts, g);
    if (slices.empty() || !(slices.back() == k)) {
      slices.push_back(k);
      members.emplace_back();
    }
    members.back().push_back(i);
  }

  std::vector<std::vector<WeekCluster>> per_slice(slices.size());
  std::vector<std::size_t> chosen_k(slices.size(), 0);
  const auto ns = static_cast<std::ptrdiff_t>(slices.size());

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t si = 0; si < ns; ++si) {
    const auto s = static_cast<std::size_t>(si);
    const auto& idx = members[s];
    const std::size_t n = idx.size();
    std::vector<float> pts(n * dim);
    for (std::size_t r = 0; r < n; ++r) {
      auto row = vecs.row(idx[r]);
      std::copy(row.begin(), row.end(), pts.begin() + static_cast<std::ptrdiff_t>(r * dim));
    }
    PointSet ps{pts, dim};

    std::size_t k = 1;
    if (p.fixed_k) {
      k = std::min(*p.fixed_k, n);
    } else {
      std::size_t kmax = p.k_max ? std::min(*p.k_max, n - (n > 1 ? 1 : 0)) : default_k_max(n);
      k = select_k(ps, std::max<std::size_t>(kmax, 1), seed).k;
    }
    chosen_k[s] = k;
    KMeansResult km = kmeans(ps, k, seed);

    // Renumber clusters: larger first, then by earliest member.
    std::vector<std::vector<std::size_t>> groups(k);
    for (std::size_t r = 0; r < n; ++r) groups[km.labels[r]].push_back(r);
    std::vector<std::size_t> order(k);
    for (std::size_t c = 0; c < k; ++c) order[c] = c;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (groups[a].size() != groups[b].size()) return groups[a].size() > groups[b].size();
      return groups[a].front() < groups[b].front();
    });

    auto& out = per_slice[s];
    for (std::size_t c : order) {
      if (groups[c].empty()) continue;
      WeekCluster wc;
      wc.week = slices[s];
      wc.cluster_id = static_cast<std::uint32_t>(out.size());
      wc.centroid.assign(km.centroids.begin() + static_cast<std::ptrdiff_t>(c * dim),
                         km.centroids.begin() + static_cast<std::ptrdiff_t>((c + 1) * dim));
      std::vector<std::string> texts;
      for (std::size_t r : groups[c]) {
        wc.member_ids.push_back(store[idx[r]].event_id);
        texts.push_back(store[idx[r]].text_repr);
      }
      wc.size = wc.member_ids.size();
      wc.top_terms = top_terms(texts);
      out.push_back(std::move(wc));
    }
  }

  TrackResult res;
  for (std::size_t s = 0; s < slices.size(); ++s) {
    res.slice_k.push_back({slices[s], members[s].size(), chosen_k[s]});
    const bool adjacent = s > 0 && slices[s].ordinal == slices[s - 1].ordinal + 1;
    std::vector<ClusterMatch> matches;
    if (adjacent) matches = match_weeks(per_slice[s - 1], per_slice[s], p);

    for (const auto& wc : per_slice[s]) {
      TrendRecord tr;
      tr.week = wc.week;
      tr.cluster_id = wc.cluster_id;
      tr.size = wc.size;
      std::optional<PriorLink> prior;
      auto m = std::find_if(matches.begin(), matches.end(),
                            [&](const ClusterMatch& x) { return x.curr_id == wc.cluster_id; });
      if (m != matches.end()) {
        const auto& prev = per_slice[s - 1][m->prev_id];
        tr.matched_prev_id = m->prev_id;
        tr.match_sim = m->sim;
        tr.drift_value = drift_of(prev.centroid, wc.centroid);
        tr.prev_size = prev.size;
        prior = PriorLink{prev.size, *tr.drift_value};
      }
      tr.label = label_trend(wc.size, prior, p);
      res.trends.push_back(std::move(tr));
    }
  }
  for (auto& sc : per_slice) {
    std::move(sc.begin(), sc.end(), std::back_inserter(res.clusters));
  }
  return res;
}

void write_clusters_csv(const TrackResult& r, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "week,cluster_id,size,top_terms,matched_prev_id,match_sim,drift,label\n";
  for (std::size_t i = 0; i < r.clusters.size(); ++i) {
    const auto& c = r.clusters[i];
    const auto& t = r.trends[i];
    std::string terms;
    for (const auto& term : c.top_terms) {
      if (!terms.empty()) terms += ';';
      terms += term;
    }
    out << c.week.label << ',' << c.cluster_id << ',' << c.size << ',' << csv_field(terms) << ','
        << (t.matched_prev_id ? std::to_string(*t.matched_prev_id) : "") << ','
        << (t.match_sim ? fmt6(*t.match_sim) : "") << ','
        << (t.drift_value ? fmt6(*t.drift_value) : "") << ',' << to_string(t.label) << '\n';
  }
}

void write_trends_summary_csv(const TrackResult& r, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "week,label,count\n";
  std::size_t i = 0;
  while (i < r.trends.size()) {
    const auto& week = r.trends[i].week;
    std::map<TrendLabel, std::size_t> counts;
    while (i < r.trends.size() && r.trends[i].week == week) ++counts[r.trends[i++].label];
    for (auto l : kAllLabels) out << week.label << ',' << to_string(l) << ',' << counts[l] << '\n';
  }
}

}  // namespace tml
