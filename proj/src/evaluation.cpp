#include "tml/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tml {

namespace fs = std::filesystem;

namespace {

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& ex) {
    throw std::runtime_error(p.string() + ": " + ex.what());
  }
}

std::string fmt(double v, int digits) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::vector<float> query_vector(const QuerySpec& q, const Embedder& emb, std::size_t dim) {
  std::vector<float> v = q.vector.empty() ? emb.embed(q.text) : q.vector;
  if (v.size() != dim) {
    throw std::invalid_argument("query '" + q.text + "' has dim " + std::to_string(v.size()) +
                                ", store dim is " + std::to_string(dim));
  }
  return v;
}

Instant resolve_now(const EvalConfig& cfg, const EventStore& store) {
  if (cfg.now) return *cfg.now;
  return store.empty() ? Instant{} : store.events().back().ts;
}

const TopicLabels& topic_of(const GroundTruth& truth, const QuerySpec& q) {
  const TopicLabels* t = truth.find(q.topic);
  if (!t) throw std::invalid_argument("query topic '" + q.topic + "' not in ground truth");
  return *t;
}

}  // namespace

EvalConfig EvalConfig::from_json(const nlohmann::json& j, const fs::path& base_dir) {
  EvalConfig c;
  fs::path truth = j.value("truth", std::string("ground_truth.json"));
  c.truth_path = truth.is_absolute() ? truth : base_dir / truth;
  if (j.contains("now") && !j["now"].is_null()) {
    c.now = coerce_timestamp(j["now"].get<std::string>()).instant;
  }
  c.top_k = j.value("top_k", c.top_k);
  c.alpha = j.value("alpha", c.alpha);
  c.half_life_days = j.value("half_life_days", c.half_life_days);
  if (j.contains("alphas")) c.alphas = j["alphas"].get<std::vector<double>>();
  for (const auto& qj : j.at("queries")) {
    QuerySpec q;
    q.text = qj.at("text").get<std::string>();
    auto type = qj.at("type").get<std::string>();
    if (type == "freshness") {
      q.type = QueryType::kFreshness;
    } else if (type == "as_of") {
      q.type = QueryType::kAsOf;
    } else {
      throw std::invalid_argument("query type must be freshness or as_of, got '" + type + "'");
    }
    q.topic = qj.value("topic", std::string{});
    if (qj.contains("cutoff") && !qj["cutoff"].is_null()) {
      q.cutoff = coerce_timestamp(qj["cutoff"].get<std::string>()).instant;
    }
    if (q.type == QueryType::kAsOf && !q.cutoff) {
      throw std::invalid_argument("as_of query '" + q.text + "' needs a cutoff");
    }
    if (qj.contains("vector")) q.vector = qj["vector"].get<std::vector<float>>();
    c.queries.push_back(std::move(q));
  }
  return c;
}

EvalConfig EvalConfig::load(const fs::path& path) {
  return from_json(read_json(path), path.parent_path());
}

GroundTruth GroundTruth::from_json(const nlohmann::json& j) {
  GroundTruth g;
  for (const auto& tj : j.at("topics")) {
    TopicLabels t;
    t.name = tj.at("name").get<std::string>();
    for (const auto& id : tj.at("event_ids")) t.event_ids.insert(id.get<std::string>());
    if (tj.contains("labels")) {
      for (const auto& [w, l] : tj["labels"].items()) {
        t.labels[w] = parse_trend_label(l.get<std::string>());
      }
    }
    g.topics.push_back(std::move(t));
  }
  return g;
}

GroundTruth GroundTruth::load(const fs::path& path) { return from_json(read_json(path)); }

const TopicLabels* GroundTruth::find(const std::string& topic) const {
  for (const auto& t : topics) {
    if (t.name == topic) return &t;
  }
  return nullptr;
}

std::map<double, double> sensitivity_sweep(const std::vector<double>& alphas,
                                           const EventStore& store, const VectorStore& vecs,
                                           const EvalConfig& cfg, const GroundTruth& truth,
                                           const Embedder& emb) {
  std::vector<const QuerySpec*> fresh;
  for (const auto& q : cfg.queries) {
    if (q.type == QueryType::kFreshness) fresh.push_back(&q);
  }
  std::vector<std::vector<float>> qvecs;
  for (const auto* q : fresh) qvecs.push_back(query_vector(*q, emb, vecs.dim()));

  const Instant now = resolve_now(cfg, store);
  const std::size_t na = alphas.size(), nq = fresh.size();
  std::vector<int> success(na * nq, 0);
  std::vector<std::string> errors(na * nq);
  const auto total = static_cast<std::ptrdiff_t>(na * nq);

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t idx = 0; idx < total; ++idx) {
    const auto u = static_cast<std::size_t>(idx);
    const std::size_t ai = u / nq, qi = u % nq;
    try {
      RetrievalParams p{alphas[ai], cfg.half_life_days, cfg.top_k, now};
      auto hits = rank(qvecs[qi], store, vecs, p, RankMode::kFused);
      success[u] = latest_set_at_k(hits, store, topic_of(truth, *fresh[qi]).event_ids, cfg.top_k);
    } catch (const std::exception& ex) {
      errors[u] = ex.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw std::runtime_error("sensitivity sweep: " + e);
  }

  std::map<double, double> out;
  for (std::size_t ai = 0; ai < na; ++ai) {
    double sum = 0.0;
    for (std::size_t qi = 0; qi < nq; ++qi) sum += success[ai * nq + qi];
    out[alphas[ai]] = nq == 0 ? 0.0 : sum / static_cast<double>(nq);
  }
  return out;
}

EvalReport run_eval(const EventStore& store, const VectorStore& vecs, const TrackResult& tracked,
                    const EvalConfig& cfg, const GroundTruth& truth, const Embedder& emb) {
  EvalReport r;
  r.trend = trend_macro_f1(tracked, truth.topics, &r.aligned);
  r.trend_macro_f1 = r.trend.macro_f1;
  r.warnings = r.trend.diagnostics;
  r.per_week_k = tracked.slice_k;

  const Instant now = resolve_now(cfg, store);
  std::size_t n_fresh = 0, n_asof = 0;
  double ls_cos = 0, ls_fused = 0, l_cos = 0, l_fused = 0, asof_sum = 0;

  for (const auto& q : cfg.queries) {
    QueryOutcome o;
    o.text = q.text;
    o.type = q.type;
    o.topic = q.topic;
    o.cutoff = q.cutoff;
    const auto qv = query_vector(q, emb, vecs.dim());
    Diagnostics diag;

    if (q.type == QueryType::kFreshness) {
      const auto& rel = topic_of(truth, q).event_ids;
      RetrievalParams p{cfg.alpha, cfg.half_life_days, cfg.top_k, now};
      auto cos_hits = rank(qv, store, vecs, p, RankMode::kCosineOnly, std::nullopt, &diag);
      o.fused_hits = rank(qv, store, vecs, p, RankMode::kFused, std::nullopt, &diag);
      o.latest_set_cosine = latest_set_at_k(cos_hits, store, rel, cfg.top_k);
      o.latest_set_fused = latest_set_at_k(o.fused_hits, store, rel, cfg.top_k);
      o.latest_cosine = latest_at_k(cos_hits, store, rel, cfg.top_k);
      o.latest_fused = latest_at_k(o.fused_hits, store, rel, cfg.top_k);
      ls_cos += o.latest_set_cosine;
      ls_fused += o.latest_set_fused;
      l_cos += o.latest_cosine;
      l_fused += o.latest_fused;
      ++n_fresh;
    } else {
      RetrievalParams p{cfg.alpha, cfg.half_life_days, cfg.top_k, *q.cutoff};
      o.fused_hits = rank(qv, store, vecs, p, RankMode::kFused, q.cutoff, &diag);
      o.asof_correctness = asof_correctness(o.fused_hits, *q.cutoff, &diag);
      o.asof_violations = static_cast<std::size_t>(
          std::count_if(o.fused_hits.begin(), o.fused_hits.end(),
                        [&](const RankedHit& h) { return h.ts > *q.cutoff; }));
      asof_sum += o.asof_correctness;
      r.asof_violations += o.asof_violations;
      ++n_asof;
    }
    for (auto& w : diag.warnings) r.warnings.push_back("query '" + q.text + "': " + w);
    r.queries.push_back(std::move(o));
  }

  auto mean = [](double s, std::size_t n) { return n == 0 ? 0.0 : s / static_cast<double>(n); };
  r.latest_set_at_10 = {{"cosine", mean(ls_cos, n_fresh)}, {"fused", mean(ls_fused, n_fresh)}};
  r.latest_at_10 = {{"cosine", mean(l_cos, n_fresh)}, {"fused", mean(l_fused, n_fresh)}};
  if (n_asof == 0) {
    r.warnings.push_back("no as_of queries; as-of correctness reported as 1.0");
    r.asof_correctness = 1.0;
  } else {
    r.asof_correctness = asof_sum / static_cast<double>(n_asof);
  }
  r.sensitivity = sensitivity_sweep(cfg.alphas, store, vecs, cfg, truth, emb);
  return r;
}

nlohmann::ordered_json EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["trend_macro_f1"] = trend_macro_f1;
  nlohmann::ordered_json pc = nlohmann::ordered_json::object();
  for (const auto& [label, s] : trend.per_class) {
    pc[to_string(label)] = {{"tp", s.tp},           {"fp", s.fp},         {"fn", s.fn},
                            {"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
  }
  j["trend_per_class"] = pc;
  j["asof_correctness"] = asof_correctness;
  j["asof_violations"] = asof_violations;
  j["latest_set_at_10"] = latest_set_at_10;
  j["latest_at_10"] = latest_at_10;
  nlohmann::ordered_json sens = nlohmann::ordered_json::array();
  for (const auto& [a, acc] : sensitivity) sens.push_back({{"alpha", a}, {"latest_set_at_10", acc}});
  j["sensitivity"] = sens;
  nlohmann::ordered_json k = nlohmann::ordered_json::object();
  for (const auto& s : per_week_k) k[s.slice.label] = s.k;
  j["per_week_k"] = k;
  nlohmann::ordered_json al = nlohmann::ordered_json::array();
  for (const auto& a : aligned) {
    al.push_back({{"week", a.slice},
                  {"topic", a.topic},
                  {"truth", to_string(a.truth)},
                  {"predicted", a.predicted ? to_string(*a.predicted) : "none"},
                  {"cluster_id", a.cluster_id ? nlohmann::ordered_json(*a.cluster_id) : nullptr},
                  {"overlap", a.overlap}});
  }
  j["trend_alignment"] = al;
  nlohmann::ordered_json qs = nlohmann::ordered_json::array();
  for (const auto& q : queries) {
    nlohmann::ordered_json qj;
    qj["text"] = q.text;
    qj["type"] = q.type == QueryType::kFreshness ? "freshness" : "as_of";
    qj["topic"] = q.topic;
    if (q.type == QueryType::kFreshness) {
      qj["latest_set_cosine"] = q.latest_set_cosine;
      qj["latest_set_fused"] = q.latest_set_fused;
      qj["latest_cosine"] = q.latest_cosine;
      qj["latest_fused"] = q.latest_fused;
    } else {
      qj["cutoff"] = format_iso(*q.cutoff);
      qj["asof_correctness"] = q.asof_correctness;
      qj["violations"] = q.asof_violations;
    }
    qs.push_back(std::move(qj));
  }
  j["queries"] = qs;
  j["warnings"] = warnings;
  return j;
}

std::string EvalReport::to_markdown() const {
  std::ostringstream md;
  md << "| Dataset | Metric | Baseline | Temporal Layer |\n";
  md << "|---|---|---|---|\n";
  md << "| Synthetic | Trend F1 | -- | " << fmt(trend_macro_f1, 2) << " |\n";
  md << "| Synthetic | As-of Correctness | -- | " << fmt(asof_correctness, 2) << " |\n";
  md << "| Synthetic | Latest@10 Accuracy | " << fmt(latest_at_10.at("cosine"), 2) << " | "
     << fmt(latest_at_10.at("fused"), 2) << " |\n";
  md << "| Synthetic | Latest-Set@10 | " << fmt(latest_set_at_10.at("cosine"), 2) << " | "
     << fmt(latest_set_at_10.at("fused"), 2) << " |\n";
  md << "\n| alpha | Latest-Set@10 |\n|---|---|\n";
  for (const auto& [a, acc] : sensitivity) md << "| " << fmt(a, 2) << " | " << fmt(acc, 3) << " |\n";
  md << "\n| week | events | k |\n|---|---|---|\n";
  for (const auto& s : per_week_k) md << "| " << s.slice.label << " | " << s.n_events << " | " << s.k << " |\n";
  return md.str();
}

}  // namespace tml
