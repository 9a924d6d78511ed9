#include "tml/cli.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "tml/digest.hpp"
#include "tml/evaluation.hpp"
#include "tml/ingest.hpp"
#include "tml/kernels.hpp"
#include "tml/retrieval.hpp"
#include "tml/synth.hpp"

namespace tml::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

MissingArtifact::MissingArtifact(const fs::path& p, const std::string& producer)
    : std::runtime_error("missing artifact " + p.string() + " (run `tml " + producer +
                         "` first)") {}

std::string Workspace::rel(const fs::path& p) const {
  auto r = p.lexically_proximate(root);
  if (!r.empty() && *r.begin() != "..") return r.generic_string();
  return p.generic_string();
}

WorkspaceLock::WorkspaceLock(const fs::path& root) {
  fs::create_directories(root);
  const auto path = root / ".tml.lock";
  fd_ = ::open(path.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
  if (fd_ < 0) throw std::runtime_error("cannot open lock file " + path.string());
  if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(fd_);
    fd_ = -1;
    throw std::runtime_error("workspace " + root.string() + " is in use by another tml run");
  }
}

WorkspaceLock::~WorkspaceLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

namespace {

void require(const fs::path& p, const std::string& producer) {
  if (!fs::exists(p)) throw MissingArtifact(p, producer);
}

void write_text(const fs::path& p, const std::string& body) {
  fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << body;
  if (!f) throw std::runtime_error("write failed: " + p.string());
}

nlohmann::json read_json_file(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& ex) {
    throw std::runtime_error(p.string() + ": " + ex.what());
  }
}

ojson digests(const Workspace& ws, const std::vector<fs::path>& files) {
  ojson d = ojson::object();
  for (const auto& f : files) d[ws.rel(f)] = sha256_file(f);
  return d;
}

ojson write_run_manifest(const Workspace& ws, const std::string& stage, ojson params,
                         const std::vector<fs::path>& inputs,
                         const std::vector<fs::path>& artifacts) {
  ojson m;
  m["tool"] = "tml";
  m["version"] = kVersion;
  m["stage"] = stage;
  m["params"] = std::move(params);
  m["inputs"] = digests(ws, inputs);
  m["artifacts"] = digests(ws, artifacts);
  write_text(ws.runs() / (stage + ".json"), m.dump(2) + "\n");
  return m;
}

EventStore load_events(const Workspace& ws) {
  require(ws.events(), "ingest");
  return ingest({ws.events()});
}

VectorStore load_vectors(const Workspace& ws, const EventStore& store) {
  require(ws.vectors(), "embed");
  auto vecs = read_vector_file(ws.vectors(), std::nullopt, store.size());
  check_alignment(store, vecs);
  return vecs;
}

std::string embedder_kind(const Workspace& ws) {
  if (!fs::exists(ws.embed_manifest())) return "hash";
  return read_json_file(ws.embed_manifest()).value("embedder", std::string("hash"));
}

/// Stands in for an external model: every query must bring its own vector.
class VectorOnlyEmbedder final : public Embedder {
 public:
  explicit VectorOnlyEmbedder(std::size_t dim) : dim_(dim) {}
  std::string name() const override { return "external"; }
  std::size_t dim() const override { return dim_; }
  std::vector<float> embed(std::string_view text) const override {
    throw EmbedError("vectors were produced by an external embedder; query '" +
                     std::string(text) + "' needs a precomputed vector");
  }

 private:
  std::size_t dim_;
};

std::vector<float> parse_query_vector(const std::string& arg) {
  nlohmann::json j;
  const auto first = arg.find_first_not_of(" \t\n");
  if (first != std::string::npos && arg[first] == '[') {
    j = nlohmann::json::parse(arg, nullptr, false);
    if (j.is_discarded()) throw UsageError("--query-vector is not a JSON array");
  } else {
    if (!fs::exists(arg)) throw UsageError("--query-vector file not found: " + arg);
    j = read_json_file(arg);
  }
  if (!j.is_array()) throw UsageError("--query-vector must be a JSON array of numbers");
  std::vector<float> v;
  for (const auto& x : j) {
    if (!x.is_number()) throw UsageError("--query-vector must be a JSON array of numbers");
    v.push_back(x.get<float>());
  }
  return v;
}

Instant parse_instant_flag(const std::string& s, const char* flag) {
  try {
    return coerce_timestamp(s).instant;
  } catch (const TimestampError& ex) {
    throw UsageError(std::string(flag) + ": " + ex.what());
  }
}

}  // namespace

Instant parse_as_of(const std::string& s) {
  Instant t = parse_instant_flag(s, "--as-of");
  const bool date_only = s.size() == 10 && s[4] == '-' && s[7] == '-';
  if (date_only) t += std::chrono::days{1} - std::chrono::microseconds{1};
  return t;
}

TrendParams TrendOptions::params() const {
  TrendParams p;
  p.match_threshold = match_threshold;
  p.growth_factor = growth_factor;
  p.growth_min_events = growth_min_events;
  p.decay_factor = decay_factor;
  p.drift_threshold = drift_threshold;
  if (k != "auto") {
    std::size_t pos = 0;
    long long v = -1;
    try {
      v = std::stoll(k, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != k.size() || v < 1) throw UsageError("--k must be a positive integer or 'auto'");
    p.fixed_k = static_cast<std::size_t>(v);
  }
  try {
    p.validate();
  } catch (const std::invalid_argument& ex) {
    throw UsageError(ex.what());
  }
  return p;
}

// ---- stages ---------------------------------------------------------------

ojson run_gen(const Workspace& ws, const GenOptions& o, std::ostream& log) {
  const fs::path out = o.out.empty() ? ws.logs() : fs::path(o.out);
  auto stream = synth::generate_stream(synth::GeneratorConfig::standard(o.seed));
  synth::write_stream(stream, o.seed, out);

  std::vector<fs::path> files;
  std::size_t events = 0;
  for (const auto& [name, body] : stream.files) {
    files.push_back(out / name);
    events += static_cast<std::size_t>(std::count(body.begin(), body.end(), '\n'));
  }
  files.push_back(out / "ground_truth.json");
  files.push_back(out / "eval.json");
  log << "gen: " << events << " events in " << stream.files.size() << " files -> "
      << ws.rel(out) << "\n";
  return write_run_manifest(ws, "gen", {{"seed", o.seed}, {"out", ws.rel(out)}}, {}, files);
}

ojson run_ingest(const Workspace& ws, const IngestOptions& o, std::ostream& log) {
  std::vector<fs::path> paths;
  std::vector<std::string> inputs = o.inputs;
  if (inputs.empty()) {
    require(ws.logs(), "gen");
    inputs.push_back(ws.logs().string());
  }
  for (const auto& in : inputs) {
    fs::path p(in);
    if (!fs::exists(p)) throw MissingArtifact(p, "gen");
    if (fs::is_directory(p)) {
      auto found = list_log_files(p);
      paths.insert(paths.end(), found.begin(), found.end());
    } else {
      paths.push_back(p);
    }
  }
  if (paths.empty()) throw MissingArtifact(inputs.front() + "/*.jsonl", "gen");

  std::optional<CsvMapping> mapping;
  if (!o.csv_mapping.empty()) {
    require(o.csv_mapping, "ingest --csv-mapping <file>");
    mapping = CsvMapping::load(o.csv_mapping);
  }
  EventStore store = ingest(paths, mapping);
  fs::create_directories(ws.data());
  write_events_jsonl(store, ws.events());
  write_text(ws.ingest_manifest(), store.manifest().to_json().dump(2) + "\n");

  const auto& m = store.manifest();
  log << "ingest: " << m.total_events << " events (" << m.duplicates << " duplicates, "
      << m.errors.size() << " rejected records) -> " << ws.rel(ws.events()) << "\n";
  for (const auto& e : m.errors) log << "  " << e.file << ":" << e.line << ": " << e.reason << "\n";

  ojson params = {{"csv_mapping", o.csv_mapping}};
  if (!o.csv_mapping.empty()) paths.push_back(o.csv_mapping);
  return write_run_manifest(ws, "ingest", params, paths, {ws.events(), ws.ingest_manifest()});
}

ojson run_embed(const Workspace& ws, const EmbedOptions& o, std::ostream& log) {
  const bool external = o.embedder.rfind("external:", 0) == 0;
  if (!external && o.embedder != "hash") {
    throw UsageError("--embedder must be 'hash' or 'external:<path>'");
  }
  if (o.dim == 0) throw UsageError("--dim must be positive");
  EventStore store = load_events(ws);
  std::vector<fs::path> inputs{ws.events()};
  VectorStore vecs;
  std::string kind;

  if (!external) {
    kind = "hash";
    vecs = encode_store(store, HashEmbedder(o.dim));
  } else {
    kind = "external";
    const fs::path src = o.embedder.substr(9);
    if (src.empty()) throw UsageError("--embedder external:<path> needs a path");
    require(src, "your external embedder");
    vecs = read_vector_file(src, o.dim_given ? std::optional<std::size_t>(o.dim) : std::nullopt,
                            store.size());
    check_alignment(store, vecs);
    inputs.push_back(src);
  }

  fs::create_directories(ws.data());
  write_vector_file(ws.vectors(), vecs);
  ojson em = {{"embedder", kind}, {"dim", vecs.dim()}, {"count", vecs.size()},
              {"storage", "binary16"}};
  write_text(ws.embed_manifest(), em.dump(2) + "\n");
  log << "embed: " << vecs.size() << " x " << vecs.dim() << " (" << kind << ", "
      << kernels::max_threads() << " threads) -> " << ws.rel(ws.vectors()) << "\n";
  return write_run_manifest(ws, "embed", {{"embedder", o.embedder}, {"dim", vecs.dim()}}, inputs,
                            {ws.vectors(), ws.embed_manifest()});
}

ojson to_json(const TrackResult& r) {
  ojson j;
  j["clusters"] = ojson::array();
  for (std::size_t i = 0; i < r.clusters.size(); ++i) {
    const auto& c = r.clusters[i];
    const auto& t = r.trends[i];
    ojson cj;
    cj["slice"] = c.week.label;
    cj["granularity"] = to_string(c.week.granularity);
    cj["ordinal"] = c.week.ordinal;
    cj["cluster_id"] = c.cluster_id;
    cj["size"] = c.size;
    cj["label"] = to_string(t.label);
    cj["matched_prev_id"] = t.matched_prev_id ? ojson(*t.matched_prev_id) : ojson(nullptr);
    cj["match_sim"] = t.match_sim ? ojson(*t.match_sim) : ojson(nullptr);
    cj["drift"] = t.drift_value ? ojson(*t.drift_value) : ojson(nullptr);
    cj["prev_size"] = t.prev_size ? ojson(*t.prev_size) : ojson(nullptr);
    cj["top_terms"] = c.top_terms;
    cj["member_ids"] = c.member_ids;
    j["clusters"].push_back(std::move(cj));
  }
  j["slice_k"] = ojson::array();
  for (const auto& s : r.slice_k) {
    j["slice_k"].push_back({{"slice", s.slice.label},
                            {"granularity", to_string(s.slice.granularity)},
                            {"ordinal", s.slice.ordinal},
                            {"n_events", s.n_events},
                            {"k", s.k}});
  }
  return j;
}

TrackResult track_result_from_json(const nlohmann::json& j) {
  TrackResult r;
  auto slice = [](const nlohmann::json& x) {
    SliceKey s;
    s.label = x.at("slice").get<std::string>();
    s.granularity = parse_granularity(x.at("granularity").get<std::string>());
    s.ordinal = x.at("ordinal").get<std::int64_t>();
    return s;
  };
  for (const auto& cj : j.at("clusters")) {
    WeekCluster c;
    c.week = slice(cj);
    c.cluster_id = cj.at("cluster_id").get<std::uint32_t>();
    c.size = cj.at("size").get<std::size_t>();
    c.top_terms = cj.at("top_terms").get<std::vector<std::string>>();
    c.member_ids = cj.at("member_ids").get<std::vector<std::string>>();
    TrendRecord t;
    t.week = c.week;
    t.cluster_id = c.cluster_id;
    t.size = c.size;
    t.label = parse_trend_label(cj.at("label").get<std::string>());
    if (!cj.at("matched_prev_id").is_null()) t.matched_prev_id = cj["matched_prev_id"].get<std::uint32_t>();
    if (!cj.at("match_sim").is_null()) t.match_sim = cj["match_sim"].get<double>();
    if (!cj.at("drift").is_null()) t.drift_value = cj["drift"].get<double>();
    if (!cj.at("prev_size").is_null()) t.prev_size = cj["prev_size"].get<std::size_t>();
    r.clusters.push_back(std::move(c));
    r.trends.push_back(std::move(t));
  }
  for (const auto& sj : j.at("slice_k")) {
    r.slice_k.push_back({slice(sj), sj.at("n_events").get<std::size_t>(), sj.at("k").get<std::size_t>()});
  }
  return r;
}

ojson run_trends(const Workspace& ws, const TrendOptions& o, std::ostream& log) {
  const TrendParams p = o.params();
  Granularity g;
  try {
    g = parse_granularity(o.granularity);
  } catch (const std::invalid_argument& ex) {
    throw UsageError(ex.what());
  }
  EventStore store = load_events(ws);
  VectorStore vecs = load_vectors(ws, store);

  TrackResult r = track(store, vecs, p, o.seed, g);
  fs::create_directories(ws.results());
  write_clusters_csv(r, ws.clusters_csv());
  write_trends_summary_csv(r, ws.trends_csv());
  std::string kcsv = "week,n_events,k\n";
  for (const auto& s : r.slice_k) {
    kcsv += s.slice.label + "," + std::to_string(s.n_events) + "," + std::to_string(s.k) + "\n";
  }
  write_text(ws.k_csv(), kcsv);
  write_text(ws.clusters(), to_json(r).dump() + "\n");

  log << "trends: " << r.clusters.size() << " clusters over " << r.slice_k.size() << " "
      << o.granularity << " slices -> " << ws.rel(ws.clusters_csv()) << "\n";

  ojson params = {{"k", o.k},
                  {"match_threshold", p.match_threshold},
                  {"growth_factor", p.growth_factor},
                  {"growth_min_events", p.growth_min_events},
                  {"decay_factor", p.decay_factor},
                  {"drift_threshold", p.drift_threshold},
                  {"seed", o.seed},
                  {"granularity", o.granularity}};
  return write_run_manifest(ws, "trends", params, {ws.events(), ws.vectors()},
                            {ws.clusters_csv(), ws.trends_csv(), ws.k_csv(), ws.clusters()});
}

ojson run_query(const Workspace& ws, const QueryOptions& o, std::ostream& out, std::ostream& log) {
  if (o.text.empty() == o.query_vector.empty()) {
    throw UsageError("query needs exactly one of --text or --query-vector");
  }
  RankMode mode;
  try {
    mode = parse_rank_mode(o.mode);
  } catch (const std::invalid_argument& ex) {
    throw UsageError(ex.what());
  }
  std::optional<Instant> as_of;
  if (!o.as_of.empty()) as_of = parse_as_of(o.as_of);

  EventStore store = load_events(ws);
  VectorStore vecs = load_vectors(ws, store);

  std::vector<float> q;
  if (!o.query_vector.empty()) {
    q = parse_query_vector(o.query_vector);
  } else {
    if (embedder_kind(ws) != "hash") {
      throw UsageError("vectors come from an external embedder; pass --query-vector");
    }
    q = hash_embed(o.text, vecs.dim());
  }
  if (q.size() != vecs.dim()) {
    throw UsageError("query vector has dim " + std::to_string(q.size()) + ", store dim is " +
                     std::to_string(vecs.dim()));
  }

  RetrievalParams p;
  p.alpha = o.alpha;
  p.half_life_days = o.half_life_days;
  p.top_k = o.k;
  if (!o.now.empty()) {
    p.now = parse_instant_flag(o.now, "--now");
  } else if (as_of) {
    p.now = *as_of;
  } else {
    p.now = store.events().back().ts;
  }
  try {
    p.validate();
  } catch (const std::invalid_argument& ex) {
    throw UsageError(ex.what());
  }

  Diagnostics diag;
  auto hits = rank(q, store, vecs, p, mode, as_of, &diag);
  for (const auto& h : hits) out << h.to_json().dump() << "\n";

  log << "rank  score      cosine     age_days   ts                    event_id\n";
  for (std::size_t i = 0; i < hits.size(); ++i) {
    const auto& h = hits[i];
    char line[160];
    std::snprintf(line, sizeof line, "%-5zu %-10.6f %-10.6f %-10.3f %-21s ", i + 1, h.fused,
                  h.cosine_sim, h.age_days, format_iso(h.ts).c_str());
    log << line << h.event_id << "\n";
  }
  if (hits.empty()) log << "(no evidence" << (as_of ? " on or before the as-of cutoff" : "") << ")\n";
  for (const auto& w : diag.warnings) log << "warning: " << w << "\n";

  ojson params = {{"text", o.text},
                  {"query_vector", o.query_vector.empty() ? "" : "given"},
                  {"as_of", as_of ? format_iso(*as_of) : ""},
                  {"mode", o.mode},
                  {"alpha", p.alpha},
                  {"half_life_days", p.half_life_days},
                  {"k", p.top_k},
                  {"now", format_iso(p.now)}};
  return write_run_manifest(ws, "query", params, {ws.events(), ws.vectors()}, {});
}

ojson run_eval(const Workspace& ws, const EvalOptions& o, std::ostream& log) {
  const fs::path cfg_path = o.config.empty() ? ws.logs() / "eval.json" : fs::path(o.config);
  require(cfg_path, "gen");
  EvalConfig cfg;
  try {
    cfg = EvalConfig::load(cfg_path);
  } catch (const std::invalid_argument& ex) {
    throw UsageError(cfg_path.string() + ": " + ex.what());
  }
  if (o.alpha) cfg.alpha = *o.alpha;
  if (o.half_life_days) cfg.half_life_days = *o.half_life_days;
  RetrievalParams check{cfg.alpha, cfg.half_life_days, cfg.top_k, {}};
  try {
    check.validate();
    for (double a : cfg.alphas) RetrievalParams{a, cfg.half_life_days, cfg.top_k, {}}.validate();
  } catch (const std::invalid_argument& ex) {
    throw UsageError(ex.what());
  }
  require(cfg.truth_path, "gen");

  EventStore store = load_events(ws);
  VectorStore vecs = load_vectors(ws, store);
  require(ws.clusters(), "trends");
  TrackResult tracked = track_result_from_json(read_json_file(ws.clusters()));
  GroundTruth truth = GroundTruth::load(cfg.truth_path);

  std::unique_ptr<Embedder> emb;
  if (embedder_kind(ws) == "hash") {
    emb = std::make_unique<HashEmbedder>(vecs.dim());
  } else {
    emb = std::make_unique<VectorOnlyEmbedder>(vecs.dim());
  }

  EvalReport report = tml::run_eval(store, vecs, tracked, cfg, truth, *emb);
  write_text(ws.eval_report(), report.to_json().dump(2) + "\n");
  const std::string md = report.to_markdown();
  write_text(ws.eval_summary(), md);
  log << md;
  for (const auto& w : report.warnings) log << "warning: " << w << "\n";

  ojson params = {{"config", ws.rel(cfg_path)},
                  {"alpha", cfg.alpha},
                  {"half_life_days", cfg.half_life_days},
                  {"top_k", cfg.top_k},
                  {"alphas", cfg.alphas}};
  return write_run_manifest(ws, "eval", params,
                            {cfg_path, cfg.truth_path, ws.events(), ws.vectors(), ws.clusters()},
                            {ws.eval_report(), ws.eval_summary()});
}

// ---- argument parsing -----------------------------------------------------

namespace {

void add_trend_flags(CLI::App* sub, TrendOptions& t) {
  sub->add_option("--k", t.k, "Clusters per slice: a positive integer or 'auto' (elbow)")
      ->capture_default_str();
  sub->add_option("--match-threshold", t.match_threshold, "Min cosine to link clusters")
      ->capture_default_str();
  sub->add_option("--growth-factor", t.growth_factor, "Min size ratio for growth")
      ->capture_default_str();
  sub->add_option("--growth-min-events", t.growth_min_events, "Min cluster size for growth")
      ->capture_default_str();
  sub->add_option("--decay-factor", t.decay_factor, "Size ratio below which a topic decays")
      ->capture_default_str();
  sub->add_option("--drift-threshold", t.drift_threshold, "Min 1 - cos to flag drift")
      ->capture_default_str();
  sub->add_option("--granularity", t.granularity, "Slice size: day, week or month")
      ->capture_default_str();
}

void add_embed_flags(CLI::App* sub, EmbedOptions& e) {
  sub->add_option("--dim", e.dim, "Hashing embedder dimension")->capture_default_str();
  sub->add_option("--embedder", e.embedder, "hash or external:<path to TMV1 file>")
      ->capture_default_str();
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Temporal memory layer: ingest, embed, track topics and query event logs"};
  app.name("tml");
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  std::string workspace = ".";
  app.add_option("-w,--workspace", workspace, "Workspace directory")->capture_default_str();
  app.set_config("--settings", "", "TOML settings file; explicit flags win");

  GenOptions gen;
  IngestOptions ing;
  EmbedOptions emb;
  TrendOptions trend;
  QueryOptions query;
  EvalOptions eval;
  std::uint64_t all_seed = 42;

  auto* gen_cmd = app.add_subcommand("gen", "Write the synthetic stream and its query suite");
  gen_cmd->add_option("--seed", gen.seed, "Generator seed")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Output directory (default <workspace>/logs)");

  auto* ing_cmd = app.add_subcommand("ingest", "Normalize JSONL/CSV logs into data/events.jsonl");
  ing_cmd->add_option("--input", ing.inputs, "Log files or directories (default <workspace>/logs)");
  ing_cmd->add_option("--csv-mapping", ing.csv_mapping, "field=column mapping for CSV inputs");

  auto* emb_cmd = app.add_subcommand("embed", "Embed events into data/vectors.tmv");
  add_embed_flags(emb_cmd, emb);

  auto* trend_cmd = app.add_subcommand("trends", "Cluster slices and label topic trends");
  add_trend_flags(trend_cmd, trend);
  trend_cmd->add_option("--seed", trend.seed, "k-means seed")->capture_default_str();

  auto* q_cmd = app.add_subcommand("query", "Rank events for a query");
  q_cmd->add_option("--text", query.text, "Query text");
  q_cmd->add_option("--query-vector", query.query_vector,
                    "Query vector as a JSON array, inline or in a file");
  q_cmd->add_option("--as-of", query.as_of, "Only evidence on or before this date/instant");
  q_cmd->add_option("--mode", query.mode, "fused or cosine")->capture_default_str();
  q_cmd->add_option("--alpha", query.alpha, "Weight of semantics vs recency")->capture_default_str();
  q_cmd->add_option("--half-life-days", query.half_life_days, "Recency half-life in days")
      ->capture_default_str();
  q_cmd->add_option("--k", query.k, "Number of hits")->capture_default_str();
  q_cmd->add_option("--now", query.now, "Reference instant (default: newest event)");

  auto* eval_cmd = app.add_subcommand("eval", "Score the pipeline against a query suite");
  eval_cmd->add_option("--config", eval.config, "eval.json (default <workspace>/logs/eval.json)");
  eval_cmd->add_option("--alpha", eval.alpha, "Override the suite's alpha");
  eval_cmd->add_option("--half-life-days", eval.half_life_days, "Override the suite's half-life");

  auto* all_cmd = app.add_subcommand("all", "gen, ingest, embed, trends and eval in order");
  all_cmd->add_option("--seed", all_seed, "Generator and k-means seed")->capture_default_str();
  add_embed_flags(all_cmd, emb);
  add_trend_flags(all_cmd, trend);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  emb.dim_given = emb_cmd->count("--dim") > 0 || all_cmd->count("--dim") > 0;

  const Workspace ws{fs::path(workspace)};
  try {
    WorkspaceLock lock(ws.root);
    if (*gen_cmd) {
      run_gen(ws, gen, out);
    } else if (*ing_cmd) {
      run_ingest(ws, ing, out);
    } else if (*emb_cmd) {
      run_embed(ws, emb, out);
    } else if (*trend_cmd) {
      run_trends(ws, trend, out);
    } else if (*q_cmd) {
      run_query(ws, query, out, err);
    } else if (*eval_cmd) {
      run_eval(ws, eval, out);
    } else if (*all_cmd) {
      trend.seed = all_seed;
      ojson stages = ojson::object();
      stages["gen"] = run_gen(ws, {all_seed, ""}, out);
      stages["ingest"] = run_ingest(ws, {}, out);
      stages["embed"] = run_embed(ws, emb, out);
      stages["trends"] = run_trends(ws, trend, out);
      stages["eval"] = run_eval(ws, {}, out);
      ojson artifacts = ojson::object();
      for (const auto& [name, m] : stages.items()) {
        for (const auto& [path, digest] : m["artifacts"].items()) artifacts[path] = digest;
      }
      ojson m;
      m["tool"] = "tml";
      m["version"] = kVersion;
      m["stage"] = "all";
      m["params"] = {{"seed", all_seed}};
      m["stages"] = stages;
      m["artifacts"] = artifacts;
      write_text(ws.runs() / "all.json", m.dump(2) + "\n");
    }
  } catch (const MissingArtifact& e) {
    err << "error: " << e.what() << "\n";
    return kExitMissing;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitOk;
}

}  // namespace tml::cli
