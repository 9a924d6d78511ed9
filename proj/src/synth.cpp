#include "tml/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include "tml/event.hpp"

namespace tml::synth {

namespace {

using Dyn = TopicSpec::Dynamics;
constexpr std::int64_t kWeekSeconds = 7 * 86400;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(eng_() % n); }
  double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 eng_;
};

std::string fill_template(std::string_view pattern, const std::string& user, std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < pattern.size();) {
    if (pattern.compare(i, 6, "{user}") == 0) {
      out += user;
      i += 6;
    } else if (pattern.compare(i, 3, "{n}") == 0) {
      out += std::to_string(n);
      i += 3;
    } else {
      out += pattern[i++];
    }
  }
  return out;
}

std::string two_digits(std::size_t n) {
  return (n < 10 ? "0" : "") + std::to_string(n);
}

nlohmann::ordered_json make_event(const std::string& id, Instant ts, const std::string& product,
                                  const Template& t, const std::string& asset,
                                  const std::string& msg, const TopicSpec* topic) {
  nlohmann::ordered_json j;
  j["event_id"] = id;
  j["ts"] = format_iso(ts);
  j["product"] = product;
  j["event_type"] = t.event_type;
  j["asset_id"] = asset;
  j["msg"] = msg;
  if (topic) {
    j["tech"] = topic->tech;
    j["attack"] = topic->attack;
    j["risk_tag"] = topic->risk_tag;
  } else {
    j["tech"] = nlohmann::ordered_json::array();
    j["attack"] = nlohmann::ordered_json::array();
    j["risk_tag"] = nlohmann::ordered_json::array();
  }
  j["context"] = {{"source", "synthetic"}};
  return j;
}

}  // namespace

std::size_t weekly_count(const TopicSpec& t, int w) {
  const double base = static_cast<double>(t.base_rate);
  switch (t.dynamics) {
    case Dyn::kGrow: {
      if (w < t.first_week) return t.base_rate;
      int steps = std::min(w, t.last_week) - t.first_week + 1;
      return static_cast<std::size_t>(std::llround(base * std::pow(t.factor, steps)));
    }
    case Dyn::kDecay: {
      if (w < t.first_week) return t.base_rate;
      int steps = w - t.first_week + 1;
      return std::max<std::size_t>(
          1, static_cast<std::size_t>(std::llround(base * std::pow(t.factor, steps))));
    }
    case Dyn::kDrift:
    case Dyn::kNone:
      return t.base_rate;
  }
  return t.base_rate;
}

TrendLabel scripted_label(const TopicSpec& t, int w) {
  if (w <= 1) return TrendLabel::kEmergence;
  switch (t.dynamics) {
    case Dyn::kGrow:
      if (w >= t.first_week && w <= t.last_week) return TrendLabel::kGrowth;
      break;
    case Dyn::kDrift:
      if (w == t.first_week) return TrendLabel::kDrift;
      break;
    case Dyn::kDecay:
      if (w >= t.first_week && weekly_count(t, w) < weekly_count(t, w - 1)) {
        return TrendLabel::kDecay;
      }
      break;
    case Dyn::kNone:
      break;
  }
  return TrendLabel::kStable;
}

GeneratorConfig GeneratorConfig::standard(std::uint64_t seed) {
  GeneratorConfig c;
  c.seed = seed;
  c.users = {"alice", "bob", "carol", "dave", "erin", "frank", "grace", "heidi", "ivan", "judy"};

  TopicSpec auth;
  auth.name = "auth_failure";
  auth.product = "okta";
  auth.tech = {"okta_verify"};
  auth.attack = {"T1110"};
  auth.risk_tag = {"credential_access"};
  auth.asset_prefix = "idp-";
  auth.base_rate = 12;
  auth.dynamics = Dyn::kGrow;
  auth.first_week = 4;
  auth.last_week = 8;
  auth.factor = 1.5;
  auth.templates = {{"auth_fail", "mfa push denied for {user}"},
                    {"auth_fail", "invalid password entered by {user}"},
                    {"auth_fail", "sign in blocked for {user}"}};
  auth.burst_template = {"auth_fail", "password spray detected against svc_backup"};
  auth.burst_asset = "idp-01";
  auth.burst_count = 12;
  auth.burst_first_week = 1;
  auth.burst_last_week = 3;
  auth.fresh_template = {"auth_fail", "new password spray detected against svc_backup"};
  auth.fresh_asset = "idp-02";
  auth.fresh_count = 2;
  auth.freshness_query = "okta auth_fail password spray detected against svc_backup";

  TopicSpec access;
  access.name = "data_access";
  access.product = "aws_s3";
  access.tech = {"cloud_storage"};
  access.attack = {"T1530"};
  access.risk_tag = {"data_exfiltration"};
  access.asset_prefix = "store-";
  access.base_rate = 20;
  access.dynamics = Dyn::kDrift;
  access.first_week = 6;
  access.drift_mix = {0.8, 0.95};
  access.templates = {{"data_access", "s3 getobject on finance reports bucket by {user}"},
                      {"data_access", "s3 listbucket on hr exports bucket by {user}"}};
  access.drift_templates = {
      {"data_access", "snowflake select on finance reports table by {user}"},
      {"data_access", "snowflake unload from hr exports stage by {user}"}};
  access.burst_template = {"data_access", "s3 bulk download of finance reports bucket by svc_etl"};
  access.burst_asset = "store-01";
  access.burst_count = 12;
  access.burst_first_week = 1;
  access.burst_last_week = 2;
  access.fresh_template = {"data_access", "snowflake unload of finance reports stage by svc_etl"};
  access.fresh_asset = "store-02";
  access.fresh_count = 2;
  access.freshness_query = "data_access bulk download of finance reports by svc_etl";

  TopicSpec vuln;
  vuln.name = "vuln_scan";
  vuln.product = "nessus";
  vuln.tech = {"vulnerability_scanner"};
  vuln.attack = {"T1595"};
  vuln.risk_tag = {"reconnaissance"};
  vuln.asset_prefix = "scan-";
  vuln.base_rate = 40;
  vuln.dynamics = Dyn::kDecay;
  vuln.first_week = 9;
  vuln.factor = 0.45;
  vuln.templates = {{"vuln_scan", "port sweep completed on subnet {n}"},
                    {"vuln_scan", "plugin audit flagged host {n}"},
                    {"vuln_scan", "credentialed scan finished on host {n}"}};
  vuln.burst_template = {"vuln_scan", "critical openssl cve flagged on host 7"};
  vuln.burst_asset = "scan-01";
  vuln.burst_count = 12;
  vuln.burst_first_week = 1;
  vuln.burst_last_week = 2;
  vuln.fresh_template = {"vuln_scan", "critical openssl cve flagged on host 7 again"};
  vuln.fresh_asset = "scan-02";
  vuln.fresh_count = 2;
  vuln.freshness_query = "vuln_scan critical openssl cve flagged on host";

  c.topics = {auth, access, vuln};

  c.noise_rate = 8;
  c.noise_templates = {
      {"crowdstrike", {"process_start", "powershell spawned by winword"}},
      {"paloalto", {"fw_deny", "outbound connection denied to tor exit"}},
      {"github", {"repo_clone", "private repository cloned by {user}"}},
      {"zscaler", {"web_block", "blocked archive download by {user}"}},
      {"jamf", {"device_checkin", "laptop compliance check passed"}},
      {"slack", {"file_share", "external file share created by {user}"}},
  };
  c.as_of_points = {{5, 3}, {9, 0}, {12, 4}};
  return c;
}

GeneratedStream generate_stream(const GeneratorConfig& cfg) {
  Rng rng(cfg.seed);
  GeneratedStream out;
  const Instant start = week_start(cfg.first_week);
  out.end = start + std::chrono::seconds{kWeekSeconds * cfg.weeks};

  for (const auto& t : cfg.topics) {
    TopicTruth tt;
    tt.name = t.name;
    out.truth.push_back(std::move(tt));
  }

  auto random_ts = [&](int w, std::int64_t span = kWeekSeconds) {
    Instant ws = start + std::chrono::seconds{kWeekSeconds * (w - 1)};
    return ws + std::chrono::seconds{static_cast<std::int64_t>(rng.index(span))};
  };

  for (int w = 1; w <= cfg.weeks; ++w) {
    const Instant ws = start + std::chrono::seconds{kWeekSeconds * (w - 1)};
    const std::string week_label = iso_week_of(ws).str();
    std::vector<std::pair<Instant, nlohmann::ordered_json>> week_events;

    for (std::size_t ti = 0; ti < cfg.topics.size(); ++ti) {
      const auto& t = cfg.topics[ti];
      auto& truth = out.truth[ti];
      const std::size_t n = weekly_count(t, w);

      std::size_t burst = 0;
      if (t.burst_count > 0 && w >= t.burst_first_week && w <= t.burst_last_week) {
        const auto span = static_cast<std::size_t>(t.burst_last_week - t.burst_first_week + 1);
        const auto idx = static_cast<std::size_t>(w - t.burst_first_week);
        burst = t.burst_count / span + (idx < t.burst_count % span ? 1 : 0);
        burst = std::min(burst, n);
      }

      double new_phase = 0.0;
      if (t.dynamics == Dyn::kDrift && w >= t.first_week) {
        auto k = static_cast<std::size_t>(w - t.first_week);
        new_phase = k < t.drift_mix.size() ? t.drift_mix[k] : 1.0;
      }

      const std::size_t fresh = w == cfg.weeks ? std::min(t.fresh_count, n - burst) : 0;

      for (std::size_t i = 0; i < n; ++i) {
        const std::string id = "syn-" + t.name + "-" + week_label + "-" + std::to_string(i);
        // The stream's last day belongs to the fresh events.
        Instant ts = fresh > 0 ? random_ts(w, kWeekSeconds - 86400) : random_ts(w);
        std::string product = t.product;
        std::string asset;
        Template tpl;
        std::string msg;
        if (i >= n - fresh) {
          ts = out.end - std::chrono::seconds{1 + static_cast<std::int64_t>(rng.index(86400))};
          tpl = t.fresh_template;
          asset = t.fresh_asset;
          msg = tpl.msg;
          if (t.dynamics == Dyn::kDrift) product = "snowflake";
        } else if (i < burst) {
          tpl = t.burst_template;
          asset = t.burst_asset;
          msg = tpl.msg;
        } else {
          bool drifted = new_phase > 0.0 && rng.unit() < new_phase;
          const auto& pool = drifted ? t.drift_templates : t.templates;
          tpl = pool[rng.index(pool.size())];
          if (drifted) product = "snowflake";
          asset = t.asset_prefix + two_digits(1 + rng.index(t.asset_pool));
          msg = fill_template(tpl.msg, cfg.users[rng.index(cfg.users.size())], 1 + rng.index(250));
        }
        week_events.emplace_back(ts, make_event(id, ts, product, tpl, asset, msg, &t));
        truth.event_ids.push_back(id);
      }
      truth.weekly_counts[week_label] = n;
      truth.labels[week_label] = scripted_label(t, w);
    }

    for (std::size_t i = 0; i < cfg.noise_rate; ++i) {
      const auto& [product, tpl] = cfg.noise_templates[rng.index(cfg.noise_templates.size())];
      const std::string id = "syn-noise-" + week_label + "-" + std::to_string(i);
      Instant ts = random_ts(w);
      std::string msg = fill_template(tpl.msg, cfg.users[rng.index(cfg.users.size())], 0);
      std::string asset = "host-" + two_digits(1 + rng.index(40));
      week_events.emplace_back(ts, make_event(id, ts, product, tpl, asset, msg, nullptr));
      out.noise_ids.push_back(id);
    }

    std::stable_sort(week_events.begin(), week_events.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::string payload;
    for (const auto& [ts, j] : week_events) payload += j.dump() + "\n";
    out.files.emplace_back("synthetic_" + week_label + ".jsonl", std::move(payload));
  }

  // Query suite with generator-derived ground truth.
  nlohmann::ordered_json eval;
  eval["truth"] = "ground_truth.json";
  eval["now"] = format_iso(out.end);
  eval["top_k"] = 10;
  eval["alpha"] = 0.7;
  eval["half_life_days"] = 14.0;
  eval["alphas"] = {0.4, 0.5, 0.7, 0.9, 0.95};
  eval["queries"] = nlohmann::ordered_json::array();
  for (const auto& t : cfg.topics) {
    eval["queries"].push_back(
        {{"text", t.freshness_query}, {"type", "freshness"}, {"topic", t.name}});
  }
  for (std::size_t i = 0; i < cfg.as_of_points.size(); ++i) {
    const auto& t = cfg.topics[i % cfg.topics.size()];
    auto [w, d] = cfg.as_of_points[i];
    Instant cutoff = start + std::chrono::seconds{kWeekSeconds * (w - 1) + 86400LL * d + 43200};
    eval["queries"].push_back({{"text", t.freshness_query},
                               {"type", "as_of"},
                               {"topic", t.name},
                               {"cutoff", format_iso(cutoff)}});
  }
  out.eval_config = std::move(eval);
  return out;
}

nlohmann::ordered_json GeneratedStream::truth_json(std::uint64_t seed) const {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["end"] = format_iso(end);
  j["topics"] = nlohmann::ordered_json::array();
  for (const auto& t : truth) {
    nlohmann::ordered_json tj;
    tj["name"] = t.name;
    tj["weekly_counts"] = t.weekly_counts;
    nlohmann::ordered_json labels = nlohmann::ordered_json::object();
    for (const auto& [w, l] : t.labels) labels[w] = to_string(l);
    tj["labels"] = labels;
    tj["event_ids"] = t.event_ids;
    j["topics"].push_back(std::move(tj));
  }
  j["noise_ids"] = noise_ids;
  return j;
}

void write_stream(const GeneratedStream& s, std::uint64_t seed, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& body) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    f << body;
  };
  for (const auto& [name, body] : s.files) write(name, body);
  write("ground_truth.json", s.truth_json(seed).dump(2) + "\n");
  write("eval.json", s.eval_config.dump(2) + "\n");
}

}  // namespace tml::synth
