#include "tml/ingest.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace tml {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IngestError("cannot open input file " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string scalar_string(const json& v) {
  if (v.is_null()) return {};
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

std::vector<std::string> string_list(const json& v, char sep) {
  std::vector<std::string> out;
  if (v.is_null()) return out;
  if (v.is_array()) {
    for (const auto& x : v) {
      auto s = scalar_string(x);
      if (!s.empty()) out.push_back(std::move(s));
    }
    return out;
  }
  // A bare string is a separator-joined list (the CSV form).
  std::string s = scalar_string(v);
  std::size_t start = 0;
  while (start <= s.size()) {
    auto end = s.find(sep, start);
    if (end == std::string::npos) end = s.size();
    auto item = s.substr(start, end - start);
    if (!item.empty()) out.push_back(std::move(item));
    start = end + 1;
  }
  return out;
}

void fold_context(const json& v, std::map<std::string, std::string>& ctx) {
  if (v.is_null()) return;
  if (v.is_object()) {
    for (const auto& [k, x] : v.items()) ctx[k] = scalar_string(x);
    return;
  }
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    if (s.empty()) return;
    auto parsed = json::parse(s, nullptr, false);
    if (!parsed.is_discarded() && parsed.is_object()) {
      fold_context(parsed, ctx);
      return;
    }
  }
  ctx["context"] = scalar_string(v);
}

bool is_schema_key(const std::string& k) {
  static const char* const kKeys[] = {"event_id", "ts",     "product", "event_type",
                                      "asset_id", "msg",    "context", "tech",
                                      "attack",   "risk_tag", "text_repr"};
  return std::any_of(std::begin(kKeys), std::end(kKeys), [&](const char* s) { return k == s; });
}

struct CsvRecord {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

std::vector<CsvRecord> parse_csv_records(std::string_view text) {
  std::vector<CsvRecord> rows;
  CsvRecord row;
  std::string field;
  std::size_t line = 1;
  row.line = 1;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        any = true;
        break;
      case ',':
        row.fields.push_back(std::move(field));
        field.clear();
        any = true;
        break;
      case '\r':
        break;
      case '\n':
        if (any || !field.empty()) {
          row.fields.push_back(std::move(field));
          rows.push_back(std::move(row));
        }
        field.clear();
        row = CsvRecord{};
        row.line = ++line;
        any = false;
        break;
      default:
        field.push_back(c);
        any = true;
    }
  }
  if (any || !field.empty()) {
    row.fields.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

struct FileResult {
  SourceStats stats;
  std::vector<Event> events;
  std::vector<RecordError> errors;
  std::size_t naive = 0;
  std::string fatal;
};

void add_record(FileResult& r, const json& obj, std::size_t line) {
  ++r.stats.records;
  try {
    bool naive = false;
    r.events.push_back(normalize_record(obj, &naive));
    if (naive) ++r.naive;
    ++r.stats.kept;
  } catch (const std::exception& ex) {
    ++r.stats.skipped;
    r.errors.push_back({r.stats.file, line, ex.what()});
  }
}

void ingest_jsonl(FileResult& r, const std::string& text) {
  std::size_t line = 0;
  std::istringstream in(text);
  std::string raw;
  while (std::getline(in, raw)) {
    ++line;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (raw.find_first_not_of(" \t") == std::string::npos) continue;
    auto obj = json::parse(raw, nullptr, false);
    if (obj.is_discarded()) {
      ++r.stats.records;
      ++r.stats.skipped;
      r.errors.push_back({r.stats.file, line, "invalid JSON"});
      continue;
    }
    add_record(r, obj, line);
  }
}

void ingest_csv(FileResult& r, const std::string& text, const CsvMapping& mapping) {
  auto rows = parse_csv_records(text);
  if (rows.empty()) return;
  const auto& header = rows.front().fields;
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;

  std::map<std::size_t, std::string> column_field;
  for (const auto& [field, column] : mapping.field_to_column) {
    auto it = col.find(column);
    if (it == col.end()) {
      throw IngestError(r.stats.file + ": mapped column '" + column + "' (for field '" + field +
                        "') not in CSV header");
    }
    column_field[it->second] = field;
  }

  for (std::size_t ri = 1; ri < rows.size(); ++ri) {
    const auto& row = rows[ri];
    if (row.fields.size() != header.size()) {
      ++r.stats.records;
      ++r.stats.skipped;
      r.errors.push_back({r.stats.file, row.line,
                         "expected " + std::to_string(header.size()) + " columns, got " +
                             std::to_string(row.fields.size())});
      continue;
    }
    json obj = json::object();
    for (std::size_t i = 0; i < row.fields.size(); ++i) {
      auto f = column_field.find(i);
      const std::string& key = f != column_field.end() ? f->second : header[i];
      const std::string& v = row.fields[i];
      if (key == "tech" || key == "attack" || key == "risk_tag") {
        obj[key] = string_list(json(v), mapping.list_separator);
      } else if (f == column_field.end() && v.empty()) {
        continue;
      } else {
        obj[key] = v;
      }
    }
    add_record(r, obj, row.line);
  }
}

}  // namespace

CsvMapping CsvMapping::parse(std::string_view text) {
  CsvMapping m;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t n = 0;
  auto trim = [](std::string s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++n;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw IngestError("mapping line " + std::to_string(n) + ": expected key=column");
    }
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (key == "list_separator") {
      if (value.size() != 1) throw IngestError("mapping: list_separator must be one character");
      m.list_separator = value[0];
      continue;
    }
    if (!is_schema_key(key) || key == "text_repr") {
      throw IngestError("mapping line " + std::to_string(n) + ": unknown field '" + key + "'");
    }
    m.field_to_column[key] = value;
  }
  if (m.field_to_column.count("ts") == 0) throw IngestError("mapping must map the ts field");
  return m;
}

CsvMapping CsvMapping::load(const fs::path& path) { return parse(read_file(path)); }

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> out;
  for (auto& r : parse_csv_records(text)) out.push_back(std::move(r.fields));
  return out;
}

Event normalize_record(const json& obj, bool* naive_ts) {
  if (!obj.is_object()) throw IngestError("record is not a JSON object");
  auto ts_it = obj.find("ts");
  if (ts_it == obj.end() || ts_it->is_null()) throw IngestError("missing ts");

  Event e;
  std::string raw_ts;
  if (ts_it->is_number_integer()) {
    raw_ts = std::to_string(ts_it->get<std::int64_t>());
  } else if (ts_it->is_number_float()) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", ts_it->get<double>());
    raw_ts = buf;
  } else {
    raw_ts = scalar_string(*ts_it);
  }
  CoercedTimestamp ts = coerce_timestamp(raw_ts);
  e.ts = ts.instant;
  if (naive_ts) *naive_ts = ts.naive;

  auto str = [&](const char* key) {
    auto it = obj.find(key);
    return it == obj.end() ? std::string{} : scalar_string(*it);
  };
  auto list = [&](const char* key) {
    auto it = obj.find(key);
    return it == obj.end() ? std::vector<std::string>{} : string_list(*it, ';');
  };
  e.product = str("product");
  e.event_type = str("event_type");
  e.asset_id = str("asset_id");
  e.msg = str("msg");
  e.tech = list("tech");
  e.attack = list("attack");
  e.risk_tag = list("risk_tag");

  for (const auto& [k, v] : obj.items()) {
    if (!is_schema_key(k)) e.context[k] = scalar_string(v);
  }
  if (auto it = obj.find("context"); it != obj.end()) fold_context(*it, e.context);

  e.text_repr = build_text_repr(e);
  e.event_id = str("event_id");
  if (e.event_id.empty()) e.event_id = derive_event_id(e);
  return e;
}

EventStore ingest(const std::vector<fs::path>& paths, const std::optional<CsvMapping>& mapping) {
  std::vector<FileResult> results(paths.size());
  const auto n = static_cast<std::ptrdiff_t>(paths.size());

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    auto& r = results[static_cast<std::size_t>(i)];
    const auto& p = paths[static_cast<std::size_t>(i)];
    r.stats.file = p.filename().string();
    try {
      auto text = read_file(p);
      auto ext = p.extension().string();
      std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
      if (ext == ".csv") {
        if (!mapping) throw IngestError(p.string() + ": CSV input requires a column mapping");
        ingest_csv(r, text, *mapping);
      } else {
        ingest_jsonl(r, text);
      }
    } catch (const std::exception& ex) {
      r.fatal = ex.what();
    }
  }

  Manifest manifest;
  std::vector<Event> events;
  for (auto& r : results) {
    if (!r.fatal.empty()) throw IngestError(r.fatal);
    manifest.sources.push_back(r.stats);
    manifest.errors.insert(manifest.errors.end(), r.errors.begin(), r.errors.end());
    manifest.naive_timestamps += r.naive;
    std::move(r.events.begin(), r.events.end(), std::back_inserter(events));
  }
  if (events.empty()) throw IngestError("no parseable records in input");
  return EventStore(std::move(events), std::move(manifest));
}

std::vector<fs::path> list_log_files(const fs::path& dir) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    if (ext == ".jsonl" || ext == ".csv") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void write_events_jsonl(const EventStore& store, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestError("cannot write " + path.string());
  for (const auto& e : store.events()) out << to_json(e).dump() << '\n';
}

}  // namespace tml
