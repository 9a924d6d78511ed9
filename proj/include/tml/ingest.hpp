#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "tml/event.hpp"

namespace tml {

class IngestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Schema field -> CSV column header. Loaded from "field=column" lines.
struct CsvMapping {
  std::map<std::string, std::string> field_to_column;
  char list_separator = ';';

  static CsvMapping load(const std::filesystem::path& path);
  static CsvMapping parse(std::string_view text);
};

/// Normalizes one JSON object into an Event. Unknown keys go to context.
/// Throws TimestampError / UnembeddableEvent / IngestError on bad records.
Event normalize_record(const nlohmann::json& obj, bool* naive_ts = nullptr);

/// Parses RFC 4180 CSV text into rows of fields.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

/// Reads JSONL and CSV files into one store. Record-level failures are
/// counted in the manifest; zero parseable records is an IngestError.
EventStore ingest(const std::vector<std::filesystem::path>& paths,
                  const std::optional<CsvMapping>& mapping = std::nullopt);

/// All *.jsonl and *.csv files directly under dir, sorted by name.
std::vector<std::filesystem::path> list_log_files(const std::filesystem::path& dir);

void write_events_jsonl(const EventStore& store, const std::filesystem::path& path);

}  // namespace tml
