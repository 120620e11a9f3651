#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace lphi {

using Json = nlohmann::ordered_json;

enum class Format { csv, records };
Format parse_format(const std::string& s);

// FNV-1a 64, as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

struct Report {
  std::string kind;
  Json config = Json::object();
  std::vector<Json> records;
  std::optional<double> runtime_seconds;  // written only when set

  std::string config_hash() const;
};

// records: a meta line, then one JSON object per line.
void write_records(std::ostream& os, const Report& r);
// CSV: union of record keys in first-seen order, plus config_hash.
void write_csv(std::ostream& os, const Report& r);
// To the file at out, or stdout.
void write_report(const Report& r, Format f, const std::optional<std::filesystem::path>& out);

struct TableCell {
  double value = 0.0;
  std::string tag;  // "analytic" or "reps=N"
  int attempts = 0;
  int failures = 0;
  bool unreliable = false;
  bool ok = true;
  std::string error;
};

struct ReportTable {
  std::string row_name = "beta";
  std::string column_name = "gamma";
  std::string value_name = "value";
  std::vector<std::string> row_labels;
  std::vector<std::string> column_labels;
  std::vector<std::vector<TableCell>> cells;  // [row][column]
  std::uint64_t seed = 0;
  Json config = Json::object();
  std::optional<double> runtime_seconds;

  void validate() const;
  // Cell lookup by labels; throws when absent or empty.
  const TableCell& at(const std::string& row, const std::string& column) const;
  // Long form: one record per filled cell.
  Report to_report(const std::string& kind) const;
};

// Shortest round-trip decimal used for labels.
std::string label(double v);

}  // namespace lphi
