#include "lphi/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "lphi/errors.hpp"

namespace lphi {

Format parse_format(const std::string& s) {
  if (s == "csv") return Format::csv;
  if (s == "records") return Format::records;
  throw InputError("unknown format '" + s + "'");
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string Report::config_hash() const { return fnv1a_hex(config.dump()); }

void write_records(std::ostream& os, const Report& r) {
  Json meta = Json::object();
  meta["record"] = "meta";
  meta["kind"] = r.kind;
  meta["config_hash"] = r.config_hash();
  meta["config"] = r.config;
  if (r.runtime_seconds) meta["runtime_seconds"] = *r.runtime_seconds;
  os << meta.dump() << '\n';
  for (const auto& rec : r.records) os << rec.dump() << '\n';
}

namespace {

std::string csv_field(const Json& v) {
  std::string s;
  if (v.is_null()) return "";
  if (v.is_string()) {
    s = v.get<std::string>();
  } else {
    s = v.dump();
  }
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

void write_csv(std::ostream& os, const Report& r) {
  std::vector<std::string> keys;
  for (const auto& rec : r.records)
    for (const auto& [k, v] : rec.items()) {
      (void)v;
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
    }
  for (const auto& k : keys) os << csv_field(k) << ',';
  os << "config_hash";
  if (r.runtime_seconds) os << ",runtime_seconds";
  os << '\n';
  const std::string hash = r.config_hash();
  for (const auto& rec : r.records) {
    for (const auto& k : keys) os << (rec.contains(k) ? csv_field(rec[k]) : "") << ',';
    os << hash;
    if (r.runtime_seconds) os << ',' << Json(*r.runtime_seconds).dump();
    os << '\n';
  }
}

void write_report(const Report& r, Format f, const std::optional<std::filesystem::path>& out) {
  std::ostringstream ss;
  if (f == Format::csv) {
    write_csv(ss, r);
  } else {
    write_records(ss, r);
  }
  if (!out) {
    std::cout << ss.str();
    return;
  }
  std::ofstream file(*out, std::ios::binary | std::ios::trunc);
  if (!file) throw InputError("cannot write " + out->string());
  file << ss.str();
  if (!file) throw InputError("write failed for " + out->string());
}

void ReportTable::validate() const {
  if (cells.size() != row_labels.size()) throw InputError("report table: row count mismatch");
  for (const auto& row : cells)
    if (row.size() != column_labels.size()) throw InputError("report table: column count mismatch");
}

const TableCell& ReportTable::at(const std::string& row, const std::string& column) const {
  auto r = std::find(row_labels.begin(), row_labels.end(), row);
  auto c = std::find(column_labels.begin(), column_labels.end(), column);
  if (r == row_labels.end() || c == column_labels.end())
    throw InputError("report table: no cell (" + row + ", " + column + ")");
  const auto& cell = cells[r - row_labels.begin()][c - column_labels.begin()];
  if (cell.tag.empty()) throw InputError("report table: cell (" + row + ", " + column + ") not computed");
  return cell;
}

Report ReportTable::to_report(const std::string& kind) const {
  validate();
  Report rep;
  rep.kind = kind;
  rep.config = config;
  rep.runtime_seconds = runtime_seconds;
  for (std::size_t i = 0; i < row_labels.size(); ++i) {
    for (std::size_t j = 0; j < column_labels.size(); ++j) {
      const auto& c = cells[i][j];
      if (c.tag.empty()) continue;
      Json rec = Json::object();
      rec[row_name] = row_labels[i];
      rec[column_name] = column_labels[j];
      rec[value_name] = c.ok ? Json(c.value) : Json(nullptr);
      rec["tag"] = c.tag;
      rec["failures"] = c.failures;
      rec["unreliable"] = c.unreliable;
      if (!c.error.empty()) rec["error"] = c.error;
      rep.records.push_back(std::move(rec));
    }
  }
  return rep;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace lphi
