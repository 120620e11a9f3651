#include "lphi/dataset.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "lphi/errors.hpp"

#ifndef LPHI_DATA_DIR
#define LPHI_DATA_DIR "data"
#endif

namespace lphi {

std::size_t Dataset::rows() const { return columns.empty() ? 0 : columns.begin()->second.size(); }

const std::vector<double>& Dataset::column(const std::string& c) const {
  auto it = columns.find(c);
  if (it == columns.end()) throw InputError(name + ": no column '" + c + "'");
  return it->second;
}

void Dataset::validate() const {
  if (columns.size() != column_names.size()) throw InputError(name + ": duplicate column names");
  for (const auto& [k, v] : columns)
    if (v.size() != rows()) throw InputError(name + ": column '" + k + "' length mismatch");
}

namespace {

std::string where(const std::string& name, std::size_t line) { return name + ":" + std::to_string(line) + ": "; }

// One record; quoted fields may hold commas, doubled quotes and newlines.
bool next_record(const std::string& s, std::size_t& pos, std::size_t& line, std::vector<std::string>& out,
                 const std::string& name) {
  out.clear();
  if (pos >= s.size()) return false;
  std::string field;
  bool quoted = false, was_quoted = false;
  const std::size_t start_line = line;
  while (pos < s.size()) {
    const char c = s[pos++];
    if (quoted) {
      if (c == '"') {
        if (pos < s.size() && s[pos] == '"') {
          field += '"';
          ++pos;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    if (c == '"') {
      if (!field.empty() || was_quoted) throw InputError(where(name, line) + "stray quote");
      quoted = was_quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
      was_quoted = false;
    } else if (c == '\r' && pos < s.size() && s[pos] == '\n') {
      continue;
    } else if (c == '\n') {
      ++line;
      out.push_back(std::move(field));
      return true;
    } else {
      if (was_quoted) throw InputError(where(name, line) + "text after closing quote");
      field += c;
    }
  }
  if (quoted) throw InputError(where(name, start_line) + "unterminated quoted field");
  out.push_back(std::move(field));
  return true;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return {};
  return s.substr(a, s.find_last_not_of(" \t") - a + 1);
}

double parse_number(const std::string& raw, const std::string& name, std::size_t line, bool allow_nan) {
  const std::string t = trim(raw);
  if (t.empty()) throw InputError(where(name, line) + "empty cell");
  const char* b = t.data();
  if (*b == '+') ++b;
  double v = 0.0;
  auto [p, ec] = std::from_chars(b, t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size()) throw InputError(where(name, line) + "non-numeric cell '" + t + "'");
  if (std::isnan(v) && !allow_nan) throw InputError(where(name, line) + "NaN not allowed");
  if (std::isinf(v)) throw InputError(where(name, line) + "infinite cell");
  return v;
}

}  // namespace

Dataset parse_csv(const std::string& text, const std::string& name, const SchemaHints& hints) {
  std::string s = text;
  if (s.rfind("\xEF\xBB\xBF", 0) == 0) s.erase(0, 3);
  Dataset d;
  d.name = name;
  std::size_t pos = 0, line = 1;
  std::vector<std::string> rec;
  if (!next_record(s, pos, line, rec, name) || (rec.size() == 1 && trim(rec[0]).empty()))
    throw InputError(name + ": empty file, no header row");
  for (auto& h : rec) {
    const std::string t = trim(h);
    if (t.empty()) throw InputError(where(name, 1) + "empty column name");
    if (d.columns.count(t)) throw InputError(where(name, 1) + "duplicate column '" + t + "'");
    d.column_names.push_back(t);
    d.columns[t];
  }
  for (;;) {
    const std::size_t at = line;
    if (!next_record(s, pos, line, rec, name)) break;
    if (rec.size() == 1 && trim(rec[0]).empty()) {
      if (pos >= s.size()) break;
      throw InputError(where(name, at) + "blank line");
    }
    if (rec.size() != d.column_names.size())
      throw InputError(where(name, at) + "expected " + std::to_string(d.column_names.size()) + " fields, found " +
                       std::to_string(rec.size()));
    for (std::size_t j = 0; j < rec.size(); ++j)
      d.columns[d.column_names[j]].push_back(parse_number(rec[j], name, at, hints.allow_nan));
  }
  for (const auto& c : hints.required_columns)
    if (!d.columns.count(c)) throw InputError(name + ": missing required column '" + c + "'");
  if (hints.expected_rows && d.rows() != *hints.expected_rows)
    throw InputError(name + ": expected " + std::to_string(*hints.expected_rows) + " rows, found " +
                     std::to_string(d.rows()));
  d.validate();
  return d;
}

Dataset ingest_csv(const std::filesystem::path& path, const SchemaHints& hints) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), path.filename().string(), hints);
}

const std::vector<BundledInfo>& bundled_datasets() {
  static const std::vector<BundledInfo> v = {
      {"newcomb", "newcomb.csv", 66, {"time"},
       "Newcomb (1882) passage times, Stigler (1977) Table 5; deviations from 24800 ns, 66 values as in MASS::newcomb"},
      {"short", "short.csv", 53, {"parallax"},
       "Short (1763) solar parallax determinations, Stigler (1977) Table 4, 53 values. Not bundled: supply the "
       "file with --data <path> (one column 'parallax', 53 rows)"},
      {"hertzsprung-russel", "hertzsprung_russell.csv", 47, {"log_te", "log_light"},
       "Hertzsprung-Russell diagram of star cluster CYG OB1, Rousseeuw and Leroy (1987); robustbase::starsCYG"},
      {"salinity", "salinity.csv", 28, {"lagged_salinity", "trend", "discharge", "salinity"},
       "Pamlico Sound salinity, Ruppert and Carroll (1980) via Rousseeuw and Leroy (1987); robustbase::salinity"},
      {"mosquito", "mosquito.csv", 2, {"died", "count"},
       "DDT susceptibility of 465 mosquitoes, 264 died; frequency table"},
  };
  return v;
}

std::filesystem::path data_dir() {
  if (const char* e = std::getenv("LPHI_DATA_DIR"); e && *e) return e;
  return LPHI_DATA_DIR;
}

Dataset load_dataset(const std::string& name, const std::optional<std::filesystem::path>& path) {
  const BundledInfo* info = nullptr;
  for (const auto& b : bundled_datasets())
    if (b.name == name) info = &b;
  if (!info) throw InputError("unknown dataset '" + name + "'");
  const auto file = path ? *path : data_dir() / info->file;
  if (!std::filesystem::exists(file))
    throw InputError("dataset '" + name + "' not found at " + file.string() + ". Provenance: " + info->provenance);
  SchemaHints h;
  h.required_columns = info->columns;
  h.expected_rows = info->rows;
  auto d = ingest_csv(file, h);
  d.name = name;
  d.provenance = info->provenance;
  return d;
}

}  // namespace lphi
