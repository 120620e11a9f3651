#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lphi {

struct Dataset {
  std::string name;
  std::vector<std::string> column_names;  // file order
  std::map<std::string, std::vector<double>> columns;
  std::string provenance;

  std::size_t rows() const;
  const std::vector<double>& column(const std::string& c) const;
  void validate() const;
};

struct SchemaHints {
  std::vector<std::string> required_columns;
  std::optional<std::size_t> expected_rows;
  bool allow_nan = false;
};

// Strict RFC-style CSV: header row, '.' decimals, every cell numeric.
Dataset ingest_csv(const std::filesystem::path& path, const SchemaHints& hints = {});
Dataset parse_csv(const std::string& text, const std::string& name, const SchemaHints& hints = {});

struct BundledInfo {
  std::string name;
  std::string file;
  std::size_t rows;
  std::vector<std::string> columns;
  std::string provenance;
};

const std::vector<BundledInfo>& bundled_datasets();
std::filesystem::path data_dir();
// Bundled copy, or the given path validated against the bundled schema.
Dataset load_dataset(const std::string& name, const std::optional<std::filesystem::path>& path = std::nullopt);

}  // namespace lphi
