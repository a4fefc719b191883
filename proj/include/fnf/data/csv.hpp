#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace fnf::data {

struct CsvOptions {
  bool header = true;
  int skip_lines = 0;         // before the header (or first row)
  bool trim = true;           // strip spaces around unquoted fields
  bool skip_blank = true;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of the first column with this name; throws SchemaError if absent.
  int column(std::string_view name) const;
  bool has_column(std::string_view name) const;
};

// RFC 4180 fields: quoted fields may contain commas and doubled quotes.
// Fields may not span lines.
std::vector<std::string> split_csv_line(std::string_view line, bool trim = true);

// Throws MissingInputError for an unreadable path and SchemaError for rows
// whose field count differs from the first row.
CsvTable read_csv(const std::filesystem::path& path, const CsvOptions& options = {});

void write_csv(const std::filesystem::path& path, const CsvTable& table);

}  // namespace fnf::data
