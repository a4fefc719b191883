#include "fnf/data/csv.hpp"

#include <fstream>

#include "fnf/errors.hpp"

namespace fnf::data {

namespace {

std::string_view strip(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool needs_quotes(const std::string& s) {
  return s.find_first_of(",\"\n") != std::string::npos || (!s.empty() && (s.front() == ' ' || s.back() == ' '));
}

}  // namespace

int CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  throw SchemaError("missing column " + std::string(name));
}

bool CsvTable::has_column(std::string_view name) const {
  for (const auto& h : header) {
    if (h == name) return true;
  }
  return false;
}

std::vector<std::string> split_csv_line(std::string_view line, bool trim) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> fields;
  std::size_t i = 0;
  while (true) {
    std::string field;
    std::size_t j = i;
    while (j < line.size() && (line[j] == ' ' || line[j] == '\t')) ++j;
    if (j < line.size() && line[j] == '"') {
      ++j;
      while (true) {
        if (j >= line.size()) throw SchemaError("unterminated quoted field");
        if (line[j] == '"') {
          if (j + 1 < line.size() && line[j + 1] == '"') {
            field += '"';
            j += 2;
            continue;
          }
          ++j;
          break;
        }
        field += line[j++];
      }
      while (j < line.size() && line[j] != ',') ++j;
      i = j;
    } else {
      const std::size_t end = std::min(line.find(',', i), line.size());
      const std::string_view raw = line.substr(i, end - i);
      field = std::string(trim ? strip(raw) : raw);
      i = end;
    }
    fields.push_back(std::move(field));
    if (i >= line.size()) break;
    ++i;  // the comma
    if (i == line.size()) {
      fields.emplace_back();
      break;
    }
  }
  return fields;
}

CsvTable read_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw MissingInputError("cannot read " + path.string());
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (static_cast<int>(line_no) <= options.skip_lines) continue;
    if (options.skip_blank && strip(line).empty()) continue;
    auto fields = split_csv_line(line, options.trim);
    if (first) {
      width = fields.size();
      first = false;
      if (options.header) {
        table.header = std::move(fields);
        continue;
      }
    }
    if (fields.size() != width) {
      throw SchemaError(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(width) +
                        " fields, found " + std::to_string(fields.size()));
    }
    table.rows.push_back(std::move(fields));
  }
  return table;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out(path);
  if (!out) throw MissingInputError("cannot write " + path.string());
  auto emit = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out << ',';
      if (needs_quotes(fields[i])) {
        out << '"';
        for (char c : fields[i]) out << (c == '"' ? "\"\"" : std::string(1, c));
        out << '"';
      } else {
        out << fields[i];
      }
    }
    out << '\n';
  };
  if (!table.header.empty()) emit(table.header);
  for (const auto& row : table.rows) emit(row);
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace fnf::data
