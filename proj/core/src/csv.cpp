#include "robreg/csv.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "robreg/error.hpp"
#include "robreg/format.hpp"

namespace robreg {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.emplace_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

}  // namespace

Table::Table(std::vector<std::string> columns, std::vector<std::vector<std::string>> rows)
    : columns_(std::move(columns)), rows_(std::move(rows)) {}

bool Table::has_column(std::string_view name) const {
  return std::find(columns_.begin(), columns_.end(), name) != columns_.end();
}

std::size_t Table::column_index(std::string_view name) const {
  const auto it = std::find(columns_.begin(), columns_.end(), name);
  if (it == columns_.end()) throw DataError("no column named '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - columns_.begin());
}

std::vector<std::string> Table::text(std::string_view column) const {
  const std::size_t c = column_index(column);
  std::vector<std::string> out;
  out.reserve(rows_.size());
  for (const auto& row : rows_) out.push_back(row[c]);
  return out;
}

std::vector<double> Table::numeric(std::string_view column) const {
  const std::size_t c = column_index(column);
  std::vector<double> out;
  out.reserve(rows_.size());
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    try {
      out.push_back(parse_double(rows_[r][c]));
    } catch (const DataError& e) {
      throw DataError("column '" + std::string(column) + "', row " + std::to_string(r + 1) +
                      ": " + e.what());
    }
  }
  return out;
}

Table parse_csv(std::string_view text, const std::vector<ColumnSchema>& schema) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_line(line);
    if (header.empty()) {
      header = std::move(cells);
      continue;
    }
    if (cells.size() != header.size()) {
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields, found " +
                      std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (cells[c].empty()) {
        throw DataError("line " + std::to_string(line_no) + ": missing value in column '" +
                        header[c] + "'");
      }
    }
    for (const auto& col : schema) {
      if (col.type != ColumnType::kNumeric) continue;
      const auto it = std::find(header.begin(), header.end(), col.name);
      if (it == header.end()) continue;  // reported below as a schema error
      const auto& cell = cells[static_cast<std::size_t>(it - header.begin())];
      try {
        parse_double(cell);
      } catch (const DataError&) {
        throw DataError("line " + std::to_string(line_no) + ": column '" + col.name +
                        "' is not numeric ('" + cell + "')");
      }
    }
    rows.push_back(std::move(cells));
  }

  if (header.empty()) throw DataError("schema mismatch: file has no header row");
  for (const auto& col : schema) {
    if (std::find(header.begin(), header.end(), col.name) == header.end()) {
      throw DataError("schema mismatch: header lacks column '" + col.name + "'");
    }
  }
  return Table(std::move(header), std::move(rows));
}

Table load_csv(const std::filesystem::path& path, const std::vector<ColumnSchema>& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_csv(buf.str(), schema);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace robreg
