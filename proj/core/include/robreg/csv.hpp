#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace robreg {

enum class ColumnType { kNumeric, kText };

struct ColumnSchema {
  std::string name;
  ColumnType type = ColumnType::kNumeric;
};

/// Raw records read from a CSV file: header plus one string cell per column.
/// Numeric columns are validated at load time.
class Table {
 public:
  Table() = default;
  Table(std::vector<std::string> columns, std::vector<std::vector<std::string>> rows);

  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t num_rows() const { return rows_.size(); }
  bool has_column(std::string_view name) const;
  /// Throws DataError for an unknown column.
  std::size_t column_index(std::string_view name) const;
  const std::string& cell(std::size_t row, std::size_t col) const { return rows_[row][col]; }
  std::vector<std::string> text(std::string_view column) const;
  std::vector<double> numeric(std::string_view column) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

/// Parses UTF-8, comma-separated text with a header row. Every schema column
/// must be present in the header (extra columns are kept); numeric cells must
/// parse and no cell may be empty. Errors carry the 1-based line number.
Table parse_csv(std::string_view text, const std::vector<ColumnSchema>& schema);

/// Reads `path` and calls parse_csv. Throws DataError if unreadable.
Table load_csv(const std::filesystem::path& path, const std::vector<ColumnSchema>& schema);

}  // namespace robreg
