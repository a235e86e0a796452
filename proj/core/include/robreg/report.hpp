#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "robreg/design.hpp"
#include "robreg/estimation.hpp"

namespace robreg {

/// Rectangular text table; numbers are expected to be pre-formatted with
/// format_double so output stays byte-stable.
struct TextTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
};

/// Comma-separated, "\n" line endings, fields quoted only when needed.
std::string to_csv(const TextTable& table);

/// One row per observation: row_id, fitted, std_residual, weight.
TextTable observation_table(const FitResult& fit, const Dataset& data);

/// A fit together with the labels needed to read it back.
struct FitRecord {
  FitResult fit;
  std::vector<std::string> coefficient_labels;
  std::vector<std::string> row_ids;
};

/// Flat JSON object (scalars and arrays only) with 17-significant-digit
/// floats; non-finite numbers become null.
std::string fit_to_json(const FitResult& fit, const Dataset& data);

/// Inverse of fit_to_json. Throws DataError on malformed input.
FitRecord fit_from_json(std::string_view text);

std::string sha256_hex(std::string_view bytes);
/// Throws IoError if the file cannot be read.
std::string sha256_file(const std::filesystem::path& path);

struct Manifest {
  std::string command;
  std::uint64_t seed = 0;
  /// (name, sha256) of every input file.
  std::vector<std::pair<std::string, std::string>> inputs;
  /// (key, value) echo of the effective configuration, in insertion order.
  std::vector<std::pair<std::string, std::string>> config;
};

/// Writes files below an output directory and tracks their checksums for
/// MANIFEST.txt. Paths are relative and use "/" separators.
class ReportWriter {
 public:
  /// Creates the directory. Throws IoError if that fails.
  explicit ReportWriter(std::filesystem::path out_dir);

  const std::filesystem::path& dir() const { return dir_; }
  void write(const std::string& relative, std::string_view content);
  void write_csv(const std::string& relative, const TextTable& table);
  /// Writes MANIFEST.txt listing inputs, config, seed and every file
  /// written so far (sorted by path).
  void write_manifest(const Manifest& manifest);

 private:
  std::filesystem::path dir_;
  std::vector<std::pair<std::string, std::string>> outputs_;
};

}  // namespace robreg
