#include "robreg/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include <openssl/evp.h>

#include "json.hpp"
#include "robreg/error.hpp"
#include "robreg/format.hpp"

namespace robreg {

void TextTable::add_row(std::vector<std::string> row) {
  if (row.size() != header.size()) throw DomainError("row width does not match header");
  rows.push_back(std::move(row));
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void append_line(std::string& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_field(fields[i]);
  }
  out += '\n';
}

std::string json_string(const std::string& s) { return nlohmann::json(s).dump(); }

std::string json_number(double v) { return std::isfinite(v) ? format_double(v) : "null"; }

template <class Seq, class F>
std::string json_array(const Seq& seq, F each) {
  std::string out = "[";
  bool first = true;
  for (const auto& v : seq) {
    if (!first) out += ',';
    first = false;
    out += each(v);
  }
  return out + "]";
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

double number_or_nan(const nlohmann::json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!j.is_number()) throw DataError("expected a number in fit record");
  return j.get<double>();
}

std::vector<double> numbers(const nlohmann::json& j) {
  std::vector<double> out;
  for (const auto& e : j) out.push_back(number_or_nan(e));
  return out;
}

}  // namespace

std::string to_csv(const TextTable& table) {
  std::string out;
  append_line(out, table.header);
  for (const auto& row : table.rows) append_line(out, row);
  return out;
}

TextTable observation_table(const FitResult& fit, const Dataset& data) {
  TextTable t{{"row_id", "fitted", "std_residual", "weight"}, {}};
  const Eigen::VectorXd fitted = fit.fitted(data);
  for (Eigen::Index i = 0; i < data.n(); ++i)
    t.add_row({data.row_ids()[static_cast<std::size_t>(i)], format_double(fitted(i)),
               format_double(fit.std_residuals(i)), format_double(fit.weights(i))});
  return t;
}

std::string fit_to_json(const FitResult& fit, const Dataset& data) {
  std::vector<std::pair<std::string, std::string>> f;
  f.emplace_back("method", json_string(fit.method));
  f.emplace_back("model", json_string(fit.model));
  f.emplace_back("converged", fit.converged ? "true" : "false");
  f.emplace_back("iterations", std::to_string(fit.iterations));
  f.emplace_back("sigma_fixed", fit.sigma_fixed ? "true" : "false");
  f.emplace_back("sigma_hat", json_number(fit.sigma_hat));
  f.emplace_back("objective", json_number(fit.objective));
  f.emplace_back("coefficient_labels", json_array(data.column_labels(), json_string));
  f.emplace_back("beta_hat", json_array(to_std(fit.beta_hat), json_number));
  f.emplace_back("row_ids", json_array(data.row_ids(), json_string));
  f.emplace_back("weights", json_array(to_std(fit.weights), json_number));
  f.emplace_back("std_residuals", json_array(to_std(fit.std_residuals), json_number));
  const auto& ms = fit.multistart_record;
  f.emplace_back("multistart_start",
                 json_array(ms, [](const MultistartEntry& e) { return json_string(e.start); }));
  f.emplace_back("multistart_objective",
                 json_array(ms, [](const MultistartEntry& e) { return json_number(e.objective); }));
  f.emplace_back("multistart_converged", json_array(ms, [](const MultistartEntry& e) {
                   return std::string(e.converged ? "true" : "false");
                 }));
  f.emplace_back("multistart_note",
                 json_array(ms, [](const MultistartEntry& e) { return json_string(e.note); }));
  f.emplace_back("warnings", json_array(fit.warnings, json_string));

  std::string out = "{\n";
  for (std::size_t i = 0; i < f.size(); ++i) {
    out += "  " + json_string(f[i].first) + ": " + f[i].second;
    out += i + 1 < f.size() ? ",\n" : "\n";
  }
  return out + "}\n";
}

FitRecord fit_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed fit record: ") + e.what());
  }
  if (!j.is_object()) throw DataError("fit record must be a JSON object");
  FitRecord r;
  try {
    auto& fit = r.fit;
    fit.method = j.at("method").get<std::string>();
    fit.model = j.at("model").get<std::string>();
    fit.converged = j.at("converged").get<bool>();
    fit.iterations = j.at("iterations").get<int>();
    fit.sigma_fixed = j.at("sigma_fixed").get<bool>();
    fit.sigma_hat = number_or_nan(j.at("sigma_hat"));
    fit.objective = number_or_nan(j.at("objective"));
    r.coefficient_labels = j.at("coefficient_labels").get<std::vector<std::string>>();
    fit.beta_hat = to_eigen(numbers(j.at("beta_hat")));
    r.row_ids = j.at("row_ids").get<std::vector<std::string>>();
    fit.weights = to_eigen(numbers(j.at("weights")));
    fit.std_residuals = to_eigen(numbers(j.at("std_residuals")));
    const auto& starts = j.at("multistart_start");
    const auto& objs = j.at("multistart_objective");
    const auto& convs = j.at("multistart_converged");
    const auto& notes = j.at("multistart_note");
    if (objs.size() != starts.size() || convs.size() != starts.size() ||
        notes.size() != starts.size())
      throw DataError("multistart arrays differ in length");
    for (std::size_t i = 0; i < starts.size(); ++i)
      fit.multistart_record.push_back({starts[i].get<std::string>(), number_or_nan(objs[i]),
                                       convs[i].get<bool>(), notes[i].get<std::string>()});
    fit.warnings = j.at("warnings").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed fit record: ") + e.what());
  }
  if (static_cast<std::size_t>(r.fit.beta_hat.size()) != r.coefficient_labels.size() ||
      static_cast<std::size_t>(r.fit.weights.size()) != r.row_ids.size() ||
      r.fit.std_residuals.size() != r.fit.weights.size())
    throw DataError("fit record arrays have inconsistent lengths");
  return r;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw IoError("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xf];
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return sha256_hex(bytes);
}

ReportWriter::ReportWriter(std::filesystem::path out_dir) : dir_(std::move(out_dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec || !std::filesystem::is_directory(dir_))
    throw IoError("cannot create output directory " + dir_.string());
}

void ReportWriter::write(const std::string& relative, std::string_view content) {
  const auto path = dir_ / relative;
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("cannot write " + path.string());
  outputs_.erase(std::remove_if(outputs_.begin(), outputs_.end(),
                                [&](const auto& o) { return o.first == relative; }),
                 outputs_.end());
  outputs_.emplace_back(relative, sha256_hex(content));
}

void ReportWriter::write_csv(const std::string& relative, const TextTable& table) {
  write(relative, to_csv(table));
}

void ReportWriter::write_manifest(const Manifest& m) {
  std::ostringstream s;
  s << "command: " << m.command << "\n";
  s << "seed: " << m.seed << "\n";
  s << "\n[inputs]\n";
  for (const auto& [name, digest] : m.inputs) s << digest << "  " << name << "\n";
  s << "\n[config]\n";
  for (const auto& [k, v] : m.config) s << k << " = " << v << "\n";
  auto outs = outputs_;
  std::sort(outs.begin(), outs.end());
  s << "\n[outputs]\n";
  for (const auto& [name, digest] : outs) s << digest << "  " << name << "\n";
  const std::string text = s.str();
  const auto path = dir_ / "MANIFEST.txt";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("cannot write " + path.string());
}

}  // namespace robreg
