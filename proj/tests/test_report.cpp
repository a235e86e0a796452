#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "robreg/error.hpp"
#include "robreg/format.hpp"
#include "robreg/report.hpp"
#include "robreg/reproduce.hpp"

using namespace robreg;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("robreg_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("format_double round-trips and parse_double is strict") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng) * std::pow(10.0, i % 40 - 20);
    CHECK(parse_double(format_double(v)) == v);
  }
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(parse_double("+2.5") == 2.5);
  CHECK_THROWS_AS(parse_double(""), DataError);
  CHECK_THROWS_AS(parse_double("1.5x"), DataError);
  CHECK_THROWS_AS(parse_double("1,5"), DataError);
  CHECK_THROWS_AS(parse_double("inf"), DataError);
}

TEST_CASE("sha256 of known vectors") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("csv writer quotes only when needed") {
  TextTable t{{"a", "b"}, {}};
  t.add_row({"x,y", "plain"});
  t.add_row({"say \"hi\"", "1"});
  CHECK(to_csv(t) == "a,b\n\"x,y\",plain\n\"say \"\"hi\"\"\",1\n");
  CHECK_THROWS(t.add_row({"only one"}));
}

TEST_CASE("fit.json round-trips without loss") {
  std::mt19937_64 rng(8);
  const Dataset d = oracle::random_problem(rng, 30, 3);
  FitResult f = fit_map(d, ErrorModel::lptn(0.9), PriorSpec::flat());
  f.warnings.push_back("a \"quoted\" warning");
  const std::string text = fit_to_json(f, d);
  const FitRecord r = fit_from_json(text);
  CHECK(r.fit.beta_hat == f.beta_hat);
  CHECK(r.fit.sigma_hat == f.sigma_hat);
  CHECK(r.fit.weights == f.weights);
  CHECK(r.fit.std_residuals == f.std_residuals);
  CHECK(r.fit.objective == f.objective);
  CHECK(r.fit.method == f.method);
  CHECK(r.fit.model == f.model);
  CHECK(r.fit.converged == f.converged);
  CHECK(r.fit.iterations == f.iterations);
  CHECK(r.fit.warnings == f.warnings);
  CHECK(r.fit.multistart_record.size() == f.multistart_record.size());
  for (std::size_t i = 0; i < f.multistart_record.size(); ++i) {
    CHECK(r.fit.multistart_record[i].start == f.multistart_record[i].start);
    CHECK(r.fit.multistart_record[i].objective == f.multistart_record[i].objective);
  }
  CHECK(r.coefficient_labels == d.column_labels());
  CHECK(r.row_ids == d.row_ids());
  // Serializing the reloaded record reproduces the same bytes.
  CHECK(fit_to_json(r.fit, d) == text);
  CHECK(text.find("0.") != std::string::npos);
}

TEST_CASE("fit.json rejects malformed input") {
  CHECK_THROWS_AS(fit_from_json("{"), DataError);
  CHECK_THROWS_AS(fit_from_json("[]"), DataError);
  CHECK_THROWS_AS(fit_from_json("{\"method\": \"ols\"}"), DataError);
}

TEST_CASE("observation table has one row per observation") {
  std::mt19937_64 rng(9);
  const Dataset d = oracle::random_problem(rng, 12, 2);
  const FitResult f = fit_ols(d);
  const TextTable t = observation_table(f, d);
  CHECK(t.header == std::vector<std::string>{"row_id", "fitted", "std_residual", "weight"});
  CHECK(t.rows.size() == 12);
  CHECK(t.rows[0][3] == "1");
}

TEST_CASE("report writer records checksums in the manifest") {
  const fs::path dir = scratch("writer");
  ReportWriter w(dir / "nested");
  w.write("b.txt", "second");
  w.write("sub/a.txt", "first");
  w.write_manifest({"demo", 7, {{"in.csv", "00"}}, {{"key", "value"}}});
  const std::string m = slurp(dir / "nested" / "MANIFEST.txt");
  CHECK(m.find("seed: 7") != std::string::npos);
  CHECK(m.find(sha256_hex("first") + "  sub/a.txt") != std::string::npos);
  CHECK(m.find("key = value") != std::string::npos);
  CHECK(m.find(sha256_hex("second") + "  b.txt") < m.find("sub/a.txt"));
  fs::remove_all(dir);
}

TEST_CASE("unwritable output directory is an I/O error") {
  const fs::path dir = scratch("file_in_the_way");
  { std::ofstream(dir) << "x"; }
  CHECK_THROWS_AS(ReportWriter(dir / "sub"), IoError);
  fs::remove_all(dir);
}

TEST_CASE("fixtures match their frozen digests") {
  const fs::path data = ROBREG_TEST_DATA_DIR;
  CHECK_NOTHROW(verify_fixture(data, "shock.csv"));
  CHECK_NOTHROW(verify_fixture(data, "taylor_triangle.csv"));
  // The SHA256SUMS file next to the fixtures agrees with the compiled-in values.
  const std::string sums = slurp(data / "SHA256SUMS");
  CHECK(sums.find(std::string(frozen_digest("shock.csv"))) != std::string::npos);
  CHECK(sums.find(std::string(frozen_digest("taylor_triangle.csv"))) != std::string::npos);

  const fs::path dir = scratch("tampered");
  fs::create_directories(dir);
  fs::copy_file(data / "shock.csv", dir / "shock.csv");
  { std::ofstream(dir / "shock.csv", std::ios::app) << "16,1.0\n"; }
  CHECK_THROWS_WITH(verify_fixture(dir, "shock.csv"), doctest::Contains("checksum mismatch"));
  CHECK_THROWS_AS(run_shock({dir, 0}), DataError);
  CHECK_THROWS_AS(verify_fixture(dir, "taylor_triangle.csv"), DataError);
  fs::remove_all(dir);
}

TEST_CASE("shock reproduction is byte-identical across runs") {
  const fs::path a = scratch("shock_a"), b = scratch("shock_b");
  const StudyOptions opts{ROBREG_TEST_DATA_DIR, 3};
  for (const auto& dir : {a, b}) {
    ReportWriter w(dir);
    emit_shock(run_shock(opts), opts, w);
  }
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    ++files;
    CHECK(slurp(e.path()) == slurp(b / fs::relative(e.path(), a)));
  }
  CHECK(files >= 10);
  fs::remove_all(a);
  fs::remove_all(b);
}
