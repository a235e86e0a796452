#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "robreg/report.hpp"

namespace fs = std::filesystem;
using robreg::cli::run;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("robreg_cli_" + name);
  fs::remove_all(p);
  return p;
}

const std::string kData = ROBREG_TEST_DATA_DIR;
const std::string kShock = kData + "/shock.csv";

}  // namespace

TEST_CASE("usage errors exit with 1") {
  CHECK(call({}).code == 1);
  CHECK(call({"frobnicate"}).code == 1);
  CHECK(call({"fit", "--data", kShock, "--design", "shock", "--model", "cauchy"}).code == 1);
  CHECK(call({"fit", "--data", kShock, "--design", "shock", "--model", "lptn", "--rho", "1.5"})
            .code == 1);
  CHECK(call({"fit", "--data", kShock, "--design", "shock", "--prior", "jeffreys"}).code == 1);
  CHECK(call({"path", "--data", kShock, "--design", "shock"}).code == 1);
  CHECK(call({"path", "--data", kShock, "--design", "shock", "--targets", "3", "--mags", "4,2"})
            .code == 1);
  CHECK(call({"profile", "--data", kShock, "--design", "shock", "--family", "huber",
              "--grid", "1:2:0.5"})
            .code == 1);
  CHECK(call({"reproduce", "shock"}).code == 1);
  const Outcome help = call({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("reproduce") != std::string::npos);
}

TEST_CASE("data errors exit with 2") {
  const fs::path dir = scratch("bad_data");
  fs::create_directories(dir);
  { std::ofstream(dir / "bad.csv") << "shocks,time\n1,abc\n"; }
  CHECK(call({"fit", "--data", (dir / "bad.csv").string(), "--design", "shock"}).code == 2);
  CHECK(call({"fit", "--data", (dir / "missing.csv").string(), "--design", "shock"}).code == 2);
  fs::copy_file(kShock, dir / "shock.csv");
  { std::ofstream(dir / "shock.csv", std::ios::app) << "1,1\n"; }
  CHECK(call({"reproduce", "shock", "--data-dir", dir.string(), "--out",
              (dir / "out").string()})
            .code == 2);
  fs::remove_all(dir);
}

TEST_CASE("fit writes json, weights, residuals and a manifest") {
  const fs::path dir = scratch("fit");
  const Outcome o = call({"fit", "--data", kShock, "--design", "shock", "--model", "tukey",
                          "--out", dir.string()});
  REQUIRE(o.code == 0);
  CHECK(o.out.find("sigma_hat") != std::string::npos);
  for (const char* f : {"fit.json", "weights.csv", "residuals.csv", "MANIFEST.txt"})
    CHECK(fs::exists(dir / f));
  const auto rec = robreg::fit_from_json(slurp(dir / "fit.json"));
  CHECK(rec.fit.model == "tukey_biweight(k=4.685)");
  CHECK(rec.row_ids.size() == 16);
  const std::string manifest = slurp(dir / "MANIFEST.txt");
  CHECK(manifest.find(robreg::sha256_file(dir / "fit.json")) != std::string::npos);
  CHECK(manifest.find(robreg::sha256_file(kShock)) != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("weights and residuals print one row per observation") {
  const Outcome w = call({"weights", "--data", kShock, "--design", "shock", "--model", "huber"});
  REQUIRE(w.code == 0);
  CHECK(std::count(w.out.begin(), w.out.end(), '\n') == 17);
  const Outcome r = call({"residuals", "--data", kShock, "--design", "shock", "--model", "lptn"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("row_id,fitted,std_residual,weight\n", 0) == 0);
}

TEST_CASE("path writes one row per model and magnitude") {
  const Outcome o = call({"path", "--data", kShock, "--design", "shock", "--targets", "5",
                          "--mags", "5,20,80"});
  REQUIRE(o.code == 0);
  CHECK(std::count(o.out.begin(), o.out.end(), '\n') == 1 + 2 * 3);
  CHECK(o.out.find("beta:shocks") != std::string::npos);
}

TEST_CASE("profile reports the best grid value") {
  const Outcome o = call({"profile", "--data", kShock, "--design", "shock", "--family", "lptn",
                          "--grid", "0.80:0.96:0.04"});
  REQUIRE(o.code == 0);
  CHECK(std::count(o.out.begin(), o.out.end(), '\n') == 1 + 5 + 1);
  CHECK(o.out.find("best: ") != std::string::npos);
}

TEST_CASE("reproduce shock is byte-identical across runs") {
  const fs::path a = scratch("rep_a"), b = scratch("rep_b");
  REQUIRE(call({"reproduce", "shock", "--data-dir", kData, "--out", a.string()}).code == 0);
  REQUIRE(call({"reproduce", "shock", "--data-dir", kData, "--out", b.string()}).code == 0);
  CHECK(slurp(a / "MANIFEST.txt") == slurp(b / "MANIFEST.txt"));
  CHECK(fs::exists(a / "series" / "fig1a_tukey.csv"));
  CHECK(fs::exists(a / "tables" / "weights.csv"));
  fs::remove_all(a);
  fs::remove_all(b);
}
