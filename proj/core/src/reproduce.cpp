#include "robreg/reproduce.hpp"

#include <algorithm>
#include <cmath>
#include <future>

#include "robreg/csv.hpp"
#include "robreg/error.hpp"
#include "robreg/format.hpp"

namespace robreg {

namespace {

constexpr const char* kShockFile = "shock.csv";
constexpr const char* kTaylorFile = "taylor_triangle.csv";
constexpr double kReportedRho = 0.88;

std::vector<std::string> digit_levels() {
  std::vector<std::string> v;
  for (int i = 0; i < 10; ++i) v.push_back(std::to_string(i));
  return v;
}

std::string fmt(double v) { return format_double(v); }

std::string join_ids(const Dataset& data, const std::vector<Eigen::Index>& rows) {
  std::string out;
  for (auto r : rows) {
    if (!out.empty()) out += ';';
    out += data.row_ids()[static_cast<std::size_t>(r)];
  }
  return out;
}

TextTable xy_series(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  TextTable t{{"x", "y"}, {}};
  for (Eigen::Index i = 0; i < x.size(); ++i) t.add_row({fmt(x(i)), fmt(y(i))});
  return t;
}

void write_fit(ReportWriter& out, const std::string& name, const FitResult& fit,
               const Dataset& data) {
  out.write("fits/" + name + ".json", fit_to_json(fit, data));
  out.write_csv("fits/" + name + "_observations.csv", observation_table(fit, data));
}

Manifest base_manifest(const std::string& study, const StudyOptions& opts,
                       const std::string& fixture) {
  Manifest m;
  m.command = "reproduce " + study;
  m.seed = opts.seed;
  m.inputs.emplace_back(fixture, std::string(frozen_digest(fixture)));
  return m;
}

Dataset load_fixture(const StudyOptions& opts, const char* file,
                     const std::vector<ColumnSchema>& schema, const DesignSpec& design) {
  verify_fixture(opts.data_dir, file);
  return build_design(load_csv(opts.data_dir / file, schema), design);
}

MapOptions seeded(const StudyOptions& opts) {
  MapOptions m;
  m.simplex.seed = opts.seed;
  return m;
}

}  // namespace

std::string_view frozen_digest(std::string_view fixture) {
  if (fixture == kShockFile) return "63c50b2d7e10628cef67901f1220042e69678f9c0c8732845bf3d2122f6deed5";
  if (fixture == kTaylorFile) return "f5bfc510b249cbbd400d750ee7b32ff314bd5e0d846f7e60d62c74690941fe79";
  throw UsageError("unknown fixture " + std::string(fixture));
}

void verify_fixture(const std::filesystem::path& data_dir, std::string_view fixture) {
  const auto expected = frozen_digest(fixture);
  const auto path = data_dir / std::string(fixture);
  std::string actual;
  try {
    actual = sha256_file(path);
  } catch (const IoError&) {
    throw DataError("fixture not found: " + path.string());
  }
  if (actual != expected) {
    throw DataError("fixture checksum mismatch for " + path.string() + ": expected " +
                    std::string(expected) + ", got " + actual);
  }
}

DesignSpec shock_design() {
  DesignSpec d;
  d.response = "time";
  d.numeric_columns = {"shocks"};
  return d;
}

DesignSpec taylor_design() {
  DesignSpec d;
  d.response = "paid";
  d.log_response = true;
  d.categorical_columns = {{"AY", digit_levels(), "0"}, {"DY", digit_levels(), "0"}};
  d.id_columns = {"AY", "DY"};
  return d;
}

ShockStudy run_shock(const StudyOptions& opts) {
  ShockStudy s{load_fixture(opts, kShockFile, {{"shocks"}, {"time"}}, shock_design()),
               {}, {}, {}, {}, {}};
  s.ols = fit_ols(s.data);
  s.ols_se = ols_standard_errors(s.data, s.ols);
  s.tukey = fit_m_irls(s.data, ErrorModel::tukey_biweight());
  s.lptn = fit_map(s.data, ErrorModel::lptn(0.9), PriorSpec::flat(), seeded(opts));
  for (Eigen::Index i = 0; i < s.data.n(); ++i)
    if (s.tukey.weights(i) == 0.0) s.outlier_rows.push_back(i);
  return s;
}

TaylorStudy run_taylor(const StudyOptions& opts) {
  TaylorStudy t{load_fixture(opts, kTaylorFile, {{"AY"}, {"DY"}, {"paid"}}, taylor_design()),
                {}, {}, {}, {}, {}, kReportedRho, 0, 0, 0, 0, {}, {}, {}};
  const auto& data = t.data;
  const PriorSpec flat = PriorSpec::flat();
  const MapOptions map = seeded(opts);
  const ErrorModel tukey_model = ErrorModel::tukey_biweight();

  auto reported = std::async(std::launch::async,
                              [&] { return fit_map(data, ErrorModel::lptn(kReportedRho), flat, map); });
  t.ols = fit_ols(data);
  t.tukey = fit_m_irls(data, tukey_model);
  t.profile = profile_hyperparam(data, Family::kLptn, make_grid(0.70, 0.98, 0.01), flat, map);
  for (const auto& row : t.profile.table)
    if (row.value == t.profile.best) t.lptn_profiled = row.fit;
  t.lptn = reported.get();

  t.dist_tukey_ols = coefficient_distance(t.tukey.beta_hat, t.ols.beta_hat);
  t.dist_tukey_lptn = coefficient_distance(t.tukey.beta_hat, t.lptn.beta_hat);
  t.dist_tukey_lptn_profiled = coefficient_distance(t.tukey.beta_hat, t.lptn_profiled.beta_hat);
  t.dy5 = data.column_index("DY=5");
  for (Eigen::Index i = 0; i < data.n(); ++i)
    if (std::abs(t.tukey.std_residuals(i)) > tukey_model.k()) t.flagged_rows.push_back(i);

  auto lptn_ww = std::async(std::launch::async, [&] {
    return compare_with_without(data, t.flagged_rows, ErrorModel::lptn(kReportedRho), flat, map);
  });
  t.tukey_with_without = compare_with_without(data, t.flagged_rows, tukey_model, flat, map);
  t.lptn_with_without = lptn_ww.get();
  return t;
}

void emit_shock(const ShockStudy& s, const StudyOptions& opts, ReportWriter& out) {
  const auto& data = s.data;
  write_fit(out, "ols", s.ols, data);
  write_fit(out, "tukey", s.tukey, data);
  write_fit(out, "lptn", s.lptn, data);

  const Eigen::VectorXd x = data.X().col(1);
  out.write_csv("series/fig1a_data.csv", xy_series(x, data.y()));
  const double lo = x.minCoeff();
  const double hi = x.maxCoeff();
  const int steps = 60;
  Eigen::VectorXd grid(steps + 1);
  for (int i = 0; i <= steps; ++i) grid(i) = lo + (hi - lo) * i / steps;
  const std::pair<const char*, const FitResult*> lines[] = {
      {"ols", &s.ols}, {"tukey", &s.tukey}, {"lptn", &s.lptn}};
  for (const auto& [name, fit] : lines) {
    const Eigen::VectorXd line =
        Eigen::VectorXd::Constant(grid.size(), fit->beta_hat(0)) + fit->beta_hat(1) * grid;
    out.write_csv(std::string("series/fig1a_") + name + ".csv", xy_series(grid, line));
    out.write_csv(std::string("series/fig1b_") + name + ".csv", xy_series(x, fit->weights));
  }

  TextTable weights{{"row_id", "shocks", "time", "weight_ols", "weight_tukey", "weight_lptn"}, {}};
  for (Eigen::Index i = 0; i < data.n(); ++i)
    weights.add_row({data.row_ids()[static_cast<std::size_t>(i)], fmt(x(i)), fmt(data.y()(i)),
                     fmt(s.ols.weights(i)), fmt(s.tukey.weights(i)), fmt(s.lptn.weights(i))});
  out.write_csv("tables/weights.csv", weights);

  TextTable coef{{"coefficient", "ols", "ols_se", "tukey", "lptn", "tukey_minus_ols_in_se"}, {}};
  for (Eigen::Index j = 0; j < data.p(); ++j)
    coef.add_row({data.column_labels()[static_cast<std::size_t>(j)], fmt(s.ols.beta_hat(j)),
                  fmt(s.ols_se(j)), fmt(s.tukey.beta_hat(j)), fmt(s.lptn.beta_hat(j)),
                  fmt((s.tukey.beta_hat(j) - s.ols.beta_hat(j)) / s.ols_se(j))});
  out.write_csv("tables/coefficients.csv", coef);

  TextTable outliers{{"row_id"}, {}};
  for (auto r : s.outlier_rows) outliers.add_row({data.row_ids()[static_cast<std::size_t>(r)]});
  out.write_csv("tables/outliers.csv", outliers);

  Manifest m = base_manifest("shock", opts, kShockFile);
  m.config = {{"design", "time ~ 1 + shocks"},
              {"ols", "least squares"},
              {"tukey", ErrorModel::tukey_biweight().describe() + ", IRLS with MAD scale"},
              {"lptn", s.lptn.model + ", flat prior MAP"},
              {"outlier_rule", "Tukey weight exactly 0"}};
  out.write_manifest(m);
}

void emit_taylor(const TaylorStudy& t, const StudyOptions& opts, ReportWriter& out) {
  const auto& data = t.data;
  write_fit(out, "ols", t.ols, data);
  write_fit(out, "tukey", t.tukey, data);
  write_fit(out, "lptn", t.lptn, data);
  write_fit(out, "lptn_profiled", t.lptn_profiled, data);

  const std::pair<const char*, const FitResult*> panels[] = {
      {"fig2a_tukey", &t.tukey}, {"fig2b_lptn", &t.lptn}, {"fig2c_ols", &t.ols}};
  for (const auto& [name, fit] : panels)
    out.write_csv(std::string("series/") + name + ".csv",
                  xy_series(fit->fitted(data), fit->std_residuals));

  TextTable coef{{"coefficient", "ols", "tukey", "lptn", "lptn_profiled"}, {}};
  for (Eigen::Index j = 0; j < data.p(); ++j)
    coef.add_row({data.column_labels()[static_cast<std::size_t>(j)], fmt(t.ols.beta_hat(j)),
                  fmt(t.tukey.beta_hat(j)), fmt(t.lptn.beta_hat(j)),
                  fmt(t.lptn_profiled.beta_hat(j))});
  out.write_csv("tables/coefficients.csv", coef);

  TextTable dist{{"pair", "sum_abs_difference"}, {}};
  dist.add_row({"tukey_vs_lptn", fmt(t.dist_tukey_lptn)});
  dist.add_row({"tukey_vs_lptn_profiled", fmt(t.dist_tukey_lptn_profiled)});
  dist.add_row({"tukey_vs_ols", fmt(t.dist_tukey_ols)});
  out.write_csv("tables/coefficient_distance.csv", dist);

  const Eigen::VectorXd delta = (t.tukey.beta_hat - t.lptn.beta_hat).cwiseAbs();
  Eigen::Index largest = 0;
  delta.maxCoeff(&largest);
  TextTable dy5{{"quantity", "value"}, {}};
  dy5.add_row({"exp_beta_tukey", fmt(std::exp(t.tukey.beta_hat(t.dy5)))});
  dy5.add_row({"exp_beta_lptn", fmt(std::exp(t.lptn.beta_hat(t.dy5)))});
  dy5.add_row({"exp_beta_ols", fmt(std::exp(t.ols.beta_hat(t.dy5)))});
  dy5.add_row({"abs_delta_tukey_lptn", fmt(delta(t.dy5))});
  dy5.add_row({"largest_delta_coefficient", data.column_labels()[static_cast<std::size_t>(largest)]});
  out.write_csv("tables/dy5.csv", dy5);

  TextTable prof{{"rho", "log_posterior", "converged"}, {}};
  for (const auto& row : t.profile.table)
    prof.add_row({fmt(row.value), fmt(row.objective), row.fit.converged ? "true" : "false"});
  out.write_csv("tables/profile.csv", prof);
  out.write_csv("series/profile_rho.csv", [&] {
    TextTable s{{"x", "y"}, {}};
    for (const auto& row : t.profile.table) s.add_row({fmt(row.value), fmt(row.objective)});
    return s;
  }());

  TextTable flagged{{"row_id", "tukey_std_residual"}, {}};
  for (auto r : t.flagged_rows)
    flagged.add_row({data.row_ids()[static_cast<std::size_t>(r)], fmt(t.tukey.std_residuals(r))});
  out.write_csv("tables/outliers.csv", flagged);

  TextTable ww{{"model", "removed_rows", "sum_abs_delta"}, {}};
  ww.add_row({"tukey", join_ids(data, t.flagged_rows), fmt(t.tukey_with_without.delta_beta_l1)});
  ww.add_row({"lptn", join_ids(data, t.flagged_rows), fmt(t.lptn_with_without.delta_beta_l1)});
  out.write_csv("tables/with_without.csv", ww);

  Manifest m = base_manifest("taylor", opts, kTaylorFile);
  m.config = {{"design", "log(paid) ~ 1 + AY + DY (categorical, reference level 0)"},
              {"prior", "flat"},
              {"tukey", ErrorModel::tukey_biweight().describe() + ", IRLS with MAD scale"},
              {"rho_grid", "0.70:0.98:0.01"},
              {"rho_profiled", fmt(t.profile.best)},
              {"rho_reported", fmt(t.reported_rho)},
              {"outlier_rule", "|Tukey standardized residual| > k"}};
  out.write_manifest(m);
}

}  // namespace robreg
