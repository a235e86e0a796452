#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "robreg/csv.hpp"
#include "robreg/error.hpp"
#include "robreg/estimation.hpp"
#include "robreg/format.hpp"
#include "robreg/report.hpp"
#include "robreg/reproduce.hpp"
#include "robreg/robustness.hpp"

namespace robreg::cli {

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

struct ModelArgs {
  std::string family = "lptn";
  double k = kNaN;
  double nu = kNaN;
  double rho = kNaN;
};

struct CommonArgs {
  std::string data;
  std::string design;
  std::string prior = "flat";
  std::string out;
  std::uint64_t seed = 0;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string> strings_at(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) return {};
  return j.at(key).get<std::vector<std::string>>();
}

// A design is either a built-in name ("taylor", "shock") or a JSON file:
// {"response": "y", "log_response": false, "intercept": true,
//  "numeric": ["x"], "categorical": [{"column": "g", "levels": [...],
//  "reference": "a"}], "id_columns": ["g"]}
DesignSpec load_design(const std::string& spec) {
  if (spec == "taylor") return taylor_design();
  if (spec == "shock") return shock_design();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(spec));
    DesignSpec d;
    d.response = j.at("response").get<std::string>();
    d.log_response = j.value("log_response", false);
    d.intercept = j.value("intercept", true);
    d.numeric_columns = strings_at(j, "numeric");
    if (j.contains("categorical")) {
      for (const auto& c : j.at("categorical")) {
        CategoricalColumn col;
        col.column = c.at("column").get<std::string>();
        col.levels = strings_at(c, "levels");
        if (c.contains("reference")) col.reference = c.at("reference").get<std::string>();
        d.categorical_columns.push_back(std::move(col));
      }
    }
    d.id_columns = strings_at(j, "id_columns");
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("invalid design file " + spec + ": " + e.what());
  }
}

std::vector<ColumnSchema> schema_for(const DesignSpec& d) {
  std::vector<ColumnSchema> schema;
  std::set<std::string> seen;
  const auto add = [&](const std::string& name, ColumnType type) {
    if (seen.insert(name).second) schema.push_back({name, type});
  };
  add(d.response, ColumnType::kNumeric);
  for (const auto& c : d.numeric_columns) add(c, ColumnType::kNumeric);
  for (const auto& c : d.categorical_columns) add(c.column, ColumnType::kText);
  for (const auto& c : d.id_columns) add(c, ColumnType::kText);
  return schema;
}

Dataset load_dataset(const CommonArgs& a) {
  if (a.data.empty()) throw UsageError("--data is required");
  if (a.design.empty()) throw UsageError("--design is required");
  const DesignSpec design = load_design(a.design);
  return build_design(load_csv(a.data, schema_for(design)), design);
}

ErrorModel make_model(const ModelArgs& m) {
  const Family family = parse_family(m.family);
  double tuning = kNaN;
  switch (family) {
    case Family::kHuber:
    case Family::kTukeyBiweight:
      tuning = m.k;
      break;
    case Family::kStudentT:
      tuning = m.nu;
      break;
    case Family::kLptn:
    case Family::kImproperLptn:
      tuning = m.rho;
      break;
    case Family::kNormal:
      break;
  }
  return ErrorModel::from_family(family, tuning);
}

PriorSpec make_prior(const std::string& name, Eigen::Index p) {
  if (name == "flat") return PriorSpec::flat();
  if (name == "nig") return PriorSpec::diffuse_nig(p);
  throw UsageError("unknown prior '" + name + "' (expected flat or nig)");
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(item));
  return out;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<double> parse_grid(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3) throw UsageError("--grid must look like lo:hi:step");
  try {
    return make_grid(parse_double(parts[0]), parse_double(parts[1]), parse_double(parts[2]));
  } catch (const DataError& e) {
    throw UsageError(std::string("--grid: ") + e.what());
  } catch (const DomainError& e) {
    throw UsageError(std::string("--grid: ") + e.what());
  }
}

Manifest manifest_for(const std::string& command, const CommonArgs& a, const ModelArgs* m) {
  Manifest man;
  man.command = command;
  man.seed = a.seed;
  if (!a.data.empty()) man.inputs.emplace_back(a.data, sha256_file(a.data));
  if (!a.design.empty() && a.design != "taylor" && a.design != "shock")
    man.inputs.emplace_back(a.design, sha256_file(a.design));
  man.config.emplace_back("design", a.design);
  if (m) {
    for (const auto& [k, v] : make_model(*m).to_record()) man.config.emplace_back("model." + k, v);
  }
  man.config.emplace_back("prior", a.prior);
  return man;
}

MapOptions map_options(std::uint64_t seed) {
  MapOptions o;
  o.simplex.seed = seed;
  return o;
}

void print_fit(std::ostream& out, const FitResult& fit, const Dataset& data) {
  out << "model: " << fit.model << "\nmethod: " << fit.method
      << "\nconverged: " << (fit.converged ? "true" : "false")
      << "\nsigma_hat: " << format_double(fit.sigma_hat)
      << "\nobjective: " << format_double(fit.objective) << "\n";
  for (Eigen::Index j = 0; j < data.p(); ++j)
    out << data.column_labels()[static_cast<std::size_t>(j)] << ": "
        << format_double(fit.beta_hat(j)) << "\n";
  for (const auto& w : fit.warnings) out << "warning: " << w << "\n";
}

void add_common(CLI::App* cmd, CommonArgs& a, bool with_design = true) {
  cmd->add_option("--data", a.data, "Input CSV file");
  if (with_design)
    cmd->add_option("--design", a.design, "Design JSON file, or 'taylor' / 'shock'");
  cmd->add_option("--prior", a.prior, "flat or nig")->check(CLI::IsMember({"flat", "nig"}));
  cmd->add_option("--out", a.out, "Output directory");
  cmd->add_option("--seed", a.seed, "Seed for simplex restarts");
}

void add_model(CLI::App* cmd, ModelArgs& m, const char* flag = "--model") {
  cmd->add_option(flag, m.family,
                  "normal, huber, tukey_biweight, student_t, lptn or improper_lptn");
  cmd->add_option("--k", m.k, "Huber / Tukey tuning constant");
  cmd->add_option("--nu", m.nu, "Student t degrees of freedom");
  cmd->add_option("--rho", m.rho, "LPTN mass of the normal centre");
}

// fit, weights and residuals share the estimation step.
int do_fit(const std::string& command, const CommonArgs& a, const ModelArgs& m, std::ostream& out) {
  const Dataset data = load_dataset(a);
  const ErrorModel model = make_model(m);
  const FitResult fit =
      fit_model(data, model, make_prior(a.prior, data.p()), map_options(a.seed));
  const TextTable table = observation_table(fit, data);
  if (!a.out.empty()) {
    ReportWriter w(a.out);
    if (command == "fit") {
      w.write("fit.json", fit_to_json(fit, data));
      w.write_csv("weights.csv", table);
      w.write_csv("residuals.csv", table);
    } else {
      w.write_csv(command + ".csv", table);
    }
    w.write_manifest(manifest_for(command, a, &m));
  }
  if (command == "fit") {
    print_fit(out, fit, data);
  } else {
    out << to_csv(table);
  }
  return fit.converged ? kOk : kConvergence;
}

int do_profile(const CommonArgs& a, const std::string& family, const std::string& grid_text,
               std::ostream& out) {
  const Dataset data = load_dataset(a);
  const Family fam = parse_family(family);
  if (fam != Family::kLptn && fam != Family::kStudentT)
    throw UsageError("profile supports lptn and student_t");
  const auto grid = parse_grid(grid_text);
  const ProfileResult prof =
      profile_hyperparam(data, fam, grid, make_prior(a.prior, data.p()), map_options(a.seed));
  TextTable t{{"value", "objective", "converged"}, {}};
  const FitResult* best = nullptr;
  for (const auto& row : prof.table) {
    t.add_row({format_double(row.value), format_double(row.objective),
               row.fit.converged ? "true" : "false"});
    if (row.value == prof.best) best = &row.fit;
  }
  if (!a.out.empty()) {
    ReportWriter w(a.out);
    w.write_csv("profile.csv", t);
    w.write("fit.json", fit_to_json(*best, data));
    Manifest man = manifest_for("profile", a, nullptr);
    man.config.emplace_back("family", family);
    man.config.emplace_back("grid", grid_text);
    w.write_manifest(man);
  }
  out << to_csv(t) << "best: " << format_double(prof.best) << "\n";
  return best->converged ? kOk : kConvergence;
}

int do_path(const CommonArgs& a, const std::string& targets, const std::string& mags,
            const std::string& direction, const std::string& models, const ModelArgs& tuning,
            std::ostream& out) {
  const Dataset data = load_dataset(a);
  PathExperiment exp{data, {}, {}, Direction::kPositive, {}, make_prior(a.prior, data.p()),
                     map_options(a.seed), {}};
  exp.irls_options = IrlsOptions{1e-13, 5000, std::nullopt, std::nullopt};
  for (const auto& id : split(targets, ',')) exp.target_rows.push_back(data.row_index(id));
  try {
    exp.magnitudes = parse_list(mags);
  } catch (const DataError& e) {
    throw UsageError(std::string("--mags: ") + e.what());
  }
  exp.direction = direction == "negative" ? Direction::kNegative : Direction::kPositive;
  for (const auto& name : split(models, ',')) {
    ModelArgs m = tuning;
    m.family = name;
    exp.model_set.push_back(make_model(m));
  }
  const PathTrace trace = run_path(exp);

  TextTable t{{"model", "magnitude", "sigma_hat", "target_weight", "target_std_residual",
               "ratio", "g_ratio", "converged", "error"},
              {}};
  for (Eigen::Index j = 0; j < data.p(); ++j)
    t.header.push_back("beta:" + data.column_labels()[static_cast<std::size_t>(j)]);
  bool all_ok = true;
  for (const auto& r : trace.records) {
    std::vector<std::string> row{r.model, format_double(r.magnitude)};
    if (r.error.empty()) {
      row.insert(row.end(), {format_double(r.sigma_hat), format_double(r.target_weights[0]),
                             format_double(r.target_std_residuals[0]), std::isnan(r.ratio) ? std::string() : format_double(r.ratio),
                             format_double(r.g_ratio), r.converged ? "true" : "false", ""});
      for (Eigen::Index j = 0; j < r.beta_hat.size(); ++j) row.push_back(format_double(r.beta_hat(j)));
    } else {
      row.insert(row.end(), {"", "", "", "", "", "false", r.error});
      row.resize(t.header.size());
    }
    all_ok = all_ok && r.error.empty() && r.converged;
    t.add_row(std::move(row));
  }
  if (!a.out.empty()) {
    ReportWriter w(a.out);
    w.write_csv("path.csv", t);
    Manifest man = manifest_for("path", a, nullptr);
    man.config.emplace_back("targets", targets);
    man.config.emplace_back("mags", mags);
    man.config.emplace_back("direction", direction);
    man.config.emplace_back("models", models);
    w.write_manifest(man);
  }
  out << to_csv(t);
  return all_ok ? kOk : kConvergence;
}

int do_reproduce(const std::string& study, const std::string& data_dir, const std::string& out_dir,
                 std::uint64_t seed, std::ostream& out) {
  StudyOptions opts{data_dir, seed};
  if (out_dir.empty()) throw UsageError("--out is required for reproduce");
  if (study == "shock") {
    const ShockStudy s = run_shock(opts);
    ReportWriter w(out_dir);
    emit_shock(s, opts, w);
    out << "outlier rows (Tukey weight 0): " << s.outlier_rows.size() << "\n";
  } else {
    const TaylorStudy t = run_taylor(opts);
    ReportWriter w(out_dir);
    emit_taylor(t, opts, w);
    out << "profiled rho: " << format_double(t.profile.best)
        << "\nsum |tukey - lptn(rho=0.88)|: " << format_double(t.dist_tukey_lptn)
        << "\nsum |tukey - ols|: " << format_double(t.dist_tukey_ols)
        << "\nexp(beta DY=5) tukey: " << format_double(std::exp(t.tukey.beta_hat(t.dy5)))
        << "\nexp(beta DY=5) lptn: " << format_double(std::exp(t.lptn.beta_hat(t.dy5)))
        << "\nflagged outliers: " << t.flagged_rows.size() << "\n";
  }
  out << "wrote " << out_dir << "\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robust and heavy-tailed linear regression", "robreg"};
  app.require_subcommand(1);

  CommonArgs common;
  ModelArgs model;

  auto* fit = app.add_subcommand("fit", "Fit one model and write fit.json, weights and residuals");
  auto* weights = app.add_subcommand("weights", "Fit one model and print per-row weights");
  auto* residuals = app.add_subcommand("residuals", "Fit one model and print standardized residuals");
  for (auto* cmd : {fit, weights, residuals}) {
    add_common(cmd, common);
    add_model(cmd, model);
  }

  std::string grid = "0.70:0.98:0.01";
  std::string profile_family = "lptn";
  auto* profile = app.add_subcommand("profile", "Profile the LPTN rho or Student t nu");
  add_common(profile, common);
  profile->add_option("--family", profile_family, "lptn or student_t");
  profile->add_option("--grid", grid, "lo:hi:step");

  std::string targets, mags = "10,100,1000", direction = "positive",
                       path_models = "tukey_biweight,lptn";
  auto* path = app.add_subcommand("path", "Move target rows away from the bulk and refit");
  add_common(path, common);
  path->add_option("--targets", targets, "Comma-separated row ids")->required();
  path->add_option("--mags", mags, "Increasing multiples of the bulk scale");
  path->add_option("--direction", direction)->check(CLI::IsMember({"positive", "negative"}));
  path->add_option("--models", path_models, "Comma-separated families");
  path->add_option("--k", model.k);
  path->add_option("--nu", model.nu);
  path->add_option("--rho", model.rho);

  std::string study, data_dir = ROBREG_DEFAULT_DATA_DIR;
  auto* reproduce = app.add_subcommand("reproduce", "Rerun a bundled analysis");
  reproduce->add_option("study", study, "shock or taylor")
      ->required()
      ->check(CLI::IsMember({"shock", "taylor"}));
  reproduce->add_option("--out", common.out, "Output directory");
  reproduce->add_option("--data-dir", data_dir, "Directory holding the fixtures");
  reproduce->add_option("--seed", common.seed);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (*fit) return do_fit("fit", common, model, out);
    if (*weights) return do_fit("weights", common, model, out);
    if (*residuals) return do_fit("residuals", common, model, out);
    if (*profile) return do_profile(common, profile_family, grid, out);
    if (*path) return do_path(common, targets, mags, direction, path_models, model, out);
    if (*reproduce) return do_reproduce(study, data_dir, common.out, common.seed, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const DomainError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const ConvergenceError& e) {
    err << "convergence failure: " << e.what() << "\n";
    return kConvergence;
  } catch (const Error& e) {
    err << "data error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}

}  // namespace robreg::cli
