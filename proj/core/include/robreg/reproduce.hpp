#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "robreg/design.hpp"
#include "robreg/estimation.hpp"
#include "robreg/report.hpp"
#include "robreg/robustness.hpp"

namespace robreg {

/// Digest frozen for a bundled fixture ("shock.csv", "taylor_triangle.csv").
/// Throws UsageError for an unknown name.
std::string_view frozen_digest(std::string_view fixture);

/// Recomputes the fixture digest; throws DataError on mismatch.
void verify_fixture(const std::filesystem::path& data_dir, std::string_view fixture);

DesignSpec shock_design();
/// log(paid) ~ AY + DY, both categorical with levels 0..9 and reference 0.
DesignSpec taylor_design();

struct StudyOptions {
  std::filesystem::path data_dir;
  std::uint64_t seed = 0;
};

struct ShockStudy {
  Dataset data;
  FitResult ols;
  FitResult tukey;
  FitResult lptn;
  Eigen::VectorXd ols_se;
  /// Rows that Tukey's biweight weights exactly zero.
  std::vector<Eigen::Index> outlier_rows;
};

/// OLS, Tukey (k = 4.685) and LPTN (rho = 0.9, flat prior MAP).
ShockStudy run_shock(const StudyOptions& opts);

struct TaylorStudy {
  Dataset data;
  FitResult ols;
  FitResult tukey;
  ProfileResult profile;
  /// LPTN MAP at the profiled rho and at the reported rho = 0.88.
  FitResult lptn_profiled;
  FitResult lptn;
  double reported_rho = 0.88;
  double dist_tukey_lptn = 0.0;
  double dist_tukey_lptn_profiled = 0.0;
  double dist_tukey_ols = 0.0;
  Eigen::Index dy5 = 0;
  /// Rows with |standardized residual| > k under the Tukey fit.
  std::vector<Eigen::Index> flagged_rows;
  WithWithout tukey_with_without;
  WithWithout lptn_with_without;
};

/// Flat prior throughout; rho profiled on 0.70:0.98:0.01.
TaylorStudy run_taylor(const StudyOptions& opts);

void emit_shock(const ShockStudy& study, const StudyOptions& opts, ReportWriter& out);
void emit_taylor(const TaylorStudy& study, const StudyOptions& opts, ReportWriter& out);

}  // namespace robreg
