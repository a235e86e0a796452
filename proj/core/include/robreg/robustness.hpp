#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "robreg/design.hpp"
#include "robreg/error_model.hpp"
#include "robreg/estimation.hpp"

namespace robreg {

/// Sum of absolute coefficient differences.
double coefficient_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// [(1/sigma) f((y - x'beta)/sigma)] / f(y) for a proper family, evaluated in
/// log space. Throws DomainError for improper families or sigma <= 0.
double limit_ratio(const ErrorModel& model, const Eigen::VectorXd& beta, double sigma,
                   const Eigen::VectorXd& x, double y);

/// Same ratio built from g instead of f; defined for every family, and the
/// only version available for Tukey and the improper LPTN.
double g_limit_ratio(const ErrorModel& model, const Eigen::VectorXd& beta, double sigma,
                     const Eigen::VectorXd& x, double y);

enum class Direction { kPositive, kNegative };

/// Drags `target_rows` away from the bulk fit along `magnitudes` (in units
/// of the bulk scale) and refits every model at each step.
struct PathExperiment {
  Dataset base_data;
  std::vector<Eigen::Index> target_rows;
  std::vector<double> magnitudes;
  Direction direction = Direction::kPositive;
  std::vector<ErrorModel> model_set;
  PriorSpec prior = PriorSpec::flat();
  MapOptions map_options;
  /// Tight by default so that fits sharing a fixed point agree to ~1e-13.
  IrlsOptions irls_options{1e-13, 5000, std::nullopt, std::nullopt};
};

struct PathRecord {
  std::string model;
  double magnitude = 0.0;
  Eigen::VectorXd beta_hat;
  double sigma_hat = 0.0;
  std::vector<double> target_weights;
  std::vector<double> target_std_residuals;
  /// limit_ratio at the first target; NaN for improper families.
  double ratio = 0.0;
  /// g_limit_ratio at the first target, for every family.
  double g_ratio = 0.0;
  bool converged = false;
  /// Non-empty when the refit failed; the estimates are then unset.
  std::string error;
};

struct PathTrace {
  Eigen::VectorXd bulk_beta;
  double bulk_sigma = 0.0;
  /// Ordered model-major: all magnitudes of model_set[0] first.
  std::vector<PathRecord> records;

  /// Records of one model (by ErrorModel::describe()) in magnitude order.
  std::vector<const PathRecord*> for_model(const std::string& model) const;
};

/// Validates the experiment (strictly increasing positive magnitudes,
/// distinct valid targets, non-empty model set) and runs it. The bulk fit is
/// OLS on the data without the targets. Refit failures are recorded in the
/// trace, not thrown.
PathTrace run_path(const PathExperiment& exp);

struct WithWithout {
  double delta_beta_l1 = 0.0;
  Eigen::VectorXd per_coef;  // reduced minus full
  FitResult full;
  FitResult reduced;
};

/// Fits `model` (via fit_model) on the full data and without `outlier_rows`.
/// Throws DataError if the reduced design loses rank.
WithWithout compare_with_without(const Dataset& data, const std::vector<Eigen::Index>& outlier_rows,
                                 const ErrorModel& model, const PriorSpec& prior,
                                 const MapOptions& opts = {});

}  // namespace robreg
