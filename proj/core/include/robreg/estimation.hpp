#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "robreg/design.hpp"
#include "robreg/error_model.hpp"
#include "robreg/nelder_mead.hpp"

namespace robreg {

/// Prior on (beta, sigma): flat, or beta | sigma ~ N(mu, sigma^2 Sigma) with
/// sigma^2 ~ InvGamma(shape, scale).
struct PriorSpec {
  enum class Kind { kFlat, kNig };

  Kind kind = Kind::kFlat;
  Eigen::VectorXd mu_beta;
  Eigen::MatrixXd sigma_beta;
  double ig_shape = 0.0;
  double ig_scale = 0.0;

  static PriorSpec flat();
  /// Validates symmetry, positive definiteness and positive IG parameters.
  static PriorSpec nig(Eigen::VectorXd mu_beta, Eigen::MatrixXd sigma_beta, double ig_shape,
                       double ig_scale);
  /// mu = 0, Sigma = 100 I, shape = scale = 0.01.
  static PriorSpec diffuse_nig(Eigen::Index p);

  bool is_flat() const { return kind == Kind::kFlat; }
};

struct MultistartEntry {
  std::string start;
  double objective = 0.0;
  bool converged = false;
  std::string note;
};

struct FitResult {
  Eigen::VectorXd beta_hat;
  double sigma_hat = 0.0;
  Eigen::VectorXd weights;
  Eigen::VectorXd std_residuals;
  /// Maximized objective: the log-likelihood for OLS/IRLS (log g for
  /// improper families), the log posterior for MAP.
  double objective = 0.0;
  std::string method;
  std::string model;
  bool converged = false;
  int iterations = 0;
  bool sigma_fixed = false;
  std::vector<MultistartEntry> multistart_record;
  std::vector<std::string> warnings;

  Eigen::VectorXd fitted(const Dataset& data) const { return data.X() * beta_hat; }
};

struct IrlsOptions {
  double tol = 1e-10;
  int max_iter = 500;
  /// Starting coefficients; OLS when absent.
  std::optional<Eigen::VectorXd> start;
  /// Holds the scale at this value instead of re-estimating the MAD.
  std::optional<double> fixed_scale;
};

struct MapOptions {
  SimplexOptions simplex;
  /// Holds sigma at this value instead of optimizing it.
  std::optional<double> fixed_sigma;
  /// Optional extra starts drawn around the robust starts (seeded from
  /// simplex.seed). Each is first moved to a stationary point of the
  /// likelihood by reweighting; the best `polish_top` distinct ones are then
  /// refined. Off by default: the standard set is OLS, Huber and Tukey.
  int random_starts = 0;
  int polish_top = 3;
};

/// Normal-consistent MAD: 1.4826 * median |r - median(r)|.
double mad_scale(const Eigen::VectorXd& residuals);

/// Eq. for the homoscedastic model: -n log sigma + sum log f(r_i / sigma),
/// with log g in place of log f for improper families. Throws DomainError
/// for sigma <= 0.
double log_likelihood(const Dataset& data, const ErrorModel& model, const Eigen::VectorXd& beta,
                      double sigma);

/// log prior(beta, sigma) + log_likelihood; the prior density is taken with
/// respect to (beta, sigma). Throws DomainError for sigma <= 0.
double log_posterior(const Dataset& data, const ErrorModel& model, const PriorSpec& prior,
                     const Eigen::VectorXd& beta, double sigma);

/// Least squares through column-pivoted Householder QR;
/// sigma_hat = sqrt(RSS / (n - p)), weights all one.
FitResult fit_ols(const Dataset& data);

/// sigma_hat * sqrt(diag((X'X)^-1)) for an OLS fit.
Eigen::VectorXd ols_standard_errors(const Dataset& data, const FitResult& ols);

/// M-estimation by iteratively reweighted least squares with the MAD scale
/// re-estimated every iteration. Tukey's biweight is run from the OLS and the
/// Huber solutions and the run with the larger objective is kept.
///
/// Throws DataError when the MAD of the residuals is zero.
FitResult fit_m_irls(const Dataset& data, const ErrorModel& model, const IrlsOptions& opts = {});

/// Maximizes log_posterior over (beta, log sigma) by simplex search started
/// from the OLS, Huber-IRLS and Tukey-IRLS estimates (plus optional seeded
/// random starts, see MapOptions). With a flat prior and
/// an improper family, sigma is held at the model's IRLS (MAD) scale.
/// Throws ConvergenceError if no start yields a finite objective.
FitResult fit_map(const Dataset& data, const ErrorModel& model, const PriorSpec& prior,
                  const MapOptions& opts = {});

/// The estimator each family stands for: OLS for Normal, IRLS for Huber and
/// Tukey, MAP under `prior` for Student t and both LPTN variants.
FitResult fit_model(const Dataset& data, const ErrorModel& model, const PriorSpec& prior,
                    const MapOptions& map_opts = {}, const IrlsOptions& irls_opts = {});

struct ProfileRow {
  double value = 0.0;
  double objective = 0.0;
  FitResult fit;
};

struct ProfileResult {
  double best = 0.0;
  std::vector<ProfileRow> table;
};

/// Fits MAP for each hyperparameter value (rho for LPTN, nu for Student t)
/// using the normalized density, and returns the maximizer. Ties go to the
/// smaller value. Grid points are fitted concurrently.
ProfileResult profile_hyperparam(const Dataset& data, Family family,
                                 const std::vector<double>& grid, const PriorSpec& prior,
                                 const MapOptions& opts = {});

/// Inclusive arithmetic grid lo, lo+step, ..., hi (rounded to the step).
std::vector<double> make_grid(double lo, double hi, double step);

}  // namespace robreg
