#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace robreg {

enum class Family { kNormal, kHuber, kTukeyBiweight, kStudentT, kLptn, kImproperLptn };

std::string_view family_name(Family family);
/// Accepts the names produced by family_name plus a few aliases
/// ("tukey", "t", "student"). Throws UsageError on anything else.
Family parse_family(std::string_view name);

inline constexpr double kDefaultHuberK = 1.345;
inline constexpr double kDefaultTukeyK = 4.685;
inline constexpr double kDefaultStudentNu = 4.0;
inline constexpr double kDefaultLptnRho = 0.9;

struct LptnHyperparams {
  double tau;
  double lambda;
};

/// Lower end of the admissible rho interval, 2*Phi(1) - 1.
double lptn_rho_lower_bound();

/// tau = Phi^-1((1 + rho)/2), lambda = 1 + 2 phi(tau) tau log(tau) / (1 - rho).
/// Throws DomainError("rho out of admissible range") outside (2Phi(1)-1, 1).
LptnHyperparams lptn_hyperparams(double rho);

/// A standardized error distribution (possibly improper) identified by its
/// family and hyperparameters. Immutable; build through the named factories.
///
/// Conventions: rho_fn is the loss on standardized residuals, psi_fn its
/// derivative up to the family constant, and log_g = -rho_fn / 2 for every
/// family except Tukey's biweight, where log_g = -rho_fn. Proper families
/// carry log_m so that log_density = log_g - log_m integrates to one.
class ErrorModel {
 public:
  static ErrorModel normal();
  static ErrorModel huber(double k = kDefaultHuberK);
  static ErrorModel tukey_biweight(double k = kDefaultTukeyK);
  static ErrorModel student_t(double nu = kDefaultStudentNu);
  static ErrorModel lptn(double rho = kDefaultLptnRho);
  /// lambda = 1 with tau taken from the proper model at the same rho.
  static ErrorModel improper_lptn_from_rho(double rho = kDefaultLptnRho);
  /// lambda = 1 with tau > 1 supplied directly.
  static ErrorModel improper_lptn(double tau);

  /// Builds a model of `family` from the single tuning value that family
  /// uses (k, nu, rho, or rho for ImproperLPTN); NaN selects the default.
  static ErrorModel from_family(Family family, double tuning);

  Family family() const { return family_; }
  double k() const { return k_; }
  double nu() const { return nu_; }
  double rho() const { return rho_; }
  double tau() const { return tau_; }
  double lambda() const { return lambda_; }
  const std::optional<double>& log_m() const { return log_m_; }
  bool is_proper() const { return log_m_.has_value(); }

  /// Loss applied to a standardized residual; even, rho(0) = 0.
  double rho_fn(double eps) const;
  /// Odd score function; the closed forms use the "<=" branch at +-k, +-tau.
  double psi_fn(double eps) const;
  /// psi(eps)/eps, with psi'(0) = 1 at the origin. Values lie in [0, 1].
  double weight_fn(double eps) const;
  double log_g(double eps) const;
  /// Throws DomainError("improper model has no density") for Tukey and
  /// ImproperLPTN.
  double log_density(double eps) const;

  /// One-line description, e.g. "lptn(rho=0.9, tau=..., lambda=...)".
  std::string describe() const;

  /// Flat key/value record: family plus k, nu, rho, tau, lambda (only the
  /// keys the family uses). Numbers are formatted for exact round trips.
  std::map<std::string, std::string> to_record() const;
  static ErrorModel from_record(const std::map<std::string, std::string>& record);

  friend bool operator==(const ErrorModel&, const ErrorModel&) = default;

 private:
  ErrorModel() = default;

  Family family_ = Family::kNormal;
  double k_ = 0.0;
  double nu_ = 0.0;
  double rho_ = 0.0;
  double tau_ = 0.0;
  double lambda_ = 0.0;
  std::optional<double> log_m_;
};

/// |f(tau-) - f(tau+)| from the two branches of the LPTN density (g for the
/// improper variant). Throws DomainError for other families.
double lptn_continuity_check(const ErrorModel& model);

}  // namespace robreg
