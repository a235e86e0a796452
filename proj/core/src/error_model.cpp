#include "robreg/error_model.hpp"

#include <charconv>
#include <cmath>
#include <limits>

#include "robreg/error.hpp"
#include "robreg/format.hpp"
#include "robreg/special_functions.hpp"

namespace robreg {

namespace sp = special;

std::string_view family_name(Family family) {
  switch (family) {
    case Family::kNormal: return "normal";
    case Family::kHuber: return "huber";
    case Family::kTukeyBiweight: return "tukey_biweight";
    case Family::kStudentT: return "student_t";
    case Family::kLptn: return "lptn";
    case Family::kImproperLptn: return "improper_lptn";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  if (name == "normal" || name == "ols") return Family::kNormal;
  if (name == "huber") return Family::kHuber;
  if (name == "tukey_biweight" || name == "tukey" || name == "biweight") {
    return Family::kTukeyBiweight;
  }
  if (name == "student_t" || name == "student" || name == "t") return Family::kStudentT;
  if (name == "lptn") return Family::kLptn;
  if (name == "improper_lptn") return Family::kImproperLptn;
  throw UsageError("unknown error-model family '" + std::string(name) + "'");
}

double lptn_rho_lower_bound() { return 2.0 * sp::normal_cdf(1.0) - 1.0; }

LptnHyperparams lptn_hyperparams(double rho) {
  if (!(rho > lptn_rho_lower_bound() && rho < 1.0)) {
    throw DomainError("rho out of admissible range (2*Phi(1)-1, 1)");
  }
  const double tau = sp::normal_quantile(0.5 * (1.0 + rho));
  const double lambda = 1.0 + 2.0 / (1.0 - rho) * sp::normal_pdf(tau) * tau * std::log(tau);
  return {tau, lambda};
}

ErrorModel ErrorModel::normal() {
  ErrorModel m;
  m.family_ = Family::kNormal;
  m.log_m_ = sp::kLogSqrt2Pi;
  return m;
}

ErrorModel ErrorModel::huber(double k) {
  if (!(k > 0.0) || !std::isfinite(k)) throw DomainError("huber: k must be positive");
  ErrorModel m;
  m.family_ = Family::kHuber;
  m.k_ = k;
  const double mass = 2.0 * std::exp(-0.5 * k * k) / k +
                      sp::kSqrt2Pi * (2.0 * sp::normal_cdf(k) - 1.0);
  m.log_m_ = std::log(mass);
  return m;
}

ErrorModel ErrorModel::tukey_biweight(double k) {
  if (!(k > 0.0) || !std::isfinite(k)) throw DomainError("tukey_biweight: k must be positive");
  ErrorModel m;
  m.family_ = Family::kTukeyBiweight;
  m.k_ = k;
  return m;
}

ErrorModel ErrorModel::student_t(double nu) {
  if (!(nu > 0.0) || !std::isfinite(nu)) throw DomainError("student_t: nu must be positive");
  ErrorModel m;
  m.family_ = Family::kStudentT;
  m.nu_ = nu;
  m.log_m_ = 0.5 * std::log(sp::kPi * nu) + sp::log_gamma(0.5 * nu) -
             sp::log_gamma(0.5 * (nu + 1.0));
  return m;
}

ErrorModel ErrorModel::lptn(double rho) {
  const auto [tau, lambda] = lptn_hyperparams(rho);
  ErrorModel m;
  m.family_ = Family::kLptn;
  m.rho_ = rho;
  m.tau_ = tau;
  m.lambda_ = lambda;
  // g = sqrt(2 pi) f, so that log g = -rho_fn / 2 on the whole line.
  m.log_m_ = sp::kLogSqrt2Pi;
  return m;
}

ErrorModel ErrorModel::improper_lptn_from_rho(double rho) {
  ErrorModel m = improper_lptn(lptn_hyperparams(rho).tau);
  m.rho_ = rho;
  return m;
}

ErrorModel ErrorModel::improper_lptn(double tau) {
  if (!(tau > 1.0) || !std::isfinite(tau)) throw DomainError("improper_lptn: tau must exceed 1");
  ErrorModel m;
  m.family_ = Family::kImproperLptn;
  m.rho_ = 2.0 * sp::normal_cdf(tau) - 1.0;
  m.tau_ = tau;
  m.lambda_ = 1.0;
  return m;
}

ErrorModel ErrorModel::from_family(Family family, double tuning) {
  const bool dflt = std::isnan(tuning);
  switch (family) {
    case Family::kNormal: return normal();
    case Family::kHuber: return huber(dflt ? kDefaultHuberK : tuning);
    case Family::kTukeyBiweight: return tukey_biweight(dflt ? kDefaultTukeyK : tuning);
    case Family::kStudentT: return student_t(dflt ? kDefaultStudentNu : tuning);
    case Family::kLptn: return lptn(dflt ? kDefaultLptnRho : tuning);
    case Family::kImproperLptn:
      return improper_lptn_from_rho(dflt ? kDefaultLptnRho : tuning);
  }
  throw UsageError("unknown family");
}

double ErrorModel::rho_fn(double eps) const {
  const double a = std::abs(eps);
  switch (family_) {
    case Family::kNormal:
      return eps * eps;
    case Family::kHuber:
      return a <= k_ ? eps * eps : 2.0 * k_ * a - k_ * k_;
    case Family::kTukeyBiweight: {
      if (a > k_) return 1.0;
      const double u = 1.0 - (eps / k_) * (eps / k_);
      return 1.0 - u * u * u;
    }
    case Family::kStudentT:
      return (nu_ + 1.0) * std::log1p(eps * eps / nu_);
    case Family::kLptn:
    case Family::kImproperLptn:
      if (a <= tau_) return eps * eps;
      return tau_ * tau_ - 2.0 * std::log(tau_) + 2.0 * std::log(a) -
             2.0 * lambda_ * std::log(std::log(tau_)) +
             2.0 * lambda_ * std::log(std::log(a));
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double ErrorModel::psi_fn(double eps) const {
  const double a = std::abs(eps);
  switch (family_) {
    case Family::kNormal:
      return eps;
    case Family::kHuber:
      return a <= k_ ? eps : std::copysign(k_, eps);
    case Family::kTukeyBiweight: {
      if (a > k_) return 0.0;
      const double u = 1.0 - (eps / k_) * (eps / k_);
      return eps * u * u;
    }
    case Family::kStudentT:
      return eps / (1.0 + eps * eps / nu_);
    case Family::kLptn:
    case Family::kImproperLptn:
      if (a <= tau_) return eps;
      return 1.0 / eps + lambda_ / (eps * std::log(a));
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double ErrorModel::weight_fn(double eps) const {
  const double a = std::abs(eps);
  switch (family_) {
    case Family::kNormal:
      return 1.0;
    case Family::kHuber:
      return a <= k_ ? 1.0 : k_ / a;
    case Family::kTukeyBiweight: {
      if (a > k_) return 0.0;
      const double u = 1.0 - (eps / k_) * (eps / k_);
      return u * u;
    }
    case Family::kStudentT:
      return 1.0 / (1.0 + eps * eps / nu_);
    case Family::kLptn:
    case Family::kImproperLptn:
      if (a <= tau_) return 1.0;
      return 1.0 / (eps * eps) + lambda_ / (eps * eps * std::log(a));
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double ErrorModel::log_g(double eps) const {
  if (family_ == Family::kTukeyBiweight) return -rho_fn(eps);
  return -0.5 * rho_fn(eps);
}

double ErrorModel::log_density(double eps) const {
  if (!log_m_) throw DomainError("improper model has no density");
  return log_g(eps) - *log_m_;
}

std::string ErrorModel::describe() const {
  const auto shortest = [](double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
  };
  std::string out(family_name(family_));
  switch (family_) {
    case Family::kNormal:
      break;
    case Family::kHuber:
    case Family::kTukeyBiweight:
      out += "(k=" + shortest(k_) + ")";
      break;
    case Family::kStudentT:
      out += "(nu=" + shortest(nu_) + ")";
      break;
    case Family::kLptn:
    case Family::kImproperLptn:
      out += "(rho=" + shortest(rho_) + ")";
      break;
  }
  return out;
}

std::map<std::string, std::string> ErrorModel::to_record() const {
  std::map<std::string, std::string> rec;
  rec["family"] = std::string(family_name(family_));
  switch (family_) {
    case Family::kNormal:
      break;
    case Family::kHuber:
    case Family::kTukeyBiweight:
      rec["k"] = format_double(k_);
      break;
    case Family::kStudentT:
      rec["nu"] = format_double(nu_);
      break;
    case Family::kLptn:
    case Family::kImproperLptn:
      rec["rho"] = format_double(rho_);
      rec["tau"] = format_double(tau_);
      rec["lambda"] = format_double(lambda_);
      break;
  }
  return rec;
}

ErrorModel ErrorModel::from_record(const std::map<std::string, std::string>& record) {
  const auto field = [&](const char* key) -> std::optional<double> {
    const auto it = record.find(key);
    if (it == record.end()) return std::nullopt;
    return parse_double(it->second);
  };
  const auto fam = record.find("family");
  if (fam == record.end()) throw UsageError("model record lacks 'family'");
  const Family family = parse_family(fam->second);
  switch (family) {
    case Family::kNormal: return normal();
    case Family::kHuber: return huber(field("k").value_or(kDefaultHuberK));
    case Family::kTukeyBiweight: return tukey_biweight(field("k").value_or(kDefaultTukeyK));
    case Family::kStudentT: return student_t(field("nu").value_or(kDefaultStudentNu));
    case Family::kLptn: return lptn(field("rho").value_or(kDefaultLptnRho));
    case Family::kImproperLptn: {
      if (const auto tau = field("tau")) {
        ErrorModel m = improper_lptn(*tau);
        if (const auto rho = field("rho")) m.rho_ = *rho;
        return m;
      }
      return improper_lptn_from_rho(field("rho").value_or(kDefaultLptnRho));
    }
  }
  throw UsageError("unknown family");
}

double lptn_continuity_check(const ErrorModel& model) {
  if (model.family() != Family::kLptn && model.family() != Family::kImproperLptn) {
    throw DomainError("continuity check applies to LPTN families only");
  }
  const double tau = model.tau();
  const double lambda = model.lambda();
  const double central = sp::normal_pdf(tau);
  const double tail = sp::normal_pdf(tau) * (tau / tau) *
                      std::pow(std::log(tau) / std::log(tau), lambda);
  return std::abs(central - tail);
}

}  // namespace robreg
