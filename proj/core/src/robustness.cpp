#include "robreg/robustness.hpp"

#include <cmath>
#include <future>
#include <limits>
#include <set>

#include "robreg/error.hpp"

namespace robreg {

double coefficient_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw DomainError("coefficient vectors differ in length");
  return (a - b).cwiseAbs().sum();
}

namespace {

void check_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("sigma must be positive");
}

double location(const Eigen::VectorXd& beta, const Eigen::VectorXd& x) {
  if (beta.size() != x.size()) throw DomainError("beta and x differ in length");
  return x.dot(beta);
}

}  // namespace

double limit_ratio(const ErrorModel& model, const Eigen::VectorXd& beta, double sigma,
                   const Eigen::VectorXd& x, double y) {
  if (!model.is_proper()) throw DomainError("limit ratio needs a proper density");
  check_sigma(sigma);
  const double eps = (y - location(beta, x)) / sigma;
  return std::exp(model.log_density(eps) - std::log(sigma) - model.log_density(y));
}

double g_limit_ratio(const ErrorModel& model, const Eigen::VectorXd& beta, double sigma,
                     const Eigen::VectorXd& x, double y) {
  check_sigma(sigma);
  const double eps = (y - location(beta, x)) / sigma;
  return std::exp(model.log_g(eps) - std::log(sigma) - model.log_g(y));
}

std::vector<const PathRecord*> PathTrace::for_model(const std::string& model) const {
  std::vector<const PathRecord*> out;
  for (const auto& r : records)
    if (r.model == model) out.push_back(&r);
  return out;
}

PathTrace run_path(const PathExperiment& exp) {
  const Dataset& data = exp.base_data;
  if (exp.model_set.empty()) throw UsageError("path experiment needs at least one model");
  if (exp.target_rows.empty()) throw UsageError("path experiment needs at least one target");
  if (exp.magnitudes.empty()) throw UsageError("path experiment needs at least one magnitude");
  std::set<Eigen::Index> seen;
  for (auto r : exp.target_rows) {
    if (r < 0 || r >= data.n()) throw UsageError("target row out of range");
    if (!seen.insert(r).second) throw UsageError("target rows must be distinct");
  }
  for (std::size_t i = 0; i < exp.magnitudes.size(); ++i) {
    const double m = exp.magnitudes[i];
    if (!(m > 0.0) || !std::isfinite(m)) throw UsageError("magnitudes must be positive");
    if (i > 0 && !(m > exp.magnitudes[i - 1]))
      throw UsageError("magnitudes must be strictly increasing");
  }

  const FitResult bulk = fit_ols(data.without_rows(exp.target_rows));
  PathTrace trace;
  trace.bulk_beta = bulk.beta_hat;
  trace.bulk_sigma = bulk.sigma_hat;
  const double sign = exp.direction == Direction::kPositive ? 1.0 : -1.0;
  const Eigen::VectorXd x0 = data.X().row(exp.target_rows.front()).transpose();

  auto refit = [&](const ErrorModel& model, double mag) {
    PathRecord rec;
    rec.model = model.describe();
    rec.magnitude = mag;
    Eigen::VectorXd y = data.y();
    for (auto r : exp.target_rows)
      y(r) = data.X().row(r).dot(bulk.beta_hat) + sign * mag * bulk.sigma_hat;
    try {
      const Dataset moved = data.with_response(std::move(y));
      FitResult fit = fit_model(moved, model, exp.prior, exp.map_options, exp.irls_options);
      for (auto r : exp.target_rows) {
        rec.target_weights.push_back(fit.weights(r));
        rec.target_std_residuals.push_back(fit.std_residuals(r));
      }
      const double y0 = moved.y()(exp.target_rows.front());
      rec.ratio = model.is_proper() ? limit_ratio(model, fit.beta_hat, fit.sigma_hat, x0, y0)
                                    : std::numeric_limits<double>::quiet_NaN();
      rec.g_ratio = g_limit_ratio(model, fit.beta_hat, fit.sigma_hat, x0, y0);
      rec.beta_hat = std::move(fit.beta_hat);
      rec.sigma_hat = fit.sigma_hat;
      rec.converged = fit.converged;
    } catch (const std::exception& e) {
      rec.error = e.what();
    }
    return rec;
  };

  std::vector<std::future<PathRecord>> jobs;
  for (const auto& model : exp.model_set)
    for (double mag : exp.magnitudes)
      jobs.push_back(std::async(std::launch::async, refit, std::cref(model), mag));
  for (auto& j : jobs) trace.records.push_back(j.get());
  return trace;
}

WithWithout compare_with_without(const Dataset& data, const std::vector<Eigen::Index>& outlier_rows,
                                 const ErrorModel& model, const PriorSpec& prior,
                                 const MapOptions& opts) {
  WithWithout out;
  out.full = fit_model(data, model, prior, opts);
  if (outlier_rows.empty()) {
    out.reduced = out.full;
  } else {
    out.reduced = fit_model(data.without_rows(outlier_rows), model, prior, opts);
  }
  out.per_coef = out.reduced.beta_hat - out.full.beta_hat;
  out.delta_beta_l1 = out.per_coef.cwiseAbs().sum();
  return out;
}

}  // namespace robreg
