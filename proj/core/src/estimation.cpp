#include "robreg/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <random>

#include "robreg/error.hpp"
#include "robreg/format.hpp"
#include "robreg/special_functions.hpp"

namespace robreg {

namespace {

constexpr double kMadConsistency = 1.4826;

double median_of(std::vector<double> v) {
  const auto n = v.size();
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (n % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

// Log prior density of (beta, sigma) with the Cholesky factor cached.
class PriorDensity {
 public:
  PriorDensity(const PriorSpec& prior, Eigen::Index p) : prior_(prior) {
    if (prior.is_flat()) return;
    if (prior.mu_beta.size() != p || prior.sigma_beta.rows() != p ||
        prior.sigma_beta.cols() != p) {
      throw DomainError("NIG prior dimension does not match the number of coefficients");
    }
    llt_.compute(prior.sigma_beta);
    if (llt_.info() != Eigen::Success) throw DomainError("NIG prior covariance is not positive definite");
    const Eigen::VectorXd diag = llt_.matrixL().toDenseMatrix().diagonal();
    log_det_ = 2.0 * diag.array().log().sum();
    const double a = prior.ig_shape;
    const double b = prior.ig_scale;
    constant_ = -0.5 * static_cast<double>(p) * std::log(2.0 * special::kPi) - 0.5 * log_det_ +
                a * std::log(b) - special::log_gamma(a) + std::log(2.0);
  }

  double operator()(const Eigen::VectorXd& beta, double sigma) const {
    if (prior_.is_flat()) return 0.0;
    const double p = static_cast<double>(beta.size());
    const Eigen::VectorXd diff = beta - prior_.mu_beta;
    const double quad = diff.dot(llt_.solve(diff));
    const double s2 = sigma * sigma;
    // beta | sigma term, then sigma^2 ~ IG(a, b) with the d(sigma^2)/d(sigma)
    // Jacobian folded into constant_ and the trailing log(sigma).
    return constant_ - p * std::log(sigma) - 0.5 * quad / s2 -
           (prior_.ig_shape + 1.0) * std::log(s2) - prior_.ig_scale / s2 + std::log(sigma);
  }

 private:
  const PriorSpec& prior_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double log_det_ = 0.0;
  double constant_ = 0.0;
};

double log_lik_unchecked(const Dataset& data, const ErrorModel& model,
                         const Eigen::VectorXd& beta, double sigma) {
  const Eigen::VectorXd r = data.y() - data.X() * beta;
  const double shift = model.is_proper() ? *model.log_m() : 0.0;
  double total = -static_cast<double>(data.n()) * std::log(sigma);
  for (Eigen::Index i = 0; i < r.size(); ++i) total += model.log_g(r(i) / sigma) - shift;
  return total;
}

// Weighted least squares; nullopt if the weighted design loses rank.
std::optional<Eigen::VectorXd> weighted_ls(const Dataset& data, const Eigen::VectorXd& w) {
  const Eigen::ArrayXd sw = w.array().sqrt();
  const Eigen::MatrixXd Xw = data.X().array().colwise() * sw;
  const Eigen::VectorXd yw = data.y().array() * sw;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xw);
  if (qr.rank() < data.p()) return std::nullopt;
  return Eigen::VectorXd(qr.solve(yw));
}

void fill_diagnostics(const Dataset& data, const ErrorModel& model, FitResult& fit) {
  const Eigen::VectorXd r = data.y() - data.X() * fit.beta_hat;
  fit.std_residuals = fit.sigma_hat > 0.0 ? Eigen::VectorXd(r / fit.sigma_hat)
                                          : Eigen::VectorXd::Zero(r.size());
  fit.weights.resize(r.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    fit.weights(i) = model.weight_fn(fit.std_residuals(i));
  }
}

FitResult irls_single(const Dataset& data, const ErrorModel& model, const IrlsOptions& opts,
                      const Eigen::VectorXd& start) {
  Eigen::VectorXd beta = start;
  bool converged = false;
  int iter = 0;
  std::vector<std::string> warnings;
  const auto scale_of = [&](const Eigen::VectorXd& r) {
    return opts.fixed_scale ? *opts.fixed_scale : mad_scale(r);
  };
  for (iter = 1; iter <= opts.max_iter; ++iter) {
    const Eigen::VectorXd r = data.y() - data.X() * beta;
    const double sigma = scale_of(r);
    if (!(sigma > 0.0)) {
      throw DataError("degenerate scale: the MAD of the residuals is zero");
    }
    Eigen::VectorXd w(r.size());
    for (Eigen::Index i = 0; i < r.size(); ++i) w(i) = model.weight_fn(r(i) / sigma);
    const auto next = weighted_ls(data, w);
    if (!next) {
      warnings.emplace_back("weighted design lost rank; returning the previous iterate");
      break;
    }
    const double change =
        ((*next - beta).array().abs() / (1.0 + beta.array().abs())).maxCoeff();
    beta = *next;
    if (change <= opts.tol) {
      converged = true;
      break;
    }
  }
  if (!converged && warnings.empty())
    warnings.emplace_back("IRLS did not converge within " + std::to_string(opts.max_iter) +
                          " iterations");
  FitResult fit;
  fit.beta_hat = beta;
  fit.sigma_hat = scale_of(data.y() - data.X() * beta);
  if (!(fit.sigma_hat > 0.0)) throw DataError("degenerate scale: the MAD of the residuals is zero");
  fit.method = "irls";
  fit.model = model.describe();
  fit.converged = converged;
  fit.iterations = std::min(iter, opts.max_iter);
  fit.objective = log_lik_unchecked(data, model, fit.beta_hat, fit.sigma_hat);
  fit.sigma_fixed = opts.fixed_scale.has_value();
  fit.warnings = std::move(warnings);
  fill_diagnostics(data, model, fit);
  return fit;
}

// beta = origin + transform * z, with transform = sigma_ols * R^-1 from the QR
// of X, so that z has roughly unit, uncorrelated sampling spread. The simplex
// runs in z.
struct Whitening {
  Eigen::VectorXd origin;
  Eigen::MatrixXd transform;
  Eigen::MatrixXd inverse;

  Whitening(const Dataset& data, const FitResult& ols) : origin(ols.beta_hat) {
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(data.X());
    const Eigen::MatrixXd R =
        qr.matrixQR().topRows(data.p()).triangularView<Eigen::Upper>();
    double scale = ols.sigma_hat;
    if (!(scale > 0.0)) scale = 1e-3 * (1.0 + ols.beta_hat.cwiseAbs().maxCoeff());
    inverse = R / scale;
    transform = inverse.triangularView<Eigen::Upper>().solve(
        Eigen::MatrixXd::Identity(data.p(), data.p()));
  }

  Eigen::VectorXd to_beta(const Eigen::VectorXd& z) const { return origin + transform * z; }
  Eigen::VectorXd to_z(const Eigen::VectorXd& beta) const { return inverse * (beta - origin); }
};

// -d log g / d eps divided by eps. W carries a family constant for
// Student t ((nu + 1) / nu) and Tukey (6 / k^2); it is W itself otherwise.
double score_weight(const ErrorModel& model, double eps) {
  const double w = model.weight_fn(eps);
  switch (model.family()) {
    case Family::kStudentT:
      return w * (model.nu() + 1.0) / model.nu();
    case Family::kTukeyBiweight:
      return w * 6.0 / (model.k() * model.k());
    default:
      return w;
  }
}

// Reweighting iteration towards a stationary point of the likelihood:
// weighted least squares for beta, then sigma^2 = sum w r^2 / n. Used only
// to screen random starts, so failures just return nullopt.
std::optional<std::pair<Eigen::VectorXd, double>> reweight_to_stationary(
    const Dataset& data, const ErrorModel& model, Eigen::VectorXd beta, double sigma,
    bool update_sigma, int max_iter) {
  const auto n = static_cast<double>(data.n());
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd r = data.y() - data.X() * beta;
    Eigen::VectorXd w(r.size());
    for (Eigen::Index i = 0; i < r.size(); ++i) w(i) = score_weight(model, r(i) / sigma);
    if (!w.allFinite() || w.sum() <= 0.0) return std::nullopt;
    auto next = weighted_ls(data, w);
    if (!next) return std::nullopt;
    double next_sigma = sigma;
    if (update_sigma) {
      const Eigen::VectorXd rn = data.y() - data.X() * *next;
      next_sigma = std::sqrt((w.array() * rn.array().square()).sum() / n);
      if (!(next_sigma > 0.0) || !std::isfinite(next_sigma)) return std::nullopt;
    }
    const double step = std::max((*next - beta).cwiseAbs().maxCoeff(), std::abs(next_sigma - sigma));
    beta = std::move(*next);
    sigma = next_sigma;
    if (step < 1e-12) break;
  }
  return std::make_pair(std::move(beta), sigma);
}

}  // namespace

PriorSpec PriorSpec::flat() { return {}; }

PriorSpec PriorSpec::nig(Eigen::VectorXd mu_beta, Eigen::MatrixXd sigma_beta, double ig_shape,
                         double ig_scale) {
  if (sigma_beta.rows() != sigma_beta.cols() || sigma_beta.rows() != mu_beta.size()) {
    throw DomainError("NIG prior: mean and covariance dimensions disagree");
  }
  if (!sigma_beta.isApprox(sigma_beta.transpose(), 1e-12)) {
    throw DomainError("NIG prior: covariance must be symmetric");
  }
  if (Eigen::LLT<Eigen::MatrixXd>(sigma_beta).info() != Eigen::Success) {
    throw DomainError("NIG prior: covariance must be positive definite");
  }
  if (!(ig_shape > 0.0) || !(ig_scale > 0.0)) {
    throw DomainError("NIG prior: inverse-gamma shape and scale must be positive");
  }
  PriorSpec prior;
  prior.kind = Kind::kNig;
  prior.mu_beta = std::move(mu_beta);
  prior.sigma_beta = std::move(sigma_beta);
  prior.ig_shape = ig_shape;
  prior.ig_scale = ig_scale;
  return prior;
}

PriorSpec PriorSpec::diffuse_nig(Eigen::Index p) {
  return nig(Eigen::VectorXd::Zero(p), 100.0 * Eigen::MatrixXd::Identity(p, p), 0.01, 0.01);
}

double mad_scale(const Eigen::VectorXd& residuals) {
  if (residuals.size() == 0) throw DataError("MAD of an empty vector");
  std::vector<double> v(residuals.data(), residuals.data() + residuals.size());
  const double med = median_of(v);
  for (auto& x : v) x = std::abs(x - med);
  return kMadConsistency * median_of(std::move(v));
}

double log_likelihood(const Dataset& data, const ErrorModel& model, const Eigen::VectorXd& beta,
                      double sigma) {
  if (!(sigma > 0.0)) throw DomainError("sigma must be positive");
  return log_lik_unchecked(data, model, beta, sigma);
}

double log_posterior(const Dataset& data, const ErrorModel& model, const PriorSpec& prior,
                     const Eigen::VectorXd& beta, double sigma) {
  if (!(sigma > 0.0)) throw DomainError("sigma must be positive");
  const PriorDensity log_prior(prior, data.p());
  return log_prior(beta, sigma) + log_lik_unchecked(data, model, beta, sigma);
}

FitResult fit_ols(const Dataset& data) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(data.X());
  if (qr.rank() < data.p()) throw DataError("design matrix is rank deficient");
  FitResult fit;
  fit.beta_hat = qr.solve(data.y());
  const Eigen::VectorXd r = data.y() - data.X() * fit.beta_hat;
  const double rss = r.squaredNorm();
  const auto dof = data.n() - data.p();
  fit.sigma_hat = dof > 0 ? std::sqrt(rss / static_cast<double>(dof)) : 0.0;
  fit.std_residuals = fit.sigma_hat > 0.0 ? Eigen::VectorXd(r / fit.sigma_hat)
                                          : Eigen::VectorXd::Zero(r.size());
  fit.weights = Eigen::VectorXd::Ones(data.n());
  const double sigma_ml = std::sqrt(rss / static_cast<double>(data.n()));
  fit.objective = sigma_ml > 0.0
                      ? log_lik_unchecked(data, ErrorModel::normal(), fit.beta_hat, sigma_ml)
                      : std::numeric_limits<double>::infinity();
  fit.method = "ols";
  fit.model = "normal";
  fit.converged = true;
  fit.iterations = 1;
  return fit;
}

Eigen::VectorXd ols_standard_errors(const Dataset& data, const FitResult& ols) {
  const Eigen::MatrixXd xtx = data.X().transpose() * data.X();
  const Eigen::MatrixXd inv = xtx.llt().solve(Eigen::MatrixXd::Identity(data.p(), data.p()));
  return ols.sigma_hat * inv.diagonal().cwiseSqrt();
}

FitResult fit_m_irls(const Dataset& data, const ErrorModel& model, const IrlsOptions& opts) {
  if (model.family() == Family::kNormal) {
    throw DomainError("fit_m_irls needs a robust family; use fit_ols for the normal model");
  }
  if (opts.fixed_scale && !(*opts.fixed_scale > 0.0)) {
    throw DomainError("fixed scale must be positive");
  }
  const Eigen::VectorXd ols_start = opts.start ? *opts.start : fit_ols(data).beta_hat;
  if (model.family() != Family::kTukeyBiweight) {
    return irls_single(data, model, opts, ols_start);
  }

  // Non-convex loss: keep the better of the OLS- and Huber-started runs.
  FitResult from_ols = irls_single(data, model, opts, ols_start);
  from_ols.multistart_record.push_back(
      {"ols", from_ols.objective, from_ols.converged, ""});
  FitResult best = from_ols;
  try {
    const FitResult huber = irls_single(data, ErrorModel::huber(), opts, ols_start);
    FitResult from_huber = irls_single(data, model, opts, huber.beta_hat);
    best.multistart_record.push_back(
        {"huber_irls", from_huber.objective, from_huber.converged, ""});
    if (from_huber.objective > best.objective) {
      from_huber.multistart_record = best.multistart_record;
      best = std::move(from_huber);
    }
  } catch (const DataError& e) {
    best.multistart_record.push_back({"huber_irls", std::numeric_limits<double>::quiet_NaN(),
                                      false, e.what()});
  }
  return best;
}

FitResult fit_map(const Dataset& data, const ErrorModel& model, const PriorSpec& prior,
                  const MapOptions& opts) {
  const PriorDensity log_prior(prior, data.p());
  std::vector<std::string> warnings;

  std::optional<double> fixed_sigma = opts.fixed_sigma;
  if (!fixed_sigma && !model.is_proper() && prior.is_flat()) {
    fixed_sigma = fit_m_irls(data, model).sigma_hat;
    warnings.push_back("flat prior with an improper model: sigma held at the MAD-based IRLS scale " +
                       format_double(*fixed_sigma));
  }
  if (fixed_sigma && !(*fixed_sigma > 0.0)) throw DomainError("fixed sigma must be positive");

  const FitResult ols = fit_ols(data);
  struct Start {
    std::string tag;
    Eigen::VectorXd beta;
    double sigma;
  };
  std::vector<Start> starts;
  std::vector<MultistartEntry> record;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  {
    const double rss = (data.y() - data.X() * ols.beta_hat).squaredNorm();
    starts.push_back({"ols", ols.beta_hat, std::sqrt(rss / static_cast<double>(data.n()))});
  }
  const std::pair<const char*, ErrorModel> robust_starts[] = {
      {"huber_irls", ErrorModel::huber()}, {"tukey_irls", ErrorModel::tukey_biweight()}};
  for (const auto& [tag, start_model] : robust_starts) {
    try {
      const FitResult f = fit_m_irls(data, start_model);
      starts.push_back({tag, f.beta_hat, f.sigma_hat});
    } catch (const Error& e) {
      record.push_back({tag, nan, false, std::string("start unavailable: ") + e.what()});
    }
  }

  const Eigen::Index p = data.p();
  const bool free_sigma = !fixed_sigma.has_value();
  const auto unpack_sigma = [&](const Eigen::VectorXd& theta) {
    return free_sigma ? std::exp(theta(p)) : *fixed_sigma;
  };
  const Whitening white(data, ols);
  const auto objective = [&](const Eigen::VectorXd& theta) {
    const double sigma = unpack_sigma(theta);
    if (!(sigma > 0.0) || !std::isfinite(sigma)) return std::numeric_limits<double>::infinity();
    const Eigen::VectorXd beta = white.to_beta(theta.head(p));
    return -(log_prior(beta, sigma) + log_lik_unchecked(data, model, beta, sigma));
  };

  Eigen::VectorXd steps = Eigen::VectorXd::Ones(free_sigma ? p + 1 : p);
  if (free_sigma) steps(p) = 0.1;

  // Screen seeded random starts: perturb a robust start in whitened
  // coordinates, move it to a stationary point, and keep the best few.
  const std::size_t fixed_starts = starts.size();
  if (opts.random_starts > 0 && opts.polish_top > 0 && fixed_starts > 0) {
    std::mt19937_64 rng(opts.simplex.seed ^ 0x5bd1e995ULL);
    std::normal_distribution<double> gauss(0.0, 1.0);
    struct Candidate {
      double value;
      int index;
      Eigen::VectorXd beta;
      double sigma;
    };
    std::vector<Candidate> pool;
    for (int i = 0; i < opts.random_starts; ++i) {
      const Start& base = starts[fixed_starts > 1 ? 1 + static_cast<std::size_t>(i) % (fixed_starts - 1) : 0];
      Eigen::VectorXd z(p);
      for (Eigen::Index j = 0; j < p; ++j) z(j) = gauss(rng);
      const double log_jitter = 0.3 * gauss(rng);
      Eigen::VectorXd beta = base.beta + white.transform * z;
      double sigma = free_sigma ? base.sigma * std::exp(log_jitter) : *fixed_sigma;
      if (!(sigma > 0.0)) continue;
      if (auto moved = reweight_to_stationary(data, model, beta, sigma, free_sigma, 3000)) {
        beta = std::move(moved->first);
        sigma = moved->second;
      }
      Eigen::VectorXd theta(steps.size());
      theta.head(p) = white.to_z(beta);
      if (free_sigma) theta(p) = std::log(sigma);
      const double v = objective(theta);
      if (std::isfinite(v)) pool.push_back({v, i, std::move(beta), sigma});
    }
    std::sort(pool.begin(), pool.end(),
              [](const Candidate& a, const Candidate& b) { return a.value < b.value; });
    int taken = 0;
    double last = std::numeric_limits<double>::quiet_NaN();
    for (auto& c : pool) {
      if (taken >= opts.polish_top) break;
      if (std::abs(c.value - last) <= 1e-6) continue;
      last = c.value;
      starts.push_back({"random_" + std::to_string(c.index), std::move(c.beta), c.sigma});
      ++taken;
    }
  }

  std::optional<SimplexResult> best;
  std::size_t best_start = 0;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    const Start& st = starts[s];
    Eigen::VectorXd theta0(steps.size());
    theta0.head(p) = white.to_z(st.beta);
    if (free_sigma) {
      if (!(st.sigma > 0.0)) {
        record.push_back({st.tag, nan, false, "skipped: start has zero scale"});
        continue;
      }
      theta0(p) = std::log(st.sigma);
    }
    if (!std::isfinite(objective(theta0))) {
      record.push_back({st.tag, nan, false, "skipped: non-finite objective at start"});
      continue;
    }
    SimplexOptions so = opts.simplex;
    so.seed = opts.simplex.seed + static_cast<std::uint64_t>(s);
    SimplexResult res = nelder_mead_minimize(objective, theta0, steps, so);
    record.push_back({st.tag, -res.value, res.converged, ""});
    if (!best || res.value < best->value) {
      best = std::move(res);
      best_start = s;
    }
  }
  if (!best || !std::isfinite(best->value)) {
    throw ConvergenceError("fit_map: no start produced a finite objective");
  }

  FitResult fit;
  fit.beta_hat = white.to_beta(best->x.head(p));
  fit.sigma_hat = unpack_sigma(best->x);
  fit.objective = -best->value;
  fit.method = "map";
  fit.model = model.describe();
  fit.converged = best->converged;
  fit.iterations = best->iterations;
  fit.sigma_fixed = !free_sigma;
  fit.multistart_record = std::move(record);
  fit.warnings = std::move(warnings);
  if (!fit.converged) {
    fit.warnings.push_back("simplex search from start '" + starts[best_start].tag +
                           "' did not meet its tolerance");
  }
  fill_diagnostics(data, model, fit);
  return fit;
}

FitResult fit_model(const Dataset& data, const ErrorModel& model, const PriorSpec& prior,
                    const MapOptions& map_opts, const IrlsOptions& irls_opts) {
  switch (model.family()) {
    case Family::kNormal:
      return fit_ols(data);
    case Family::kHuber:
    case Family::kTukeyBiweight:
      return fit_m_irls(data, model, irls_opts);
    case Family::kStudentT:
    case Family::kLptn:
    case Family::kImproperLptn:
      return fit_map(data, model, prior, map_opts);
  }
  throw DomainError("unknown family");
}

ProfileResult profile_hyperparam(const Dataset& data, Family family,
                                 const std::vector<double>& grid, const PriorSpec& prior,
                                 const MapOptions& opts) {
  if (grid.empty()) throw DomainError("profile grid is empty");
  if (family != Family::kLptn && family != Family::kStudentT) {
    throw DomainError("profiling is defined for the LPTN (rho) and Student t (nu) families");
  }
  std::vector<ErrorModel> models;
  models.reserve(grid.size());
  for (const double v : grid) {
    // Factories reject out-of-range values.
    models.push_back(family == Family::kLptn ? ErrorModel::lptn(v) : ErrorModel::student_t(v));
  }

  std::vector<std::future<FitResult>> jobs;
  jobs.reserve(models.size());
  for (const auto& m : models) {
    jobs.push_back(std::async(std::launch::async,
                              [&data, &prior, &opts, m] { return fit_map(data, m, prior, opts); }));
  }

  ProfileResult out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    FitResult fit = jobs[i].get();
    out.table.push_back({grid[i], fit.objective, std::move(fit)});
  }
  const ProfileRow* best = nullptr;
  for (const auto& row : out.table) {
    if (!best || row.objective > best->objective ||
        (row.objective == best->objective && row.value < best->value)) {
      best = &row;
    }
  }
  out.best = best->value;
  return out;
}

std::vector<double> make_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw UsageError("grid needs lo <= hi and a positive step");
  }
  const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(count));
  for (long i = 0; i < count; ++i) {
    const double v = lo + static_cast<double>(i) * step;
    grid.push_back(std::round(v * 1e10) / 1e10);
  }
  return grid;
}

}  // namespace robreg
