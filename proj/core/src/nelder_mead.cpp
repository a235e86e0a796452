#include "robreg/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "robreg/error.hpp"

namespace robreg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Run {
  Eigen::VectorXd x;
  double value;
  int iterations;
  bool converged;
};

class Simplex {
 public:
  Simplex(const std::function<double(const Eigen::VectorXd&)>& f, long& evals, long max_evals)
      : f_(f), evals_(evals), max_evals_(max_evals) {}

  double eval(const Eigen::VectorXd& x) {
    ++evals_;
    const double v = f_(x);
    return std::isfinite(v) ? v : kInf;
  }

  Run run(const Eigen::VectorXd& x0, const Eigen::VectorXd& step, const SimplexOptions& opt) {
    const auto dim = x0.size();
    const double nd = static_cast<double>(dim);
    // Adaptive coefficients reduce to the classic (1, 2, 0.5, 0.5) at n = 2.
    const double na = std::max(nd, 2.0);
    const double alpha = 1.0;
    const double gamma = 1.0 + 2.0 / na;
    const double beta = 0.75 - 1.0 / (2.0 * na);
    const double delta = 1.0 - 1.0 / na;

    std::vector<Eigen::VectorXd> pts(static_cast<std::size_t>(dim + 1), x0);
    std::vector<double> vals(pts.size());
    for (Eigen::Index j = 0; j < dim; ++j) pts[static_cast<std::size_t>(j + 1)](j) += step(j);
    for (std::size_t i = 0; i < pts.size(); ++i) vals[i] = eval(pts[i]);

    std::vector<std::size_t> order(pts.size());
    int iter = 0;
    bool converged = false;
    while (evals_ < max_evals_) {
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
      const std::size_t best = order.front();
      const std::size_t worst = order.back();
      const std::size_t second = order[order.size() - 2];

      double spread_x = 0.0;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        spread_x = std::max(spread_x, (pts[i] - pts[best]).lpNorm<Eigen::Infinity>());
      }
      if (std::isfinite(vals[worst]) && vals[worst] - vals[best] <= opt.f_tol &&
          spread_x <= opt.x_tol) {
        converged = true;
        break;
      }
      ++iter;

      Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
      for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i != worst) centroid += pts[i];
      }
      centroid /= nd;

      const Eigen::VectorXd xr = centroid + alpha * (centroid - pts[worst]);
      const double fr = eval(xr);
      if (fr < vals[best]) {
        const Eigen::VectorXd xe = centroid + gamma * (xr - centroid);
        const double fe = eval(xe);
        if (fe < fr) {
          pts[worst] = xe;
          vals[worst] = fe;
        } else {
          pts[worst] = xr;
          vals[worst] = fr;
        }
        continue;
      }
      if (fr < vals[second]) {
        pts[worst] = xr;
        vals[worst] = fr;
        continue;
      }
      const bool outside = fr < vals[worst];
      const Eigen::VectorXd xc = outside ? Eigen::VectorXd(centroid + beta * (xr - centroid))
                                         : Eigen::VectorXd(centroid + beta * (pts[worst] - centroid));
      const double fc = eval(xc);
      if (fc < (outside ? fr : vals[worst])) {
        pts[worst] = xc;
        vals[worst] = fc;
        continue;
      }
      for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i == best) continue;
        pts[i] = pts[best] + delta * (pts[i] - pts[best]);
        vals[i] = eval(pts[i]);
      }
    }
    const auto best_it = std::min_element(vals.begin(), vals.end());
    const auto b = static_cast<std::size_t>(best_it - vals.begin());
    return {pts[b], vals[b], iter, converged};
  }

 private:
  const std::function<double(const Eigen::VectorXd&)>& f_;
  long& evals_;
  long max_evals_;
};

}  // namespace

SimplexResult nelder_mead_minimize(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x0, const Eigen::VectorXd& step,
                                   const SimplexOptions& options) {
  if (x0.size() == 0 || step.size() != x0.size()) {
    throw DomainError("nelder_mead: starting point and step sizes must match and be non-empty");
  }
  long evals = 0;
  Simplex simplex(f, evals, options.max_evaluations);
  Run best = simplex.run(x0, step, options);
  int iterations = best.iterations;

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> scale(0.5, 1.5);
  std::bernoulli_distribution flip(0.5);
  const int max_rounds = options.restarts + options.max_extra_restarts;
  for (int round = 0; round < max_rounds && evals < options.max_evaluations; ++round) {
    Eigen::VectorXd perturbed(step.size());
    for (Eigen::Index j = 0; j < step.size(); ++j) {
      perturbed(j) = step(j) * scale(rng) * (flip(rng) ? -1.0 : 1.0);
    }
    Run next = simplex.run(best.x, perturbed, options);
    iterations += next.iterations;
    const double gain = best.value - next.value;
    if (next.value <= best.value) best = next;
    if (round + 1 >= options.restarts && !(gain > options.f_tol)) break;
  }

  SimplexResult out;
  out.x = best.x;
  out.value = best.value;
  out.evaluations = evals;
  out.iterations = iterations;
  out.converged = best.converged && std::isfinite(best.value);
  return out;
}

}  // namespace robreg
