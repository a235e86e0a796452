#pragma once

#include <cstdint>
#include <functional>

#include <Eigen/Dense>

namespace robreg {

struct SimplexOptions {
  /// Converged when max f - min f over the simplex is at most f_tol ...
  double f_tol = 1e-10;
  /// ... and every vertex lies within x_tol (sup norm) of the best one.
  double x_tol = 1e-8;
  long max_evaluations = 400000;
  /// Restarts from a randomly perturbed simplex around the incumbent.
  int restarts = 3;
  /// Extra restarts allowed while restarts keep improving by more than f_tol.
  int max_extra_restarts = 12;
  std::uint64_t seed = 0;
};

struct SimplexResult {
  Eigen::VectorXd x;
  double value = 0.0;
  long evaluations = 0;
  int iterations = 0;
  bool converged = false;
};

/// Minimizes `f` by Nelder-Mead with dimension-adaptive coefficients
/// (Gao & Han 2012). Non-finite objective values are treated as +infinity.
/// `step` gives the initial simplex edge along each coordinate.
SimplexResult nelder_mead_minimize(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x0, const Eigen::VectorXd& step,
                                   const SimplexOptions& options = {});

}  // namespace robreg
