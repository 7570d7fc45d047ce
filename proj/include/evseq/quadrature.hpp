#pragma once

#include <cstddef>
#include <functional>

namespace evseq::quadrature {

struct Result {
  double value = 0.0;
  double abs_error = 0.0;
  std::size_t evaluations = 0;
  std::size_t intervals = 0;
  bool converged = false;
};

struct Options {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  std::size_t max_intervals = 4000;
};

/// Adaptive 15-point Gauss-Kronrod on a finite interval [a, b].
///
/// The interval with the largest error estimate is bisected until the total
/// estimated error drops below max(abs_tol, rel_tol * |value|) or the interval
/// budget is exhausted. Never throws on non-convergence; callers inspect
/// `converged` and decide.
Result integrate(const std::function<double(double)>& f, double a, double b,
                 const Options& options = {});

}  // namespace evseq::quadrature
