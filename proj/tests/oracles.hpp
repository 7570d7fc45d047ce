#pragma once

// Reference computations used only by the tests. None of them share code
// paths with the library.

#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/non_central_t.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace oracle {

/// Noncentral t density as a normal/chi-square mixture:
///   f(t) = int_0^inf sqrt(v/nu) phi(t sqrt(v/nu) - lambda) f_{chi2_nu}(v) dv,
/// with v = w^2 to remove the endpoint singularity at nu < 2.
inline double nct_pdf_mixture(double t, double nu, double lambda) {
  const double log_norm = -0.5 * nu * std::numbers::ln2 - boost::math::lgamma(0.5 * nu) -
                          0.5 * std::log(2.0 * std::numbers::pi);
  auto log_integrand = [&](double w) {
    const double v = w * w;
    const double s = w / std::sqrt(nu);
    const double z = t * s - lambda;
    // chi2 density in v times dv/dw = 2w, times sqrt(v/nu) phi(z).
    return log_norm + (0.5 * nu - 1.0) * std::log(v) - 0.5 * v + std::log(2.0 * w) +
           std::log(s) - 0.5 * z * z;
  };
  // Scale by the integrand maximum, located on a coarse grid.
  double peak = -std::numeric_limits<double>::infinity();
  for (double w = 1e-3; w < 60.0; w *= 1.01) peak = std::max(peak, log_integrand(w));
  auto f = [&](double w) {
    if (!(w > 0.0) || !(w * w > 0.0) || !std::isfinite(w * w)) return 0.0;
    const double v = std::exp(log_integrand(w) - peak);
    return std::isfinite(v) ? v : 0.0;
  };
  boost::math::quadrature::exp_sinh<double> integrator;
  double err = 0.0;
  const double v = integrator.integrate(f, 0.0, std::numeric_limits<double>::infinity(), 1e-14, &err);
  return std::exp(peak) * v;
}

inline double nct_pdf_boost(double t, double nu, double lambda) {
  return boost::math::pdf(boost::math::non_central_t(nu, lambda), t);
}

inline double chisq_scaled_logpdf_boost(double q, double nu, double s) {
  return std::log(boost::math::pdf(boost::math::chi_squared(nu), q / s)) - std::log(s);
}

/// Maclaurin series of erf in long double, adequate for |x| <= 3.
inline long double erf_series(long double x) {
  long double term = x;
  long double sum = x;
  for (int n = 1; n < 200; ++n) {
    term *= -x * x / n;
    const long double add = term / (2 * n + 1);
    sum += add;
    if (std::abs(add) < 1e-30L) break;
  }
  return sum * 2.0L / std::sqrt(std::numbers::pi_v<long double>);
}

inline long double norm_cdf_series(long double x) {
  return 0.5L * (1.0L + erf_series(x / std::numbers::sqrt2_v<long double>));
}

/// One-sample t-statistic from raw data, two-pass.
inline double t_statistic_raw(std::span<const double> y) {
  const double n = static_cast<double>(y.size());
  long double mean = 0.0L;
  for (double v : y) mean += v;
  mean /= n;
  long double ss = 0.0L;
  for (double v : y) ss += (v - mean) * (v - mean);
  const long double sd = std::sqrt(ss / (n - 1.0));
  return static_cast<double>(std::sqrt(static_cast<long double>(n)) * mean / sd);
}

/// Log likelihood ratio of the t-statistic with the mixture density.
inline double t_log_evalue_raw(std::span<const double> y, double delta0, double delta_plus) {
  const double t = t_statistic_raw(y);
  const double nu = static_cast<double>(y.size()) - 1.0;
  const double rn = std::sqrt(static_cast<double>(y.size()));
  return std::log(nct_pdf_mixture(t, nu, rn * delta_plus)) -
         std::log(nct_pdf_mixture(t, nu, rn * delta0));
}

struct OlsT {
  double t;
  double dof;
  double b_norm;  ///< norm of x residualized on z
};

/// Classical OLS t-statistic of the x coefficient in y ~ x + z (no intercept
/// unless z carries one), via column-pivoted QR. Requires full column rank.
inline OlsT ols_t(const Eigen::MatrixXd& z, const Eigen::VectorXd& y, const Eigen::VectorXd& x) {
  const auto n = y.size();
  const auto d = z.cols();
  Eigen::MatrixXd m(n, d + 1);
  m.col(0) = x;
  if (d > 0) m.rightCols(d) = z;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
  const Eigen::VectorXd beta = qr.solve(y);
  const Eigen::VectorXd resid = y - m * beta;
  const double dof = static_cast<double>(n - d - 1);
  const double s2 = resid.squaredNorm() / dof;
  const Eigen::MatrixXd inv = (m.transpose() * m).inverse();
  const double se = std::sqrt(s2 * inv(0, 0));
  Eigen::VectorXd xr = x;
  if (d > 0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> zq(z);
    xr = x - z * zq.solve(x);
  }
  return {beta(0) / se, dof, xr.norm()};
}

}  // namespace oracle
