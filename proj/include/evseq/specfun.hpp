#pragma once

namespace evseq::specfun {

/// Degrees of freedom and noncentrality of a noncentral Student-t law.
class NoncentralTParams {
 public:
  /// Throws DomainError unless nu > 0 and both values are finite.
  NoncentralTParams(double nu, double lambda);

  double nu() const { return nu_; }
  double lambda() const { return lambda_; }

 private:
  double nu_;
  double lambda_;
};

/// ln Gamma(x) for x > 0.
double log_gamma(double x);

/// Standard normal CDF.
double norm_cdf(double x);

/// ln Phi(x), accurate in the far left tail where Phi underflows.
double log_norm_cdf(double x);

/// Log-density of the noncentral t distribution at t.
double nct_logpdf(double t, const NoncentralTParams& params);

/// ln[f_{T(nu, lambda_plus)}(t) / f_{T(nu, lambda_0)}(t)].
///
/// t may be +/-infinity, in which case the limit of the ratio is returned.
double nct_logratio(double t, double nu, double lambda_plus, double lambda_0);

/// Log-density at q of s * chi-square(nu).
double chisq_scaled_logpdf(double q, double nu, double s);

namespace detail {

/// ln S(nu, x) with S(nu, x) = sum_j Gamma((nu+j+1)/2) x^j / j!
///                           = 2 * int_0^inf r^nu exp(-r^2 + x r) dr.
///
/// This is the only lambda-dependent factor of the noncentral t density.
double log_kernel_sum(double nu, double x);

/// The series route of log_kernel_sum. Returns false if the series cannot
/// deliver full accuracy (term cap reached or cancellation too severe).
bool log_kernel_series(double nu, double x, double& out);

/// The quadrature route of log_kernel_sum; valid for every x.
double log_kernel_quadrature(double nu, double x);

}  // namespace detail

}  // namespace evseq::specfun
