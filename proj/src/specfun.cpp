#include "evseq/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "evseq/errors.hpp"
#include "evseq/quadrature.hpp"

namespace evseq::specfun {
namespace {

constexpr int kMaxSeriesTerms = 10000;
constexpr double kSeriesRelativeCutoff = 1e-17;
// Largest tolerated ratio sum|terms| / |sum| in the alternating series.
constexpr double kMaxCancellation = 1e4;
// A priori cancellation estimate (log scale) above which the series is skipped.
constexpr double kMaxLogCancellationEstimate = 7.0;
constexpr double kRescaleThreshold = 1e200;

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw DomainError(std::string(what) + " must be finite");
}

// Peak of r^nu exp(-r^2 + x r) on r > 0.
double kernel_peak(double nu, double x) {
  const double root = std::sqrt(x * x + 8.0 * nu);
  return x >= 0.0 ? (x + root) / 4.0 : 2.0 * nu / (root - x);
}

double kernel_log_integrand(double nu, double x, double r) {
  return nu * std::log(r) - r * r + x * r;
}

// t * sqrt(2) / sqrt(nu + t^2), with the +/-infinity limits.
double kernel_argument_scale(double t, double nu) {
  if (std::isinf(t)) return std::copysign(std::numbers::sqrt2, t);
  if (std::abs(t) > 1.0) {
    return std::copysign(std::numbers::sqrt2 / std::sqrt(1.0 + nu / (t * t)), t);
  }
  return t * std::numbers::sqrt2 / std::sqrt(nu + t * t);
}

// ln(nu + t^2) without overflow for huge |t|.
double log_nu_plus_t2(double nu, double t) {
  if (std::abs(t) > 1e100) return 2.0 * std::log(std::abs(t)) + std::log1p(nu / (t * t));
  return std::log(nu + t * t);
}

}  // namespace

NoncentralTParams::NoncentralTParams(double nu, double lambda) : nu_(nu), lambda_(lambda) {
  if (!(nu > 0.0) || !std::isfinite(nu)) throw DomainError("noncentral t: nu must be finite and > 0");
  require_finite(lambda, "noncentral t: lambda");
}

double log_gamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("log_gamma: x must be finite and > 0");
  // lgamma is only thread-unsafe through signgam, which is irrelevant for x > 0
  // on glibc; the value itself is what we rely on.
  return std::lgamma(x);
}

double norm_cdf(double x) {
  require_finite(x, "norm_cdf: x");
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double log_norm_cdf(double x) {
  require_finite(x, "log_norm_cdf: x");
  if (x > -20.0) return std::log(norm_cdf(x));
  // Mills-ratio asymptotic series: Phi(x) = phi(x)/|x| * (1 - 1/x^2 + 3/x^4 - ...).
  const double inv2 = 1.0 / (x * x);
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 12; ++k) {
    term *= -(2.0 * k - 1.0) * inv2;
    sum += term;
  }
  return -0.5 * x * x - std::log(-x) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(sum);
}

namespace detail {

bool log_kernel_series(double nu, double x, double& out) {
  if (x == 0.0) {
    out = std::lgamma(0.5 * (nu + 1.0));
    return true;
  }
  const double ax = std::abs(x);
  const double x2 = x * x;

  // b_j = Gamma((nu+j+1)/2) |x|^j / j!, tracked relative to exp(scale).
  const double lb0 = std::lgamma(0.5 * (nu + 1.0));
  const double lb1 = std::lgamma(0.5 * (nu + 2.0)) + std::log(ax);
  double scale = std::max(lb0, lb1);
  double chain[2] = {std::exp(lb0 - scale), std::exp(lb1 - scale)};
  double pos = 0.0;
  double neg = 0.0;
  int quiet_terms = 0;
  bool done = false;

  for (int j = 0; j < kMaxSeriesTerms; ++j) {
    double& term = chain[j % 2];
    if (x < 0.0 && j % 2 == 1) {
      neg += term;
    } else {
      pos += term;
    }
    const double ratio = x2 * 0.5 * (nu + j + 1.0) / ((j + 1.0) * (j + 2.0));
    const bool small = term < kSeriesRelativeCutoff * (pos + neg);
    term *= ratio;
    if (small && ratio < 1.0) {
      if (++quiet_terms >= 2) {
        done = true;
        break;
      }
    } else {
      quiet_terms = 0;
    }
    if (term > kRescaleThreshold) {
      const double f = 1.0 / kRescaleThreshold;
      chain[0] *= f;
      chain[1] *= f;
      pos *= f;
      neg *= f;
      scale += std::log(kRescaleThreshold);
    }
  }
  if (!done) return false;

  const double sum = pos - neg;
  if (!(sum > 0.0) || pos + neg > kMaxCancellation * sum) return false;
  out = scale + std::log(sum);
  return true;
}

double log_kernel_quadrature(double nu, double x) {
  const double peak = kernel_peak(nu, x);
  const double log_peak = kernel_log_integrand(nu, x, peak);
  const double width = 1.0 / std::sqrt(nu / (peak * peak) + 2.0);

  // g'' <= -2 everywhere, so the integrand is dominated by a Gaussian of
  // variance 1/2 around the peak; 8.5 units covers e^-72 of it.
  const double lo = std::max(0.0, peak - 8.5);
  const double hi = peak + 8.5;
  std::vector<double> cuts = {lo};
  for (double k : {-10.0, -4.0, -1.0, 0.0, 1.0, 4.0, 10.0}) {
    const double c = peak + k * width;
    if (c > cuts.back() && c < hi) cuts.push_back(c);
  }
  cuts.push_back(hi);

  auto integrand = [&](double r) {
    if (r <= 0.0) return 0.0;
    return std::exp(kernel_log_integrand(nu, x, r) - log_peak);
  };
  quadrature::Options opts;
  opts.rel_tol = 1e-13;
  opts.abs_tol = 1e-15 * width;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const auto r = quadrature::integrate(integrand, cuts[i], cuts[i + 1], opts);
    if (!r.converged) {
      throw NumericalError("noncentral t kernel quadrature did not converge (nu=" +
                           std::to_string(nu) + ", x=" + std::to_string(x) +
                           ", error=" + std::to_string(r.abs_error) + ")");
    }
    total += r.value;
  }
  return std::log(2.0) + log_peak + std::log(total);
}

double log_kernel_sum(double nu, double x) {
  if (x < 0.0) {
    // Laplace estimate of ln S(|x|) - ln S(x): digits lost to alternation.
    const double up = kernel_log_integrand(nu, -x, kernel_peak(nu, -x));
    const double down = kernel_log_integrand(nu, x, kernel_peak(nu, x));
    if (up - down > kMaxLogCancellationEstimate) return log_kernel_quadrature(nu, x);
  }
  double out = 0.0;
  if (log_kernel_series(nu, x, out)) return out;
  return log_kernel_quadrature(nu, x);
}

}  // namespace detail

double nct_logpdf(double t, const NoncentralTParams& params) {
  require_finite(t, "nct_logpdf: t");
  const double nu = params.nu();
  const double lambda = params.lambda();
  const double x = lambda * kernel_argument_scale(t, nu);
  return 0.5 * nu * std::log(nu) - 0.5 * lambda * lambda - 0.5 * std::log(std::numbers::pi) -
         std::lgamma(0.5 * nu) - 0.5 * (nu + 1.0) * log_nu_plus_t2(nu, t) +
         detail::log_kernel_sum(nu, x);
}

double nct_logratio(double t, double nu, double lambda_plus, double lambda_0) {
  if (std::isnan(t)) throw DomainError("nct_logratio: t is NaN");
  if (!(nu > 0.0) || !std::isfinite(nu)) throw DomainError("nct_logratio: nu must be finite and > 0");
  require_finite(lambda_plus, "nct_logratio: lambda_plus");
  require_finite(lambda_0, "nct_logratio: lambda_0");
  if (lambda_plus == lambda_0) return 0.0;
  const double s = kernel_argument_scale(t, nu);
  return -0.5 * (lambda_plus - lambda_0) * (lambda_plus + lambda_0) +
         detail::log_kernel_sum(nu, lambda_plus * s) - detail::log_kernel_sum(nu, lambda_0 * s);
}

double chisq_scaled_logpdf(double q, double nu, double s) {
  if (!(q > 0.0) || !(nu > 0.0) || !(s > 0.0) || !std::isfinite(q) || !std::isfinite(nu) ||
      !std::isfinite(s)) {
    throw DomainError("chisq_scaled_logpdf: q, nu and s must be finite and > 0");
  }
  const double y = q / s;
  return (0.5 * nu - 1.0) * std::log(y) - 0.5 * y - 0.5 * nu * std::numbers::ln2 -
         std::lgamma(0.5 * nu) - std::log(s);
}

}  // namespace evseq::specfun
