#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <unordered_map>

#include "evseq/quadrature.hpp"
#include "evseq/specfun.hpp"
#include "internal.hpp"

namespace evseq::verify {
namespace {

constexpr double kTailStart = 50.0;

quadrature::Options evariable_tolerance() {
  quadrature::Options opt;
  opt.abs_tol = 1e-13;
  opt.rel_tol = 1e-12;
  opt.max_intervals = 4000;
  return opt;
}

void require_converged(const quadrature::Result& r, const char* piece, double nu, double lambda) {
  if (r.converged) return;
  std::ostringstream msg;
  msg << "e-variable quadrature did not converge on " << piece << " (nu=" << nu
      << ", lambda=" << lambda << ", estimate=" << r.value << ", error=" << r.abs_error
      << ", intervals=" << r.intervals << ")";
  throw NumericalError(msg.str());
}

long double bern_log_likelihood_ld(long double n, long double T, long double theta) {
  const long double lt = std::log(theta);
  const long double l1t = std::log1p(-theta);
  const long double a = T * lt + (n - T) * l1t;
  const long double b = T * l1t + (n - T) * lt;
  const long double hi = std::max(a, b);
  const long double lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

}  // namespace

std::vector<MlrViolation> mlr_grid_check(double nu, double lambda_plus, double lambda_0,
                                         std::span<const double> grid, double slack) {
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw ContractError("mlr_grid_check: grid must be strictly ascending");
  }
  std::vector<MlrViolation> out;
  double prev = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double cur = specfun::nct_logratio(grid[i], nu, lambda_plus, lambda_0);
    if (i > 0 && cur < prev - slack) out.push_back({i - 1, grid[i - 1], grid[i], prev - cur});
    prev = cur;
  }
  return out;
}

std::vector<double> uniform_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw ContractError("uniform_grid: need lo <= hi and step > 0");
  }
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> g(count);
  for (std::size_t i = 0; i < count; ++i) g[i] = lo + static_cast<double>(i) * step;
  return g;
}

std::vector<EVariablePoint> evariable_quadrature_check(double nu, double lambda_plus,
                                                       double lambda_0,
                                                       std::span<const double> lambda_true_grid) {
  if (!(nu > 0.0) || !std::isfinite(nu) || !std::isfinite(lambda_plus) || !std::isfinite(lambda_0)) {
    throw ContractError("evariable_quadrature_check: nu > 0 and finite noncentralities required");
  }
  const auto opt = evariable_tolerance();
  std::vector<EVariablePoint> out;
  for (double lambda : lambda_true_grid) {
    if (!std::isfinite(lambda)) throw ContractError("evariable_quadrature_check: grid must be finite");
    const specfun::NoncentralTParams truth(nu, lambda);
    auto integrand = [&](double t) {
      return std::exp(specfun::nct_logpdf(t, truth) +
                      specfun::nct_logratio(t, nu, lambda_plus, lambda_0));
    };

    std::vector<double> cuts = {-kTailStart, -20.0, -10.0, -5.0, -2.0, 0.0,
                                2.0,         5.0,   10.0,  20.0, kTailStart};
    for (double c : {lambda - 2.0, lambda, lambda + 2.0}) {
      if (c > -kTailStart && c < kTailStart) cuts.push_back(c);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    double h = 0.0;
    double err = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const auto r = quadrature::integrate(integrand, cuts[i], cuts[i + 1], opt);
      require_converged(r, "the central range", nu, lambda);
      h += r.value;
      err += r.abs_error;
    }
    // Tails beyond +/-50 through t = +/-50/s, s in (0, 1].
    for (double sign : {-1.0, 1.0}) {
      auto mapped = [&](double s) {
        return integrand(sign * kTailStart / s) * kTailStart / (s * s);
      };
      const auto r = quadrature::integrate(mapped, 0.0, 1.0, opt);
      require_converged(r, sign < 0 ? "the left tail" : "the right tail", nu, lambda);
      h += r.value;
      err += r.abs_error;
    }
    out.push_back({lambda, h, err});
  }
  return out;
}

double rademacher_exact_expectation(std::size_t n, double delta) {
  if (n < 2 || n > 20) throw ConfigError("rademacher enumeration needs 2 <= n <= 20");
  if (!std::isfinite(delta)) throw ConfigError("rademacher enumeration needs a finite delta");
  const TTest model;
  const auto spec = EffectSpec::point(0.0, delta);
  // The process value depends on the path only through sum_u.
  std::unordered_map<long, double> cache;
  long double total = 0.0L;
  const std::uint32_t paths = 1u << n;
  for (std::uint32_t mask = 0; mask < paths; ++mask) {
    auto state = start(model);
    for (std::size_t i = 0; i < n; ++i) {
      state.model = model.update(state.model, (mask >> i) & 1u ? 1.0 : -1.0);
    }
    const long key = std::lround(state.model.sum_u);
    auto it = cache.find(key);
    if (it == cache.end()) {
      it = cache.emplace(key, std::exp(process_log_evalue(model, state.model, spec))).first;
    }
    total += it->second;
  }
  return static_cast<double>(total / static_cast<long double>(paths));
}

TaylorFit taylor_coeff_fit(std::size_t n, std::span<const double> deltas) {
  TaylorFit fit;
  fit.n = n;
  fit.deltas.assign(deltas.begin(), deltas.end());
  if (fit.deltas.size() < 3) throw ConfigError("taylor fit needs at least 3 deltas");
  for (double d : fit.deltas) {
    if (!(d > 0.0 && d <= 0.3)) throw ConfigError("taylor fit deltas must lie in (0, 0.3]");
  }
  auto sorted = fit.deltas;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ConfigError("taylor fit deltas must be distinct");
  }

  std::vector<double> x;
  std::vector<double> p;
  for (double d : fit.deltas) {
    const double e = rademacher_exact_expectation(n, d);
    fit.expectations.push_back(e);
    const double scaled = (e - 1.0) / (d * d * d * d);
    fit.scaled_excess.push_back(scaled);
    x.push_back(d * d);
    p.push_back(scaled);
  }
  // Neville's scheme evaluated at delta^2 = 0.
  for (std::size_t level = 1; level < x.size(); ++level) {
    for (std::size_t i = 0; i + level < x.size(); ++i) {
      const double xi = x[i];
      const double xj = x[i + level];
      p[i] = (xj * p[i] - xi * p[i + 1]) / (xj - xi);
    }
  }
  fit.coefficient = p[0];
  if (!std::isfinite(fit.coefficient)) throw NumericalError("taylor fit: extrapolation is not finite");
  fit.target = static_cast<double>(n - 1) / 6.0;
  fit.relative_error = std::abs(fit.coefficient - fit.target) / fit.target;
  fit.passed = fit.relative_error <= 0.05;
  return fit;
}

double bern_mixed_partial_fd(double n, double T, double theta) {
  if (!(theta > 0.5 && theta < 1.0)) throw ContractError("mixed partial needs theta in (1/2, 1)");
  const long double h = std::min(1e-4, (1.0 - theta) / 4.0);
  const long double k = 0.05L;
  const long double ln = n, lT = T, lth = theta;
  const long double v = bern_log_likelihood_ld(ln, lT + k, lth + h) -
                        bern_log_likelihood_ld(ln, lT - k, lth + h) -
                        bern_log_likelihood_ld(ln, lT + k, lth - h) +
                        bern_log_likelihood_ld(ln, lT - k, lth - h);
  return static_cast<double>(v / (4.0L * h * k));
}

std::vector<PositivityViolation> bern_positivity_check(std::span<const double> theta_grid,
                                                       std::size_t n_max, double slack) {
  std::vector<PositivityViolation> out;
  for (double theta : theta_grid) {
    if (!(theta > 0.5 && theta < 1.0)) throw ContractError("positivity grid must lie in (1/2, 1)");
    for (std::size_t n = 1; n <= n_max; ++n) {
      for (std::size_t T = (n + 1) / 2; T <= n; ++T) {
        const double m = bern_mixed_partial_fd(static_cast<double>(n), static_cast<double>(T), theta);
        if (!(m >= -slack)) out.push_back({theta, n, T, m});
      }
    }
  }
  return out;
}

std::vector<MonotonicityViolation> bern_monotonicity_check(std::span<const double> theta_grid,
                                                           std::size_t n_max, double slack) {
  std::vector<MonotonicityViolation> out;
  for (double theta0 : theta_grid) {
    for (double theta_plus : theta_grid) {
      if (!(theta_plus > theta0)) continue;
      for (std::size_t n = 1; n <= n_max; ++n) {
        const double dn = static_cast<double>(n);
        double prev = bern_log_evalue(dn, static_cast<double>((n + 1) / 2), theta0, theta_plus);
        for (std::size_t T = (n + 1) / 2; T < n; ++T) {
          const double next = bern_log_evalue(dn, static_cast<double>(T + 1), theta0, theta_plus);
          if (next < prev - slack) out.push_back({theta0, theta_plus, n, T, prev - next});
          prev = next;
        }
      }
    }
  }
  return out;
}

}  // namespace evseq::verify
