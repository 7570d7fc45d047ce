#include <cmath>
#include <limits>

#include "evseq/errors.hpp"
#include "evseq/models.hpp"
#include "evseq/specfun.hpp"

namespace evseq {

double t_statistic(const TTestState& state) {
  if (state.n < 2) throw StateError("t-statistic needs at least 2 observations");
  const double n = static_cast<double>(state.n);
  const double ss = state.sum_u2 - state.sum_u * state.sum_u / n;
  if (!(ss > 0.0)) {
    if (state.sum_u == 0.0) return 0.0;
    return std::copysign(std::numeric_limits<double>::infinity(), state.sum_u);
  }
  return (state.sum_u / std::sqrt(n)) / std::sqrt(ss / (n - 1.0));
}

double t_log_evalue(const TTestState& state, double delta0, double delta_plus) {
  if (state.n == 0) throw StateError("t-test process needs at least 1 observation");
  if (delta_plus == delta0) return 0.0;
  if (state.n == 1) {
    const double u1 = state.sign_u1;
    return specfun::log_norm_cdf(delta_plus * u1) - specfun::log_norm_cdf(delta0 * u1);
  }
  const double root_n = std::sqrt(static_cast<double>(state.n));
  return specfun::nct_logratio(t_statistic(state), static_cast<double>(state.n - 1),
                               root_n * delta_plus, root_n * delta0);
}

TTestState TTest::update(const TTestState& state, double y) const {
  if (!std::isfinite(y)) throw DataError("t-test: observation must be finite");
  TTestState next = state;
  if (state.n == 0) {
    if (y == 0.0) {
      throw DataError("t-test: first observation is zero; coarsening U_i = Y_i/|Y_1| is undefined");
    }
    next.abs_y1 = std::abs(y);
    next.sign_u1 = y > 0.0 ? 1 : -1;
  }
  const double u = y / next.abs_y1;
  next.n += 1;
  next.sum_u += u;
  next.sum_u2 += u * u;
  return next;
}

double TTest::statistic(const TTestState& state) const {
  if (state.n == 0) return std::numeric_limits<double>::quiet_NaN();
  if (state.n == 1) return state.sign_u1;
  return t_statistic(state);
}

}  // namespace evseq
