#include <cmath>

#include "evseq/errors.hpp"
#include "evseq/models.hpp"

namespace evseq {

double chisq_Q(const ChiSqState& state) {
  if (state.n == 0) throw StateError("chi-square statistic needs at least 1 observation");
  const double q = state.sum_u2 - state.sum_u * state.sum_u / static_cast<double>(state.n);
  return q > 0.0 ? q : 0.0;
}

double chisq_log_evalue(const ChiSqState& state, double sigma0, double sigma_plus) {
  if (!(sigma0 > 0.0) || !(sigma_plus > 0.0) || !std::isfinite(sigma0) ||
      !std::isfinite(sigma_plus)) {
    throw DomainError("chi-square: scales must be finite and > 0");
  }
  const double q = chisq_Q(state);
  if (sigma0 == sigma_plus) return 0.0;
  const double inv0 = 1.0 / (sigma0 * sigma0);
  const double inv_plus = 1.0 / (sigma_plus * sigma_plus);
  return static_cast<double>(state.n - 1) * std::log(sigma0 / sigma_plus) +
         0.5 * (inv0 - inv_plus) * q;
}

ChiSqState ChiSquare::update(const ChiSqState& state, double y) const {
  if (!std::isfinite(y)) throw DataError("chi-square: observation must be finite");
  ChiSqState next = state;
  if (state.n == 0) next.y1 = y;
  const double u = y - next.y1;
  next.n += 1;
  next.sum_u += u;
  next.sum_u2 += u * u;
  return next;
}

}  // namespace evseq
