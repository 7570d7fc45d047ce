#include <algorithm>
#include <cmath>
#include <string>

#include "evseq/errors.hpp"
#include "evseq/models.hpp"

namespace evseq {
namespace {

void require_upper_half(double theta, const char* name) {
  if (!(theta >= 0.5 && theta < 1.0)) {
    throw DomainError(std::string("label-agnostic Bernoulli: ") + name + " = " +
                      std::to_string(theta) +
                      " is outside [1/2, 1); map theta -> 1 - theta (label flip) first");
  }
}

}  // namespace

std::size_t bern_T(const BernoulliState& state) {
  return std::max(state.count_eq, state.n - state.count_eq);
}

double bern_log_likelihood(double n, double T, double theta) {
  const double lt = std::log(theta);
  const double l1t = std::log1p(-theta);
  const double a = T * lt + (n - T) * l1t;
  const double b = T * l1t + (n - T) * lt;
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

double bern_log_evalue(double n, double T, double theta0, double theta_plus) {
  require_upper_half(theta0, "theta0");
  require_upper_half(theta_plus, "theta_plus");
  if (theta0 == theta_plus) return 0.0;
  return bern_log_likelihood(n, T, theta_plus) - bern_log_likelihood(n, T, theta0);
}

double bern_log_evalue(const BernoulliState& state, double theta0, double theta_plus) {
  return bern_log_evalue(static_cast<double>(state.n), static_cast<double>(bern_T(state)), theta0,
                         theta_plus);
}

BernoulliState LabelAgnosticBernoulli::update(const BernoulliState& state, int y) const {
  if (y != 0 && y != 1) throw DataError("Bernoulli: observation must be 0 or 1");
  BernoulliState next = state;
  if (state.n == 0) next.y1 = y;
  next.n += 1;
  if (y == next.y1) next.count_eq += 1;
  return next;
}

}  // namespace evseq
