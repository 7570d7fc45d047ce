#include <cmath>
#include <limits>
#include <string>

#include <Eigen/SVD>

#include "evseq/errors.hpp"
#include "evseq/models.hpp"
#include "evseq/specfun.hpp"

namespace evseq {
namespace {

constexpr double kRankTolerance = 1e-10;
// ||b_n|| and ||A_n Y^n|| below this fraction of ||X^n|| / ||Y^n|| count as 0.
constexpr double kZeroTolerance = 1e-10;

}  // namespace

NullspaceBasis nullspace_basis(const Eigen::MatrixXd& z) {
  const auto n = z.rows();
  if (n < 1) throw ContractError("nullspace_basis: need at least one row");
  if (z.cols() == 0) return {Eigen::MatrixXd::Identity(n, n), 0};

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(z, Eigen::ComputeFullU);
  const auto& sv = svd.singularValues();
  const double top = sv.size() > 0 ? sv(0) : 0.0;
  std::size_t rank = 0;
  if (top > 0.0) {
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
      if (sv(i) > kRankTolerance * top) ++rank;
    }
  }
  const auto k = n - static_cast<Eigen::Index>(rank);
  return {svd.matrixU().rightCols(k).transpose(), rank};
}

Eigen::MatrixXd RegressionSnapshot::z_matrix() const {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) m(i, j) = z[i * d + j];
  }
  return m;
}

Eigen::Map<const Eigen::VectorXd> RegressionSnapshot::y_vector() const {
  return {y.data(), static_cast<Eigen::Index>(y.size())};
}

Eigen::Map<const Eigen::VectorXd> RegressionSnapshot::x_vector() const {
  return {x.data(), static_cast<Eigen::Index>(x.size())};
}

bool RegressionSnapshot::b_is_zero() const {
  const double xn = x_vector().norm();
  return b.size() == 0 || xn == 0.0 || b.norm() <= kZeroTolerance * xn;
}

bool RegressionSnapshot::informative() const { return k >= 2 && !b_is_zero(); }

RegressionTStatistic reg_t_statistic(const Eigen::MatrixXd& basis, const Eigen::VectorXd& y,
                                     const Eigen::VectorXd& x) {
  const auto k = basis.rows();
  if (k < 2) throw StateError("regression t-statistic needs k = n - rank(Z) >= 2");
  const Eigen::VectorXd b = basis * x;
  const double b_norm = b.norm();
  if (x.norm() == 0.0 || b_norm <= kZeroTolerance * x.norm()) {
    throw StateError("regression t-statistic undefined: X lies in the column space of Z");
  }
  const Eigen::VectorXd ay = basis * y;
  const double ay_norm = ay.norm();
  if (y.norm() == 0.0 || ay_norm <= kZeroTolerance * y.norm()) {
    throw DataError("regression: residual A_n Y^n is zero (Y lies in the column space of Z)");
  }
  const Eigen::VectorXd u = ay / ay_norm;
  const double along = b.dot(u) / b_norm;
  const Eigen::VectorXd perp = u - b * (b.dot(u) / b.squaredNorm());
  const double perp_norm = perp.norm();
  const double dof = static_cast<double>(k - 1);
  double t;
  if (perp_norm == 0.0) {
    t = along == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), along);
  } else {
    t = along / (perp_norm / std::sqrt(dof));
  }
  return {t, dof, b_norm};
}

RegressionTStatistic reg_t_statistic(const RegressionSnapshot& snapshot) {
  return reg_t_statistic(snapshot.basis, snapshot.y_vector(), snapshot.x_vector());
}

double reg_log_evalue(const RegressionSnapshot& snapshot, double delta0, double delta_plus) {
  if (!snapshot.informative()) return 0.0;
  if (delta0 == delta_plus) return 0.0;
  const auto stat = reg_t_statistic(snapshot);
  return specfun::nct_logratio(stat.t, stat.dof, delta_plus * stat.b_norm, delta0 * stat.b_norm);
}

RegressionSnapshot LinearRegression::initial() const {
  RegressionSnapshot s;
  s.d = d_;
  return s;
}

RegressionSnapshot LinearRegression::update(const RegressionSnapshot& state,
                                            const RegressionObservation& obs) const {
  if (obs.z.size() != d_) {
    throw DataError("regression: expected " + std::to_string(d_) + " nuisance covariates, got " +
                    std::to_string(obs.z.size()));
  }
  if (!std::isfinite(obs.y) || !std::isfinite(obs.x)) {
    throw DataError("regression: y and x must be finite");
  }
  for (double v : obs.z) {
    if (!std::isfinite(v)) throw DataError("regression: z must be finite");
  }

  RegressionSnapshot next = state;
  next.d = d_;
  next.n += 1;
  next.y.push_back(obs.y);
  next.x.push_back(obs.x);
  next.z.insert(next.z.end(), obs.z.begin(), obs.z.end());

  auto nb = nullspace_basis(next.z_matrix());
  next.rank = nb.rank;
  next.k = next.n - nb.rank;
  next.basis = std::move(nb.basis);
  next.b = next.basis * next.x_vector();

  if (next.informative()) {
    const double ay = (next.basis * next.y_vector()).norm();
    if (ay <= kZeroTolerance * next.y_vector().norm()) {
      throw DataError("regression: residual A_n Y^n is zero (Y lies in the column space of Z)");
    }
  }
  return next;
}

double LinearRegression::statistic(const RegressionSnapshot& state) const {
  if (!state.informative()) return std::numeric_limits<double>::quiet_NaN();
  return reg_t_statistic(state).t;
}

}  // namespace evseq
