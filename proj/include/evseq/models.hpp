#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "evseq/core.hpp"

namespace evseq {

// ---------------------------------------------------------------------------
// Scale-invariant t-test. Data are coarsened to U_i = Y_i / |Y_1|; the
// t-statistic of U^n is sufficient and noncentral-t distributed.

struct TTestState {
  std::size_t n = 0;
  double abs_y1 = 0.0;
  int sign_u1 = 0;
  double sum_u = 0.0;
  double sum_u2 = 0.0;
};

/// Throws StateError for n < 2. Zero empirical variance gives +/-infinity.
double t_statistic(const TTestState& state);

/// At n = 1 this is the sign likelihood ratio Phi(delta_plus u_1) / Phi(delta0 u_1);
/// for n >= 2 the noncentral-t ratio at the current t-statistic.
double t_log_evalue(const TTestState& state, double delta0, double delta_plus);

class TTest {
 public:
  using State = TTestState;
  using Observation = double;

  State initial() const { return {}; }
  /// Throws DataError on a zero first observation or non-finite data.
  State update(const State& state, double y) const;
  double log_evalue(const State& state, double delta0, double delta_plus) const {
    return t_log_evalue(state, delta0, delta_plus);
  }
  /// T_n, with T_1 = U_1.
  double statistic(const State& state) const;
};

// ---------------------------------------------------------------------------
// Location-invariant chi-square test for the variance, U_i = Y_i - Y_1.

struct ChiSqState {
  std::size_t n = 0;
  double y1 = 0.0;
  double sum_u = 0.0;
  double sum_u2 = 0.0;
};

/// Q_n = sum u^2 - (sum u)^2 / n, clamped at zero.
double chisq_Q(const ChiSqState& state);

/// (n-1) ln(sigma0/sigma_plus) + (sigma0^-2 - sigma_plus^-2) Q_n / 2.
double chisq_log_evalue(const ChiSqState& state, double sigma0, double sigma_plus);

class ChiSquare {
 public:
  using State = ChiSqState;
  using Observation = double;

  State initial() const { return {}; }
  State update(const State& state, double y) const;
  double log_evalue(const State& state, double sigma0, double sigma_plus) const {
    return chisq_log_evalue(state, sigma0, sigma_plus);
  }
  double statistic(const State& state) const { return chisq_Q(state); }
};

// ---------------------------------------------------------------------------
// Label-agnostic Bernoulli: U_i = 1{Y_i = Y_1}, T_n = max(count, n - count).

struct BernoulliState {
  std::size_t n = 0;
  int y1 = 0;
  std::size_t count_eq = 0;
};

std::size_t bern_T(const BernoulliState& state);

/// ln[theta^T (1-theta)^(n-T) + (1-theta)^T theta^(n-T)], T real-valued.
double bern_log_likelihood(double n, double T, double theta);

/// Likelihood ratio at (n, T). Parameters must lie in [1/2, 1).
double bern_log_evalue(double n, double T, double theta0, double theta_plus);
double bern_log_evalue(const BernoulliState& state, double theta0, double theta_plus);

class LabelAgnosticBernoulli {
 public:
  using State = BernoulliState;
  using Observation = int;

  State initial() const { return {}; }
  State update(const State& state, int y) const;
  double log_evalue(const State& state, double theta0, double theta_plus) const {
    return bern_log_evalue(state, theta0, theta_plus);
  }
  double statistic(const State& state) const { return static_cast<double>(bern_T(state)); }
};

// ---------------------------------------------------------------------------
// Linear regression Y_i = delta sigma X_i + beta'Z_i + sigma eps_i with
// nuisance (beta, sigma).

struct NullspaceBasis {
  Eigen::MatrixXd basis;  ///< k x n, rows orthonormal and orthogonal to col(z)
  std::size_t rank = 0;
};

/// Singular values below 1e-10 times the largest count as zero.
NullspaceBasis nullspace_basis(const Eigen::MatrixXd& z);

struct RegressionObservation {
  double y = 0.0;
  double x = 0.0;
  std::vector<double> z;
};

struct RegressionSnapshot {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<double> y;
  std::vector<double> x;
  std::vector<double> z;  ///< row-major n x d

  // Recomputed from scratch after every observation.
  std::size_t rank = 0;
  std::size_t k = 0;
  Eigen::MatrixXd basis;  ///< A_n, k x n
  Eigen::VectorXd b;      ///< A_n X^n

  Eigen::MatrixXd z_matrix() const;
  Eigen::Map<const Eigen::VectorXd> y_vector() const;
  Eigen::Map<const Eigen::VectorXd> x_vector() const;

  /// False during startup (k < 2) and when X^n lies in the column space of Z.
  bool informative() const;
  bool b_is_zero() const;
};

struct RegressionTStatistic {
  double t;
  double dof;
  double b_norm;
};

/// Throws StateError if k < 2 or b_n = 0, DataError if A_n Y^n = 0.
RegressionTStatistic reg_t_statistic(const RegressionSnapshot& snapshot);

/// Same statistic with an explicitly supplied basis (k x n, orthonormal rows).
RegressionTStatistic reg_t_statistic(const Eigen::MatrixXd& basis, const Eigen::VectorXd& y,
                                     const Eigen::VectorXd& x);

/// 0 on uninformative steps, else the noncentral-t ratio with nu = k-1 and
/// noncentralities delta ||b_n||.
double reg_log_evalue(const RegressionSnapshot& snapshot, double delta0, double delta_plus);

class LinearRegression {
 public:
  using State = RegressionSnapshot;
  using Observation = RegressionObservation;

  explicit LinearRegression(std::size_t nuisance_dim) : d_(nuisance_dim) {}

  std::size_t nuisance_dim() const { return d_; }
  State initial() const;
  /// Throws DataError on a z of the wrong width, non-finite values, or an
  /// all-zero residual A_n Y^n once the statistic is defined.
  State update(const State& state, const Observation& obs) const;
  double log_evalue(const State& state, double delta0, double delta_plus) const {
    return reg_log_evalue(state, delta0, delta_plus);
  }
  /// NaN on uninformative steps.
  double statistic(const State& state) const;

 private:
  std::size_t d_;
};

static_assert(SequentialModel<TTest>);
static_assert(SequentialModel<ChiSquare>);
static_assert(SequentialModel<LabelAgnosticBernoulli>);
static_assert(SequentialModel<LinearRegression>);

}  // namespace evseq
