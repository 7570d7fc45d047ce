#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

#include "evseq/core.hpp"

namespace evseq::verify {

// ---------------------------------------------------------------------------
// Configuration

enum class ModelKind { t_test, chi_square, bernoulli, regression };

/// CLI names: "t", "chisq", "bernoulli", "linreg".
std::string_view model_name(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

struct GaussianGenerator {
  double mu = 0.0;
  double sigma = 1.0;
};

struct RademacherGenerator {};

struct BernoulliGenerator {
  double theta = 0.5;
};

/// Y_i = delta sigma X_i + beta'Z_i + sigma eps_i, with X_i ~ N(x_mean, x_sd^2)
/// and Z_ij ~ N(0, z_sd^2) drawn independently.
struct RegressionGenerator {
  double delta = 0.0;
  std::vector<double> beta;
  double sigma = 1.0;
  double x_mean = 0.0;
  double x_sd = 1.0;
  double z_sd = 1.0;
};

using Generator =
    std::variant<GaussianGenerator, RademacherGenerator, BernoulliGenerator, RegressionGenerator>;

struct SimConfig {
  Generator generator;
  std::uint64_t seed = 20261016;
  std::size_t reps = 1000;
  std::vector<std::size_t> checkpoints;

  /// Throws ConfigError on reps == 0, empty or non-increasing checkpoints, or
  /// invalid generator parameters.
  void validate() const;
};

struct ModelSpec {
  ModelKind kind;
  EffectSpec effect;
};

// ---------------------------------------------------------------------------
// Random streams

/// Per-replication seed: splitmix64 finalizer applied to (master, index).
std::uint64_t stream_seed(std::uint64_t master, std::uint64_t replication);

/// All harness randomness comes from mt19937_64 streams seeded by stream_seed;
/// Gaussians use std::normal_distribution.
using Rng = std::mt19937_64;

/// One simulated data stream. Bernoulli and Rademacher draws are stored in y
/// as 0/1 and -1/+1; x and z are filled only for the regression generator.
struct SimulatedStream {
  std::vector<double> y;
  std::vector<double> x;
  std::vector<std::vector<double>> z;
};

SimulatedStream simulate_stream(const Generator& generator, std::uint64_t seed, std::size_t length);

// ---------------------------------------------------------------------------
// Reports

enum class Verdict { pass, fail, not_applicable };
std::string_view verdict_name(Verdict v);

struct ReportRow {
  std::string key;
  double estimate = 0.0;
  double standard_error = 0.0;
  double bound = 0.0;
  Verdict verdict = Verdict::not_applicable;
};

struct VerificationReport {
  std::string check;
  nlohmann::json config = nlohmann::json::object();
  std::vector<ReportRow> rows;
  nlohmann::json details = nlohmann::json::object();
  double runtime_seconds = 0.0;

  /// No row failed.
  bool passed() const;
  /// Versioned document, schema "evseq-report/1".
  nlohmann::json to_json() const;
};

inline constexpr std::string_view kReportSchema = "evseq-report/1";

nlohmann::json to_json(const SimConfig& sim);
nlohmann::json to_json(const ModelSpec& spec);

// ---------------------------------------------------------------------------
// Monte Carlo calibration

/// Where the generating distribution sits relative to the tested null.
enum class NullRegion { interior, boundary, outside, no_guarantee };

NullRegion classify(const ModelSpec& spec, const Generator& generator);

/// Mean e-value per checkpoint. Verdicts: mean <= 1 + 3 SE inside the null,
/// |mean - 1| <= 3 SE on the boundary, none elsewhere.
VerificationReport mc_expectation(const ModelSpec& spec, const SimConfig& sim);

struct Proportion {
  double estimate = 0.0;
  double standard_error = 0.0;
  std::size_t reps = 0;
  bool passed = false;
};

/// Fraction of replications whose e-value reaches 1/alpha at some n <= horizon.
/// Passes iff the fraction is <= alpha + 3 SE. The generator must lie in the null.
Proportion type1_error_mc(const ModelSpec& spec, const StoppingRule& rule, std::size_t horizon,
                          const SimConfig& sim);

struct MeanEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t reps = 0;
};

/// Monte Carlo E[ln e-value at n]; a diagnostic without a verdict.
MeanEstimate epower_estimate(const ModelSpec& spec, std::size_t n, const SimConfig& sim);

// ---------------------------------------------------------------------------
// Deterministic checks

struct MlrViolation {
  std::size_t index;  ///< grid[index] -> grid[index + 1] decreased
  double t_left;
  double t_right;
  double drop;
};

/// Points of grid where nct_logratio(., nu, lambda_plus, lambda_0) decreases
/// by more than slack. Throws ContractError on an unsorted grid.
std::vector<MlrViolation> mlr_grid_check(double nu, double lambda_plus, double lambda_0,
                                         std::span<const double> grid, double slack = 1e-10);

/// lo, lo + step, ..., hi (inclusive, computed by index to avoid drift).
std::vector<double> uniform_grid(double lo, double hi, double step);

struct EVariablePoint {
  double lambda_true;
  double h;
  double abs_error;
};

/// h(lambda) = E_lambda[f_{lambda_plus}(T) / f_{lambda_0}(T)] by adaptive
/// quadrature on [-50, 50] plus mapped tails. Throws NumericalError if the
/// quadrature misses its tolerance.
std::vector<EVariablePoint> evariable_quadrature_check(double nu, double lambda_plus,
                                                       double lambda_0,
                                                       std::span<const double> lambda_true_grid);

/// Exact E[M_n^delta] under i.i.d. Rademacher data, by enumerating all 2^n
/// sign sequences. 2 <= n <= 20.
double rademacher_exact_expectation(std::size_t n, double delta);

struct TaylorFit {
  std::size_t n = 0;
  std::vector<double> deltas;
  std::vector<double> expectations;
  std::vector<double> scaled_excess;  ///< (E - 1) / delta^4
  double coefficient = 0.0;           ///< extrapolated to delta -> 0
  double target = 0.0;                ///< (n - 1) / 6
  double relative_error = 0.0;
  bool passed = false;
};

/// Richardson (polynomial in delta^2) extrapolation of (E - 1)/delta^4.
TaylorFit taylor_coeff_fit(std::size_t n, std::span<const double> deltas);

/// Central finite difference of d^2/(dtheta dT) ln f_theta at real T.
double bern_mixed_partial_fd(double n, double T, double theta);

struct PositivityViolation {
  double theta;
  std::size_t n;
  std::size_t T;
  double mixed_partial;
};

/// Grid points where the mixed partial estimate falls below -slack.
std::vector<PositivityViolation> bern_positivity_check(std::span<const double> theta_grid,
                                                       std::size_t n_max, double slack = 1e-8);

struct MonotonicityViolation {
  double theta0;
  double theta_plus;
  std::size_t n;
  std::size_t T;  ///< the ratio at T + 1 fell below the ratio at T
  double drop;
};

/// Exhaustive check that the label-agnostic likelihood ratio is nondecreasing
/// in T over integers ceil(n/2)..n, for every pair theta0 < theta_plus taken
/// from the grid and every n <= n_max.
std::vector<MonotonicityViolation> bern_monotonicity_check(std::span<const double> theta_grid,
                                                           std::size_t n_max,
                                                           double slack = 1e-12);

// ---------------------------------------------------------------------------
// Report builders used by the CLI and the acceptance suite

VerificationReport mlr_report(double nu, double lambda_plus, double lambda_0,
                              std::span<const double> grid);
VerificationReport evariable_report(double nu, double lambda_plus, double lambda_0,
                                    std::span<const double> lambda_true_grid);
VerificationReport counterexample_report(std::size_t n, std::span<const double> deltas);
VerificationReport positivity_report(std::span<const double> theta_grid, std::size_t n_max);
VerificationReport type1_report(const ModelSpec& spec, const StoppingRule& rule,
                                std::size_t horizon, const SimConfig& sim);
VerificationReport epower_report(const ModelSpec& spec, std::size_t n, const SimConfig& sim);

}  // namespace evseq::verify
