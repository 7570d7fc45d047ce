#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>

#include "internal.hpp"

namespace evseq::verify {
namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

Verdict verdict_of(bool ok) { return ok ? Verdict::pass : Verdict::fail; }

}  // namespace

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::not_applicable: return "n/a";
  }
  return "unknown";
}

bool VerificationReport::passed() const {
  for (const auto& r : rows) {
    if (r.verdict == Verdict::fail) return false;
  }
  return true;
}

json VerificationReport::to_json() const {
  json rows_json = json::array();
  for (const auto& r : rows) {
    rows_json.push_back({{"key", r.key},
                         {"estimate", r.estimate},
                         {"standard_error", r.standard_error},
                         {"bound", r.bound},
                         {"verdict", verdict_name(r.verdict)}});
  }
  return {{"schema", kReportSchema},
          {"check", check},
          {"config", config},
          {"rows", rows_json},
          {"passed", passed()},
          {"details", details},
          {"runtime_seconds", runtime_seconds}};
}

json to_json(const SimConfig& sim) {
  json gen = std::visit(
      [](const auto& g) -> json {
        using G = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<G, GaussianGenerator>) {
          return {{"kind", "gaussian"}, {"mu", g.mu}, {"sigma", g.sigma}};
        } else if constexpr (std::is_same_v<G, RademacherGenerator>) {
          return {{"kind", "rademacher"}};
        } else if constexpr (std::is_same_v<G, BernoulliGenerator>) {
          return {{"kind", "bernoulli"}, {"theta", g.theta}};
        } else {
          return {{"kind", "regression"}, {"delta", g.delta},   {"beta", g.beta},
                  {"sigma", g.sigma},     {"x_mean", g.x_mean}, {"x_sd", g.x_sd},
                  {"z_sd", g.z_sd}};
        }
      },
      sim.generator);
  return {{"generator", gen},
          {"seed", sim.seed},
          {"reps", sim.reps},
          {"checkpoints", sim.checkpoints}};
}

json to_json(const ModelSpec& spec) {
  json effect = {{"null", spec.effect.null_effect()}};
  if (spec.effect.is_point()) {
    effect["alternative"] = spec.effect.point_alternative();
  } else {
    json atoms = json::array();
    for (const auto& a : spec.effect.atoms()) atoms.push_back({{"effect", a.effect}, {"weight", a.weight}});
    effect["prior"] = atoms;
  }
  return {{"kind", model_name(spec.kind)}, {"effect", effect}};
}

VerificationReport mlr_report(double nu, double lambda_plus, double lambda_0,
                              std::span<const double> grid) {
  Stopwatch clock;
  const auto violations = mlr_grid_check(nu, lambda_plus, lambda_0, grid);
  VerificationReport report;
  report.check = "mlr";
  report.config = {{"nu", nu}, {"lambda_plus", lambda_plus}, {"lambda_0", lambda_0},
                   {"grid_size", grid.size()}};
  if (!grid.empty()) {
    report.config["grid_lo"] = grid.front();
    report.config["grid_hi"] = grid.back();
  }
  report.rows.push_back({"violations", static_cast<double>(violations.size()), 0.0, 0.0,
                         verdict_of(violations.empty())});
  json list = json::array();
  for (std::size_t i = 0; i < violations.size() && i < 20; ++i) {
    const auto& v = violations[i];
    list.push_back({{"t_left", v.t_left}, {"t_right", v.t_right}, {"drop", v.drop}});
  }
  report.details["first_violations"] = list;
  report.runtime_seconds = clock.seconds();
  return report;
}

VerificationReport evariable_report(double nu, double lambda_plus, double lambda_0,
                                    std::span<const double> lambda_true_grid) {
  Stopwatch clock;
  const auto points = evariable_quadrature_check(nu, lambda_plus, lambda_0, lambda_true_grid);
  VerificationReport report;
  report.check = "quadrature";
  report.config = {{"nu", nu}, {"lambda_plus", lambda_plus}, {"lambda_0", lambda_0},
                   {"lambda_true", std::vector<double>(lambda_true_grid.begin(), lambda_true_grid.end())}};
  std::size_t drops = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    ReportRow row{"lambda=" + fmt(p.lambda_true), p.h, p.abs_error, 0.0, Verdict::pass};
    if (p.lambda_true == lambda_0) {
      row.bound = 1e-6;
      row.verdict = verdict_of(std::abs(p.h - 1.0) <= 1e-6);
    } else if (p.lambda_true < lambda_0) {
      row.bound = 1.0 + 1e-6;
      row.verdict = verdict_of(p.h <= row.bound);
    } else {
      row.bound = 1.0 - 1e-8;
      row.verdict = verdict_of(p.h >= row.bound);
    }
    report.rows.push_back(row);
    if (i > 0 && points[i].lambda_true > points[i - 1].lambda_true &&
        points[i].h < points[i - 1].h - 1e-8) {
      ++drops;
    }
  }
  report.rows.push_back({"monotone_drops", static_cast<double>(drops), 0.0, 0.0, verdict_of(drops == 0)});
  report.runtime_seconds = clock.seconds();
  return report;
}

VerificationReport counterexample_report(std::size_t n, std::span<const double> deltas) {
  Stopwatch clock;
  const auto fit = taylor_coeff_fit(n, deltas);
  VerificationReport report;
  report.check = "counterexample";
  report.config = {{"n", n}, {"deltas", fit.deltas}};
  for (std::size_t i = 0; i < fit.deltas.size(); ++i) {
    report.rows.push_back({"delta=" + fmt(fit.deltas[i]), fit.expectations[i], 0.0, 1.0,
                           verdict_of(fit.expectations[i] > 1.0)});
  }
  report.rows.push_back({"coefficient", fit.coefficient, 0.0, fit.target, verdict_of(fit.passed)});
  report.details = {{"scaled_excess", fit.scaled_excess},
                    {"target", fit.target},
                    {"relative_error", fit.relative_error},
                    {"tolerance", 0.05}};
  report.runtime_seconds = clock.seconds();
  return report;
}

VerificationReport positivity_report(std::span<const double> theta_grid, std::size_t n_max) {
  Stopwatch clock;
  const auto positivity = bern_positivity_check(theta_grid, n_max);
  const auto monotone = bern_monotonicity_check(theta_grid, n_max);
  VerificationReport report;
  report.check = "positivity";
  report.config = {{"theta", std::vector<double>(theta_grid.begin(), theta_grid.end())},
                   {"n_max", n_max}};
  report.rows.push_back({"mixed_partial_violations", static_cast<double>(positivity.size()), 0.0,
                         0.0, verdict_of(positivity.empty())});
  report.rows.push_back({"monotonicity_violations", static_cast<double>(monotone.size()), 0.0, 0.0,
                         verdict_of(monotone.empty())});
  json list = json::array();
  for (std::size_t i = 0; i < positivity.size() && i < 20; ++i) {
    const auto& v = positivity[i];
    list.push_back({{"theta", v.theta}, {"n", v.n}, {"T", v.T}, {"mixed_partial", v.mixed_partial}});
  }
  report.details["first_violations"] = list;
  report.runtime_seconds = clock.seconds();
  return report;
}

VerificationReport type1_report(const ModelSpec& spec, const StoppingRule& rule,
                                std::size_t horizon, const SimConfig& sim) {
  Stopwatch clock;
  const auto p = type1_error_mc(spec, rule, horizon, sim);
  VerificationReport report;
  report.check = "type1";
  SimConfig echo = sim;
  echo.checkpoints = {horizon};
  report.config = {{"model", to_json(spec)}, {"sim", to_json(echo)}, {"alpha", rule.alpha()},
                   {"horizon", horizon}};
  report.rows.push_back({"rejection_rate", p.estimate, p.standard_error,
                         rule.alpha() + 3.0 * p.standard_error, verdict_of(p.passed)});
  report.runtime_seconds = clock.seconds();
  return report;
}

VerificationReport epower_report(const ModelSpec& spec, std::size_t n, const SimConfig& sim) {
  Stopwatch clock;
  const auto m = epower_estimate(spec, n, sim);
  VerificationReport report;
  report.check = "epower";
  SimConfig echo = sim;
  echo.checkpoints = {n};
  report.config = {{"model", to_json(spec)}, {"sim", to_json(echo)}, {"n", n}};
  report.rows.push_back({"mean_log_e", m.mean, m.standard_error, 0.0, Verdict::not_applicable});
  report.runtime_seconds = clock.seconds();
  return report;
}

}  // namespace evseq::verify
