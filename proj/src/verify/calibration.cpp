#include <chrono>
#include <cmath>
#include <string>

#include "internal.hpp"

namespace evseq::verify {
namespace {

constexpr double kBoundaryTolerance = 1e-12;

NullRegion compare(double truth, double null_effect) {
  if (std::abs(truth - null_effect) <= kBoundaryTolerance * std::max(1.0, std::abs(null_effect))) {
    return NullRegion::boundary;
  }
  return truth < null_effect ? NullRegion::interior : NullRegion::outside;
}

/// Feeds one simulated stream through the model; on_step(n, log_e) returns
/// false to stop early.
template <class Model, class ObsAt, class OnStep>
void run_stream(const Model& model, ObsAt obs_at, const EffectSpec& effect,
                const SimulatedStream& stream, std::size_t length, OnStep on_step) {
  auto state = start(model);
  for (std::size_t i = 0; i < length; ++i) {
    state = step(model, state, obs_at(stream, i), effect);
    if (!on_step(state.n, state.log_e)) return;
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

NullRegion classify(const ModelSpec& spec, const Generator& generator) {
  const EffectSpec& effect = spec.effect;
  const double null_effect = effect.null_effect();
  switch (spec.kind) {
    case ModelKind::chi_square: {
      const auto* g = std::get_if<GaussianGenerator>(&generator);
      if (!g) return NullRegion::no_guarantee;
      bool any_above = false, any_below = false;
      for (const auto& atom : effect.atoms()) {
        any_above |= atom.effect > null_effect;
        any_below |= atom.effect < null_effect;
      }
      if (any_above && any_below) return NullRegion::no_guarantee;
      // Alternatives below sigma0 test the reversed null sigma >= sigma0.
      if (any_below) return compare(-g->sigma, -null_effect);
      return compare(g->sigma, null_effect);
    }
    case ModelKind::t_test: {
      if (effect.guarantee_void()) return NullRegion::no_guarantee;
      const auto* g = std::get_if<GaussianGenerator>(&generator);
      if (!g) return NullRegion::no_guarantee;
      return compare(g->mu / g->sigma, null_effect);
    }
    case ModelKind::bernoulli: {
      if (effect.guarantee_void()) return NullRegion::no_guarantee;
      const auto* g = std::get_if<BernoulliGenerator>(&generator);
      if (!g) return NullRegion::no_guarantee;
      return compare(std::max(g->theta, 1.0 - g->theta), null_effect);
    }
    case ModelKind::regression: {
      if (effect.guarantee_void()) return NullRegion::no_guarantee;
      const auto* g = std::get_if<RegressionGenerator>(&generator);
      if (!g) return NullRegion::no_guarantee;
      return compare(g->delta, null_effect);
    }
  }
  return NullRegion::no_guarantee;
}

VerificationReport mc_expectation(const ModelSpec& spec, const SimConfig& sim) {
  sim.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t horizon = sim.checkpoints.back();
  const std::size_t m = sim.checkpoints.size();
  // values[c * reps + r]: e-value of replication r at checkpoint c.
  std::vector<double> values(m * sim.reps);

  detail::with_model(spec, sim.generator, [&](const auto& model, auto obs_at) {
    detail::for_each_replication(sim.reps, [&](std::size_t r) {
      const auto stream = simulate_stream(sim.generator, stream_seed(sim.seed, r), horizon);
      std::size_t c = 0;
      run_stream(model, obs_at, spec.effect, stream, horizon, [&](std::size_t n, double log_e) {
        if (n == sim.checkpoints[c]) {
          values[c * sim.reps + r] = std::exp(log_e);
          ++c;
        }
        return c < m;
      });
    });
    return 0;
  });

  const NullRegion region = classify(spec, sim.generator);
  VerificationReport report;
  report.check = "mc";
  report.config = {{"model", to_json(spec)}, {"sim", to_json(sim)}};
  for (std::size_t c = 0; c < m; ++c) {
    const auto summary = detail::summarize(std::span(values).subspan(c * sim.reps, sim.reps));
    ReportRow row;
    row.key = "n=" + std::to_string(sim.checkpoints[c]);
    row.estimate = summary.mean;
    row.standard_error = summary.standard_error;
    const double se = std::isfinite(summary.standard_error) ? summary.standard_error : 0.0;
    row.bound = 1.0 + 3.0 * se;
    switch (region) {
      case NullRegion::interior:
        row.verdict = summary.mean <= row.bound ? Verdict::pass : Verdict::fail;
        break;
      case NullRegion::boundary:
        row.verdict = std::abs(summary.mean - 1.0) <= 3.0 * se ? Verdict::pass : Verdict::fail;
        break;
      default:
        row.verdict = Verdict::not_applicable;
        break;
    }
    report.rows.push_back(row);
  }
  static constexpr const char* kRegionNames[] = {"interior", "boundary", "outside", "no_guarantee"};
  report.details["null_region"] = kRegionNames[static_cast<int>(region)];
  report.runtime_seconds = seconds_since(t0);
  return report;
}

Proportion type1_error_mc(const ModelSpec& spec, const StoppingRule& rule, std::size_t horizon,
                          const SimConfig& sim) {
  if (horizon == 0) throw ConfigError("type-I check needs a horizon >= 1");
  SimConfig cfg = sim;
  cfg.checkpoints = {horizon};
  cfg.validate();
  const NullRegion region = classify(spec, cfg.generator);
  if (region != NullRegion::interior && region != NullRegion::boundary) {
    throw ConfigError("type-I check needs a generator inside the tested null");
  }

  std::vector<unsigned char> rejected(cfg.reps, 0);
  detail::with_model(spec, cfg.generator, [&](const auto& model, auto obs_at) {
    detail::for_each_replication(cfg.reps, [&](std::size_t r) {
      const auto stream = simulate_stream(cfg.generator, stream_seed(cfg.seed, r), horizon);
      run_stream(model, obs_at, spec.effect, stream, horizon, [&](std::size_t, double log_e) {
        if (should_reject(log_e, rule)) rejected[r] = 1;
        return rejected[r] == 0;
      });
    });
    return 0;
  });

  std::size_t count = 0;
  for (auto v : rejected) count += v;
  Proportion p;
  p.reps = cfg.reps;
  p.estimate = static_cast<double>(count) / static_cast<double>(cfg.reps);
  p.standard_error = std::sqrt(p.estimate * (1.0 - p.estimate) / static_cast<double>(cfg.reps));
  p.passed = p.estimate <= rule.alpha() + 3.0 * p.standard_error;
  return p;
}

MeanEstimate epower_estimate(const ModelSpec& spec, std::size_t n, const SimConfig& sim) {
  if (n == 0) throw ConfigError("e-power estimate needs n >= 1");
  SimConfig cfg = sim;
  cfg.checkpoints = {n};
  cfg.validate();

  std::vector<double> log_es(cfg.reps, 0.0);
  detail::with_model(spec, cfg.generator, [&](const auto& model, auto obs_at) {
    detail::for_each_replication(cfg.reps, [&](std::size_t r) {
      const auto stream = simulate_stream(cfg.generator, stream_seed(cfg.seed, r), n);
      run_stream(model, obs_at, spec.effect, stream, n, [&](std::size_t k, double log_e) {
        if (k == n) log_es[r] = log_e;
        return true;
      });
    });
    return 0;
  });

  const auto summary = detail::summarize(log_es);
  return {summary.mean, summary.standard_error, cfg.reps};
}

}  // namespace evseq::verify
