#pragma once

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "evseq/errors.hpp"
#include "evseq/models.hpp"
#include "evseq/verify.hpp"

namespace evseq::verify::detail {

/// Runs fn(rep) for rep in [0, reps) on contiguous chunks, one per worker.
/// Results must be written to per-rep slots so the caller can reduce them in
/// replication order.
template <class Fn>
void for_each_replication(std::size_t reps, Fn&& fn) {
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>(hw, (reps + 255) / 256);
  if (workers <= 1) {
    for (std::size_t r = 0; r < reps; ++r) fn(r);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  const std::size_t chunk = (reps + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(reps, begin + chunk);
    pool.emplace_back([&, begin, end] {
      try {
        for (std::size_t r = begin; r < end; ++r) fn(r);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

/// Calls fn(model, observation_at) with the concrete model for spec.kind,
/// after checking the generator can feed it.
template <class Fn>
auto with_model(const ModelSpec& spec, const Generator& generator, Fn&& fn) {
  auto scalar = [](const SimulatedStream& s, std::size_t i) { return s.y[i]; };
  switch (spec.kind) {
    case ModelKind::t_test:
      if (!std::holds_alternative<GaussianGenerator>(generator) &&
          !std::holds_alternative<RademacherGenerator>(generator)) {
        throw ConfigError("t-test needs a gaussian or rademacher generator");
      }
      return fn(TTest{}, scalar);
    case ModelKind::chi_square:
      if (!std::holds_alternative<GaussianGenerator>(generator)) {
        throw ConfigError("chi-square test needs a gaussian generator");
      }
      return fn(ChiSquare{}, scalar);
    case ModelKind::bernoulli:
      if (!std::holds_alternative<BernoulliGenerator>(generator)) {
        throw ConfigError("Bernoulli test needs a bernoulli generator");
      }
      return fn(LabelAgnosticBernoulli{}, [](const SimulatedStream& s, std::size_t i) {
        return static_cast<int>(s.y[i]);
      });
    case ModelKind::regression: {
      const auto* reg = std::get_if<RegressionGenerator>(&generator);
      if (!reg) throw ConfigError("regression test needs a regression generator");
      return fn(LinearRegression{reg->beta.size()}, [](const SimulatedStream& s, std::size_t i) {
        return RegressionObservation{s.y[i], s.x[i], s.z[i]};
      });
    }
  }
  throw ConfigError("unknown model kind");
}

/// Sample mean and standard error (sample sd / sqrt(count)), reduced in order.
struct MomentSummary {
  double mean;
  double standard_error;
};

MomentSummary summarize(std::span<const double> values);

}  // namespace evseq::verify::detail
