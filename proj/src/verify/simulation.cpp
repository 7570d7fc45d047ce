#include <cmath>
#include <limits>
#include <string>

#include "internal.hpp"

namespace evseq::verify {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

void validate_generator(const Generator& g) {
  std::visit(
      [](const auto& gen) {
        using G = std::decay_t<decltype(gen)>;
        if constexpr (std::is_same_v<G, GaussianGenerator>) {
          if (!std::isfinite(gen.mu) || !(gen.sigma > 0.0) || !std::isfinite(gen.sigma)) {
            throw ConfigError("gaussian generator needs finite mu and sigma > 0");
          }
        } else if constexpr (std::is_same_v<G, BernoulliGenerator>) {
          if (!(gen.theta > 0.0 && gen.theta < 1.0)) {
            throw ConfigError("bernoulli generator needs theta in (0, 1)");
          }
        } else if constexpr (std::is_same_v<G, RegressionGenerator>) {
          if (!std::isfinite(gen.delta) || !(gen.sigma > 0.0) || !(gen.x_sd >= 0.0) ||
              !(gen.z_sd >= 0.0) || !std::isfinite(gen.x_mean)) {
            throw ConfigError("regression generator has invalid parameters");
          }
          for (double b : gen.beta) {
            if (!std::isfinite(b)) throw ConfigError("regression generator: beta must be finite");
          }
        }
      },
      g);
}

}  // namespace

std::string_view model_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::t_test: return "t";
    case ModelKind::chi_square: return "chisq";
    case ModelKind::bernoulli: return "bernoulli";
    case ModelKind::regression: return "linreg";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "t") return ModelKind::t_test;
  if (name == "chisq") return ModelKind::chi_square;
  if (name == "bernoulli") return ModelKind::bernoulli;
  if (name == "linreg") return ModelKind::regression;
  throw ConfigError("unknown model '" + std::string(name) + "' (expected t, chisq, bernoulli, linreg)");
}

void SimConfig::validate() const {
  if (reps == 0) throw ConfigError("reps must be >= 1");
  if (checkpoints.empty()) throw ConfigError("at least one checkpoint is required");
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] == 0) throw ConfigError("checkpoints must be >= 1");
    if (i > 0 && checkpoints[i] <= checkpoints[i - 1]) {
      throw ConfigError("checkpoints must be strictly increasing");
    }
  }
  validate_generator(generator);
}

std::uint64_t stream_seed(std::uint64_t master, std::uint64_t replication) {
  return splitmix64(splitmix64(master) ^ replication);
}

SimulatedStream simulate_stream(const Generator& generator, std::uint64_t seed, std::size_t length) {
  validate_generator(generator);
  Rng rng(seed);
  SimulatedStream out;
  out.y.reserve(length);
  std::visit(
      [&](const auto& gen) {
        using G = std::decay_t<decltype(gen)>;
        if constexpr (std::is_same_v<G, GaussianGenerator>) {
          std::normal_distribution<double> normal(gen.mu, gen.sigma);
          for (std::size_t i = 0; i < length; ++i) out.y.push_back(normal(rng));
        } else if constexpr (std::is_same_v<G, RademacherGenerator>) {
          for (std::size_t i = 0; i < length; ++i) out.y.push_back((rng() >> 63) ? 1.0 : -1.0);
        } else if constexpr (std::is_same_v<G, BernoulliGenerator>) {
          for (std::size_t i = 0; i < length; ++i) {
            out.y.push_back(uniform01(rng) < gen.theta ? 1.0 : 0.0);
          }
        } else {
          std::normal_distribution<double> normal(0.0, 1.0);
          out.x.reserve(length);
          out.z.reserve(length);
          for (std::size_t i = 0; i < length; ++i) {
            const double x = gen.x_mean + gen.x_sd * normal(rng);
            std::vector<double> z(gen.beta.size());
            double signal = gen.delta * gen.sigma * x;
            for (std::size_t j = 0; j < z.size(); ++j) {
              z[j] = gen.z_sd * normal(rng);
              signal += gen.beta[j] * z[j];
            }
            out.y.push_back(signal + gen.sigma * normal(rng));
            out.x.push_back(x);
            out.z.push_back(std::move(z));
          }
        }
      },
      generator);
  return out;
}

namespace detail {

MomentSummary summarize(std::span<const double> values) {
  if (values.empty()) {
    return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  }
  long double sum = 0.0L;
  for (double v : values) sum += v;
  const long double mean = sum / static_cast<long double>(values.size());
  if (values.size() < 2) return {static_cast<double>(mean), std::numeric_limits<double>::quiet_NaN()};
  long double ss = 0.0L;
  for (double v : values) ss += (v - mean) * (v - mean);
  const long double var = ss / static_cast<long double>(values.size() - 1);
  return {static_cast<double>(mean),
          static_cast<double>(std::sqrt(var / static_cast<long double>(values.size())))};
}

}  // namespace detail

}  // namespace evseq::verify
