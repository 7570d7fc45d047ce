#pragma once

#include <concepts>
#include <cstddef>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace evseq {

struct PriorAtom {
  double effect;
  double weight;
};

/// Discrete prior over alternative effects. Weights are positive and sum to 1.
class PriorGrid {
 public:
  /// Throws ContractError unless weights are positive, finite and sum to 1
  /// within 1e-12.
  explicit PriorGrid(std::vector<PriorAtom> atoms);

  /// Accepts weights summing to 1 within `tolerance` and renormalizes them.
  static PriorGrid normalized(std::vector<PriorAtom> atoms, double tolerance = 1e-6);

  std::span<const PriorAtom> atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }

 private:
  std::vector<PriorAtom> atoms_;
};

/// Null boundary plus either a point alternative or a prior grid.
///
/// The effect is in the parameterization of the model it is used with: the
/// effect size delta for t and regression, sigma for chi-square, theta for
/// Bernoulli.
class EffectSpec {
 public:
  static EffectSpec point(double null_effect, double alternative);
  static EffectSpec mixture(double null_effect, PriorGrid prior);

  double null_effect() const { return null_; }
  bool is_point() const { return std::holds_alternative<double>(alternative_); }
  double point_alternative() const;
  const PriorGrid& prior() const;

  /// Point alternatives come back as one atom of weight 1.
  std::vector<PriorAtom> atoms() const;

  /// True when some alternative lies below the null boundary, in which case
  /// the one-sided supermartingale guarantee does not apply.
  bool guarantee_void() const;

  /// True when every alternative equals the null (likelihood ratio is 1).
  bool degenerate() const;

 private:
  EffectSpec(double null_effect, std::variant<double, PriorGrid> alternative);

  double null_;
  std::variant<double, PriorGrid> alternative_;
};

/// Reject once the e-value reaches 1/alpha.
class StoppingRule {
 public:
  explicit StoppingRule(double alpha);

  double alpha() const { return alpha_; }
  double threshold() const { return 1.0 / alpha_; }
  double log_threshold() const;

 private:
  double alpha_;
};

template <class ModelState>
struct EProcessState {
  std::size_t n = 0;
  double log_e = 0.0;
  ModelState model{};
};

struct EValue {
  double value;
  bool overflow;
};

EValue evalue(double log_e);

template <class ModelState>
EValue evalue(const EProcessState<ModelState>& state) {
  return evalue(state.log_e);
}

/// ln sum_j w_j exp(component_log_es[j]).
double mixture_log_evalue(std::span<const double> component_log_es, const PriorGrid& prior);

bool should_reject(double log_e, const StoppingRule& rule);

template <class ModelState>
bool should_reject(const EProcessState<ModelState>& state, const StoppingRule& rule) {
  return should_reject(state.log_e, rule);
}

struct TrajectoryRecord {
  std::size_t n;
  double statistic;
  double log_e;
  bool rejected;
};

/// Recorded path of a process; `rejected` latches at the first crossing.
class Trajectory {
 public:
  const TrajectoryRecord& append(std::size_t n, double statistic, double log_e,
                                 const StoppingRule& rule);

  std::span<const TrajectoryRecord> records() const { return records_; }
  /// n at which the threshold was first reached.
  std::optional<std::size_t> first_crossing() const { return first_crossing_; }
  bool empty() const { return records_.empty(); }

 private:
  std::vector<TrajectoryRecord> records_;
  std::optional<std::size_t> first_crossing_;
};

/// What every sequential model exposes to the generic machinery.
template <class M>
concept SequentialModel = requires(const M& m, const typename M::State& s,
                                   const typename M::Observation& o, double a, double b) {
  typename M::State;
  typename M::Observation;
  { m.initial() } -> std::same_as<typename M::State>;
  { m.update(s, o) } -> std::same_as<typename M::State>;
  { m.log_evalue(s, a, b) } -> std::convertible_to<double>;
  { m.statistic(s) } -> std::convertible_to<double>;
};

/// Process value at the model's current sufficient statistic, mixed over the
/// alternative atoms.
template <SequentialModel M>
double process_log_evalue(const M& model, const typename M::State& state, const EffectSpec& spec) {
  if (spec.is_point()) {
    return model.log_evalue(state, spec.null_effect(), spec.point_alternative());
  }
  const auto& prior = spec.prior();
  std::vector<double> components;
  components.reserve(prior.size());
  for (const auto& atom : prior.atoms()) {
    components.push_back(model.log_evalue(state, spec.null_effect(), atom.effect));
  }
  return mixture_log_evalue(components, prior);
}

template <SequentialModel M>
EProcessState<typename M::State> start(const M& model) {
  return {0, 0.0, model.initial()};
}

/// Advance by one observation. The new value is read off the updated
/// sufficient statistic, never multiplied onto the old one.
template <SequentialModel M>
EProcessState<typename M::State> step(const M& model, const EProcessState<typename M::State>& state,
                                      const typename M::Observation& observation,
                                      const EffectSpec& spec) {
  EProcessState<typename M::State> next;
  next.model = model.update(state.model, observation);
  next.n = state.n + 1;
  next.log_e = process_log_evalue(model, next.model, spec);
  return next;
}

}  // namespace evseq
