#include "evseq/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "evseq/errors.hpp"

namespace evseq {
namespace {

void validate_atoms(const std::vector<PriorAtom>& atoms) {
  if (atoms.empty()) throw ContractError("prior grid must have at least one atom");
  for (const auto& a : atoms) {
    if (!std::isfinite(a.effect)) throw ContractError("prior grid: effect must be finite");
    if (!(a.weight > 0.0) || !std::isfinite(a.weight)) {
      throw ContractError("prior grid: weights must be positive and finite");
    }
  }
}

double weight_sum(const std::vector<PriorAtom>& atoms) {
  double s = 0.0;
  for (const auto& a : atoms) s += a.weight;
  return s;
}

}  // namespace

PriorGrid::PriorGrid(std::vector<PriorAtom> atoms) : atoms_(std::move(atoms)) {
  validate_atoms(atoms_);
  const double s = weight_sum(atoms_);
  if (std::abs(s - 1.0) > 1e-12) {
    throw ContractError("prior grid: weights sum to " + std::to_string(s) + ", not 1");
  }
}

PriorGrid PriorGrid::normalized(std::vector<PriorAtom> atoms, double tolerance) {
  validate_atoms(atoms);
  const double s = weight_sum(atoms);
  if (std::abs(s - 1.0) > tolerance) {
    throw ContractError("prior grid: weights sum to " + std::to_string(s) +
                        ", outside tolerance of 1");
  }
  for (auto& a : atoms) a.weight /= s;
  // Renormalized weights can still miss 1 by a few ulps; fold that into the
  // largest atom so the strict constructor accepts them.
  const double residual = 1.0 - weight_sum(atoms);
  auto largest = std::max_element(atoms.begin(), atoms.end(),
                                  [](const auto& l, const auto& r) { return l.weight < r.weight; });
  largest->weight += residual;
  return PriorGrid(std::move(atoms));
}

EffectSpec::EffectSpec(double null_effect, std::variant<double, PriorGrid> alternative)
    : null_(null_effect), alternative_(std::move(alternative)) {
  if (!std::isfinite(null_)) throw ContractError("effect spec: null effect must be finite");
}

EffectSpec EffectSpec::point(double null_effect, double alternative) {
  if (!std::isfinite(alternative)) throw ContractError("effect spec: alternative must be finite");
  return EffectSpec(null_effect, alternative);
}

EffectSpec EffectSpec::mixture(double null_effect, PriorGrid prior) {
  return EffectSpec(null_effect, std::move(prior));
}

double EffectSpec::point_alternative() const {
  if (!is_point()) throw ContractError("effect spec has a prior grid, not a point alternative");
  return std::get<double>(alternative_);
}

const PriorGrid& EffectSpec::prior() const {
  if (is_point()) throw ContractError("effect spec has a point alternative, not a prior grid");
  return std::get<PriorGrid>(alternative_);
}

std::vector<PriorAtom> EffectSpec::atoms() const {
  if (is_point()) return {{std::get<double>(alternative_), 1.0}};
  const auto span = prior().atoms();
  return {span.begin(), span.end()};
}

bool EffectSpec::guarantee_void() const {
  const auto all = atoms();
  return std::any_of(all.begin(), all.end(), [this](const PriorAtom& a) { return a.effect < null_; });
}

bool EffectSpec::degenerate() const {
  const auto all = atoms();
  return std::all_of(all.begin(), all.end(), [this](const PriorAtom& a) { return a.effect == null_; });
}

StoppingRule::StoppingRule(double alpha) : alpha_(alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ContractError("alpha must lie in (0, 1)");
}

double StoppingRule::log_threshold() const { return std::log(threshold()); }

EValue evalue(double log_e) {
  const double v = std::exp(log_e);
  return {v, std::isinf(v) && std::isfinite(log_e)};
}

double mixture_log_evalue(std::span<const double> component_log_es, const PriorGrid& prior) {
  if (component_log_es.size() != prior.size()) {
    throw ContractError("mixture: " + std::to_string(component_log_es.size()) +
                        " components for a prior with " + std::to_string(prior.size()) + " atoms");
  }
  const auto atoms = prior.atoms();
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    top = std::max(top, std::log(atoms[j].weight) + component_log_es[j]);
  }
  if (!std::isfinite(top)) return top;
  double sum = 0.0;
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    sum += std::exp(std::log(atoms[j].weight) + component_log_es[j] - top);
  }
  return top + std::log(sum);
}

bool should_reject(double log_e, const StoppingRule& rule) {
  // 1/alpha is compared exactly when it is representable, e.g. 20 for 0.05;
  // log(20) and -log(0.05) differ in the last bit.
  return log_e >= rule.log_threshold();
}

const TrajectoryRecord& Trajectory::append(std::size_t n, double statistic, double log_e,
                                           const StoppingRule& rule) {
  if (!records_.empty() && n <= records_.back().n) {
    throw ContractError("trajectory: n must be strictly increasing");
  }
  const bool crossed = should_reject(log_e, rule);
  if (crossed && !first_crossing_) first_crossing_ = n;
  records_.push_back({n, statistic, log_e, first_crossing_.has_value()});
  return records_.back();
}

}  // namespace evseq
