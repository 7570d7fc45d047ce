#include "evseq/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

namespace evseq::quadrature {
namespace {

// Kronrod nodes on [0, 1]; odd indices are the embedded Gauss nodes.
constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Segment& other) const { return error < other.error; }
};

Segment gauss_kronrod(const std::function<double(double)>& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  std::array<double, 15> fv{};
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kNodes[i];
    const double f1 = f(center - dx);
    const double f2 = f(center + dx);
    fv[2 * i] = f1;
    fv[2 * i + 1] = f2;
    kronrod += kKronrodWeights[i] * (f1 + f2);
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * (f1 + f2);
  }
  fv[14] = fc;

  // QUADPACK-style error estimate.
  const double mean = 0.5 * kronrod;
  double resasc = kKronrodWeights[7] * std::abs(fc - mean);
  double resabs = kKronrodWeights[7] * std::abs(fc);
  for (int i = 0; i < 7; ++i) {
    resasc += kKronrodWeights[i] * (std::abs(fv[2 * i] - mean) + std::abs(fv[2 * i + 1] - mean));
    resabs += kKronrodWeights[i] * (std::abs(fv[2 * i]) + std::abs(fv[2 * i + 1]));
  }
  resasc *= std::abs(half);
  resabs *= std::abs(half);

  double error = std::abs((kronrod - gauss) * half);
  if (resasc != 0.0 && error != 0.0) {
    error = resasc * std::min(1.0, std::pow(200.0 * error / resasc, 1.5));
  }
  const double roundoff = 50.0 * std::numeric_limits<double>::epsilon() * resabs;
  error = std::max(error, roundoff);
  return {a, b, kronrod * half, error};
}

}  // namespace

Result integrate(const std::function<double(double)>& f, double a, double b,
                 const Options& options) {
  Result result;
  if (a == b) {
    result.converged = true;
    return result;
  }

  std::priority_queue<Segment> queue;
  queue.push(gauss_kronrod(f, a, b));
  result.evaluations = 15;

  auto totals = [&queue]() {
    // Copy to sum in a fixed order independent of heap layout.
    std::vector<Segment> all;
    auto copy = queue;
    while (!copy.empty()) {
      all.push_back(copy.top());
      copy.pop();
    }
    std::sort(all.begin(), all.end(),
              [](const Segment& l, const Segment& r) { return l.a < r.a; });
    double value = 0.0;
    double error = 0.0;
    for (const auto& s : all) {
      value += s.value;
      error += s.error;
    }
    return std::pair{value, error};
  };

  double value = queue.top().value;
  double error = queue.top().error;
  while (true) {
    const double target = std::max(options.abs_tol, options.rel_tol * std::abs(value));
    if (error <= target) {
      result.converged = true;
      break;
    }
    if (queue.size() >= options.max_intervals) break;

    const Segment worst = queue.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) break;  // interval no longer divisible
    queue.pop();
    const Segment left = gauss_kronrod(f, worst.a, mid);
    const Segment right = gauss_kronrod(f, mid, worst.b);
    result.evaluations += 30;
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
  }

  const auto [v, e] = totals();
  result.value = v;
  result.abs_error = e;
  result.intervals = queue.size();
  if (!result.converged) {
    result.converged = e <= std::max(options.abs_tol, options.rel_tol * std::abs(v));
  }
  return result;
}

}  // namespace evseq::quadrature
