#pragma once

// Numerical integration: fixed composite Gauss-Legendre rules for the
// parameter-dependent mgf integrals, adaptive Simpson for one-off checks.

#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace fluctruin::quad {

/// Nodes and weights of a quadrature rule, possibly with a density already
/// folded into the weights.
struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const noexcept { return nodes.size(); }
  bool empty() const noexcept { return nodes.empty(); }
  void clear() noexcept {
    nodes.clear();
    weights.clear();
  }
  void push(double x, double w) {
    nodes.push_back(x);
    weights.push_back(w);
  }
  void append(const Rule& other);

  template <class F>
  double integrate(F&& f) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
    return acc;
  }
};

/// Gauss-Legendre reference rule on [-1, 1]; cached per order.
const Rule& gauss_legendre(int order);

struct RuleOptions {
  int order = 16;
  /// Panels longer than this are split evenly.
  double max_panel = 0.5;
  /// Geometric grading toward the left end (integrable endpoint singularities).
  bool graded_left = false;
};

/// Appends a composite Gauss rule on [a, b] (no-op when b <= a).
void append_gauss(Rule& rule, double a, double b, const RuleOptions& opts = {});

/// Composite Gauss rule on [a, b] with panel boundaries forced at every
/// breakpoint strictly inside (a, b).
Rule composite_gauss(double a, double b, std::span<const double> breakpoints,
                     const RuleOptions& opts = {});

struct AdaptiveResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
  long evaluations = 0;
};

/// Adaptive composite Simpson with absolute tolerance `tol`; recursion depth
/// is capped at `max_depth` (so at most 2^max_depth subintervals).
AdaptiveResult adaptive_simpson(const std::function<double(double)>& f, double a,
                                double b, double tol = 1e-9, int max_depth = 20);

}  // namespace fluctruin::quad
