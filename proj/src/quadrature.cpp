#include "fluctruin/quadrature.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace fluctruin::quad {

void Rule::append(const Rule& other) {
  nodes.insert(nodes.end(), other.nodes.begin(), other.nodes.end());
  weights.insert(weights.end(), other.weights.begin(), other.weights.end());
}

namespace {

Rule build_gauss_legendre(int n) {
  Rule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  return r;
}

}  // namespace

const Rule& gauss_legendre(int order) {
  if (order < 1 || order > 256) throw std::invalid_argument("gauss_legendre: order out of range");
  static std::mutex mu;
  static std::map<int, Rule> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, build_gauss_legendre(order)).first;
  return it->second;
}

namespace {

void append_panel(Rule& rule, const Rule& ref, double a, double b) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  for (std::size_t i = 0; i < ref.size(); ++i) rule.push(mid + half * ref.nodes[i], half * ref.weights[i]);
}

}  // namespace

void append_gauss(Rule& rule, double a, double b, const RuleOptions& opts) {
  if (!(b > a)) return;
  const Rule& ref = gauss_legendre(opts.order);
  double start = a;
  if (opts.graded_left) {
    // panels [a + L q^{k+1}, a + L q^k] down to a relative width of ~1e-12
    const double len = std::min(b - a, opts.max_panel);
    constexpr double q = 0.15;
    double right = a + len;
    for (int k = 0; k < 14; ++k) {
      const double left = a + (right - a) * q;
      append_panel(rule, ref, left, right);
      right = left;
    }
    append_panel(rule, ref, a, right);
    start = a + len;
    if (!(b > start)) return;
  }
  const int panels = std::max(1, static_cast<int>(std::ceil((b - start) / opts.max_panel - 1e-12)));
  const double h = (b - start) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = start + p * h;
    const double hi = (p + 1 == panels) ? b : start + (p + 1) * h;
    append_panel(rule, ref, lo, hi);
  }
}

Rule composite_gauss(double a, double b, std::span<const double> breakpoints,
                     const RuleOptions& opts) {
  Rule rule;
  if (!(b > a)) return rule;
  std::vector<double> cuts{a};
  for (double bp : breakpoints)
    if (bp > a && bp < b) cuts.push_back(bp);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    RuleOptions o = opts;
    o.graded_left = opts.graded_left && i == 0;
    append_gauss(rule, cuts[i], cuts[i + 1], o);
  }
  return rule;
}

namespace {

struct SimpsonState {
  const std::function<double(double)>& f;
  double tol;
  int max_depth;
  AdaptiveResult result;
};

double simpson_recurse(SimpsonState& st, double a, double b, double fa, double fm,
                       double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = st.f(lm), frm = st.f(rm);
  st.result.evaluations += 2;
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth >= st.max_depth) {
    st.result.converged = false;
    st.result.error += std::abs(delta) / 15.0;
    return left + right + delta / 15.0;
  }
  if (std::abs(delta) <= 15.0 * tol) {
    st.result.error += std::abs(delta) / 15.0;
    return left + right + delta / 15.0;
  }
  return simpson_recurse(st, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
         simpson_recurse(st, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
}

}  // namespace

AdaptiveResult adaptive_simpson(const std::function<double(double)>& f, double a,
                                double b, double tol, int max_depth) {
  SimpsonState st{f, tol, max_depth, {}};
  if (!(b > a)) return st.result;
  // start from 8 panels so narrow features are not missed by the first probe
  constexpr int kInitial = 8;
  const double h = (b - a) / kInitial;
  double total = 0.0;
  for (int i = 0; i < kInitial; ++i) {
    const double lo = a + i * h, hi = (i + 1 == kInitial) ? b : a + (i + 1) * h;
    const double fa = f(lo), fb = f(hi), fm = f(0.5 * (lo + hi));
    st.result.evaluations += 3;
    const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
    total += simpson_recurse(st, lo, hi, fa, fm, fb, whole, tol / kInitial, 3);
  }
  st.result.value = total;
  return st.result;
}

}  // namespace fluctruin::quad
