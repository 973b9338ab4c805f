#include "fluctruin/mgf.hpp"

#include "fluctruin/simd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fluctruin {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_domain(const ModelParams& p, double theta) {
  if (p.nu > 0.0 && !(theta < p.theta_max()))
    throw std::domain_error("mgf: theta at or beyond the claim mgf abscissa");
}

// Sum of w h(x) exp(L (x - x0)) over a Gauss rule for the law h on (a, b].
// Same panel layout as Distribution::density_rule, without allocating.
double density_exp_integral(const Distribution& h, double a, double b, double L, double x0) {
  if (h.is_atomic()) {
    const double v = h.parameters()[0];
    return (a < v && v <= b) ? std::exp(L * (v - x0)) : 0.0;
  }
  const double lo = std::max(a, 0.0);
  const double hi = std::min(b, h.support_upper());
  if (!(hi > lo)) return 0.0;
  if (h.singular_at_zero() && lo == 0.0) {
    const quad::Rule rule = h.density_rule(lo, hi);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) acc += rule.weights[i] * std::exp(L * (rule.nodes[i] - x0));
    return acc;
  }
  const quad::Rule& ref = quad::gauss_legendre(16);
  double edges[8];
  int ne = 0;
  edges[ne++] = lo;
  for (double bp : h.breakpoints())
    if (bp > lo && bp < hi && ne < 7) edges[ne++] = bp;
  edges[ne++] = hi;
  double acc = 0.0;
  for (int e = 0; e + 1 < ne; ++e) {
    const double pa = edges[e], pb = edges[e + 1];
    const int panels = std::max(1, static_cast<int>(std::ceil((pb - pa) / 0.5 - 1e-12)));
    const double len = (pb - pa) / panels;
    for (int q = 0; q < panels; ++q) {
      const double c = pa + (q + 0.5) * len, hw = 0.5 * len;
      for (std::size_t i = 0; i < ref.size(); ++i) {
        const double x = c + hw * ref.nodes[i];
        acc += hw * ref.weights[i] * h.density(x) * std::exp(L * (x - x0));
      }
    }
  }
  return acc;
}

double log_sum(const std::vector<std::pair<double, double>>& terms) {
  // terms: (log prefactor, positive multiplier)
  double mx = -kInf;
  for (const auto& [lg, v] : terms)
    if (v > 0.0) mx = std::max(mx, lg);
  if (mx == -kInf) return -kInf;
  if (!std::isfinite(mx)) return mx;
  double acc = 0.0;
  for (const auto& [lg, v] : terms)
    if (v > 0.0) acc += v * std::exp(lg - mx);
  return mx + std::log(acc);
}

std::vector<double> log_phis(const ModelParams& p, const std::vector<double>& Theta, std::size_t d) {
  std::vector<double> L(d + 2, 0.0);
  for (std::size_t k = 1; k <= d; ++k) {
    require_domain(p, Theta[k]);
    L[k] = log_phi(p, Theta[k]);
  }
  return L;
}

double log_m_minus_multi(const ModelParams& p, const TimeGrid& grid, const DualVector& duals) {
  const std::size_t d = grid.size();
  if (duals.size() != d) throw std::invalid_argument("mgf: dual length does not match grid");
  const auto Om = duals.Omega();
  const auto Th = duals.Theta();
  const auto L = log_phis(p, Th, d);
  std::vector<std::pair<double, double>> terms;
  double E = 0.0;  // sum_{j<k} L_j delta_j
  for (std::size_t k = 1; k <= d; ++k) {
    const double a = grid.time(k - 1), b = grid.time(k);
    const double shift = std::max(0.0, L[k] * (b - a));
    const double I = density_exp_integral(p.residual, a, b, L[k], a) * std::exp(-shift);
    terms.emplace_back(Om[k - 1] + E + shift, I);
    E += L[k] * grid.delta(k);
  }
  terms.emplace_back(Om[d] + E, p.residual.tail(grid.time(d)));
  return log_sum(terms);
}

}  // namespace

TimeGrid::TimeGrid(std::vector<double> times) : t_(std::move(times)) {
  if (t_.empty()) throw std::invalid_argument("TimeGrid: need at least one time");
  double prev = -1.0;
  for (double t : t_) {
    if (!std::isfinite(t) || t < 0.0) throw std::invalid_argument("TimeGrid: times must be finite and >= 0");
    if (!(t > prev)) throw std::invalid_argument("TimeGrid: times must be strictly increasing");
    prev = t;
  }
}

DualVector::DualVector(std::vector<double> w, std::vector<double> th)
    : omega(std::move(w)), theta(std::move(th)) {
  if (omega.size() != theta.size()) throw std::invalid_argument("DualVector: length mismatch");
}

std::vector<double> DualVector::Omega() const {
  std::vector<double> out(size() + 1, 0.0);
  for (std::size_t k = 1; k <= size(); ++k) out[k] = out[k - 1] + omega[k - 1];
  return out;
}

std::vector<double> DualVector::Theta() const {
  std::vector<double> out(size() + 2, 0.0);
  for (std::size_t k = size(); k >= 1; --k) out[k] = out[k + 1] + theta[k - 1];
  return out;
}

// ---------------------------------------------------------------- one point

OnePointCumulant::Moments OnePointCumulant::Table::moments(double L) const {
  Moments m;
  m.shift = std::max(0.0, L * xmax);
  const std::span<const double> xs(x);
  m.s[0] = simd::sum_exp_affine(w0, xs, L, -m.shift);
  m.s[1] = simd::sum_exp_affine(w1, xs, L, -m.shift);
  m.s[2] = simd::sum_exp_affine(w2, xs, L, -m.shift);
  return m;
}

OnePointCumulant::OnePointCumulant(const ModelParams& p, double t) : p_(&p), t_(t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("OnePointCumulant: t must be > 0");
  const auto fill = [t](Table& tab, const quad::Rule& rule, auto weight) {
    tab.xmax = t;
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const double x = rule.nodes[i], w = rule.weights[i] * weight(x);
      tab.x.push_back(x);
      tab.w0.push_back(w);
      tab.w1.push_back(w * x);
      tab.w2.push_back(w * x * x);
    }
  };
  fill(minus_, p.residual.density_rule(0.0, t), [](double) { return 1.0; });
  minus_tail_ = p.residual.tail(t);
  fill(plus_dens_, p.sojourn.density_rule(0.0, t), [t](double x) { return t - x; });
  fill(plus_tail_, p.sojourn.tail_rule(0.0, t), [](double) { return 1.0; });
}

OnePointCumulant::Eval OnePointCumulant::eval(double omega, double theta) const {
  const ModelParams& p = *p_;
  Eval out;
  if ((p.nu > 0.0 && !(theta < p.theta_max())) || !std::isfinite(omega) || !std::isfinite(theta)) {
    out.value = kInf;
    return out;
  }
  const LogPhi lp = log_phi_derivs(p, theta);
  const double L = lp.value, L1 = lp.d1, L2 = lp.d2, t = t_;
  if (!std::isfinite(L)) {
    out.value = kInf;
    return out;
  }

  if (p.f0 > 0.0) {
    const Moments A = minus_.moments(L);
    const double B0 = minus_tail_ * std::exp(L * t - A.shift);
    const double B[3] = {B0, t * B0, t * t * B0};
    // scale so that the larger of 1 and e^omega becomes 1
    const double sA = omega > 0.0 ? std::exp(-omega) : 1.0;
    const double sB = omega > 0.0 ? 1.0 : std::exp(omega);
    double X[3];
    for (int j = 0; j < 3; ++j) X[j] = sA * A.s[j] + sB * B[j];
    if (!(X[0] > 0.0)) {
      out.value = kInf;
      return out;
    }
    const double logm = A.shift + std::max(omega, 0.0) + std::log(X[0]);
    const double gw = sB * B[0] / X[0];
    const double gt = L1 * X[1] / X[0];
    const double hww = gw - gw * gw;
    const double hwt = L1 * sB * B[1] / X[0] - gw * gt;
    const double htt = (L2 * X[1] + L1 * L1 * X[2]) / X[0] - gt * gt;
    out.value += p.f0 * logm;
    out.grad += p.f0 * Eigen::Vector2d(gw, gt);
    out.hess += p.f0 * (Eigen::Matrix2d() << hww, hwt, hwt, htt).finished();
  }

  if (p.lambda > 0.0) {
    const Moments P = plus_dens_.moments(L);
    const Moments Q = plus_tail_.moments(L);
    const double eP = std::exp(P.shift), eQ = std::exp(Q.shift + omega);
    if (!std::isfinite(eP) || !std::isfinite(eQ)) {
      out.value = kInf;
      return out;
    }
    double Pj[3], Qj[3];
    for (int j = 0; j < 3; ++j) {
      Pj[j] = eP * P.s[j];
      Qj[j] = eQ * Q.s[j];
    }
    const double lam = p.lambda;
    out.value += lam * (Pj[0] + Qj[0] - t);
    out.grad += lam * Eigen::Vector2d(Qj[0], L1 * (Pj[1] + Qj[1]));
    const double hww = Qj[0];
    const double hwt = L1 * Qj[1];
    const double htt = L2 * (Pj[1] + Qj[1]) + L1 * L1 * (Pj[2] + Qj[2]);
    out.hess += lam * (Eigen::Matrix2d() << hww, hwt, hwt, htt).finished();
  }
  if (!std::isfinite(out.value)) out.value = kInf;
  return out;
}

double OnePointCumulant::m_minus(double omega, double theta) const {
  require_domain(*p_, theta);
  const double L = log_phi(*p_, theta);
  const Moments A = minus_.moments(L);
  const double B0 = minus_tail_ * std::exp(L * t_ - A.shift);
  return std::exp(A.shift) * (A.s[0] + std::exp(omega) * B0);
}

double OnePointCumulant::log_m_plus(double omega, double theta, PlusReading reading) const {
  require_domain(*p_, theta);
  if (p_->lambda == 0.0) return 0.0;
  const double L = log_phi(*p_, theta);
  const Moments P = plus_dens_.moments(L);
  const Moments Q = plus_tail_.moments(L);
  const double inner = std::exp(P.shift) * P.s[0] + std::exp(Q.shift + omega) * Q.s[0];
  return p_->lambda * (inner - (reading == PlusReading::MinusT ? t_ : 1.0));
}

double m_minus_one(const ModelParams& p, double t, double omega, double theta) {
  return OnePointCumulant(p, t).m_minus(omega, theta);
}

double log_m_plus_one(const ModelParams& p, double t, double omega, double theta, PlusReading reading) {
  return OnePointCumulant(p, t).log_m_plus(omega, theta, reading);
}

double m_plus_one(const ModelParams& p, double t, double omega, double theta, PlusReading reading) {
  return std::exp(log_m_plus_one(p, t, omega, theta, reading));
}

// --------------------------------------------------------------- multi point

double m_minus_multi(const ModelParams& p, const TimeGrid& grid, const DualVector& duals) {
  return std::exp(log_m_minus_multi(p, grid, duals));
}

double log_m_plus_multi(const ModelParams& p, const TimeGrid& grid, const DualVector& duals) {
  const std::size_t d = grid.size();
  if (duals.size() != d) throw std::invalid_argument("mgf: dual length does not match grid");
  const auto Om = duals.Omega();
  const auto Th = duals.Theta();
  const auto L = log_phis(p, Th, d);
  if (p.lambda == 0.0) return 0.0;
  const Distribution& h = p.sojourn;
  const auto bps = h.breakpoints();

  double total = 0.0;
  for (std::size_t l = 1; l <= d; ++l) {
    const double dl = grid.delta(l);
    if (!(dl > 0.0)) continue;
    const double t0 = grid.time(l - 1);
    // A[k] = t_k - t_{l-1}, C[k] = Omega_k - Omega_{l-1} + sum_{m=l+1}^k L_m delta_m
    std::vector<double> A(d + 1, 0.0), C(d + 1, 0.0);
    double sumL = 0.0;
    for (std::size_t k = l; k <= d; ++k) {
      if (k > l) sumL += L[k] * grid.delta(k);
      A[k] = grid.time(k) - t0;
      C[k] = Om[k] - Om[l - 1] + sumL;
    }
    std::vector<double> outer_bps;
    for (std::size_t k = l; k <= d; ++k)
      for (double b : bps) {
        const double s = A[k] - b;
        if (s > 0.0 && s < dl) outer_bps.push_back(s);
      }
    std::sort(outer_bps.begin(), outer_bps.end());
    const quad::Rule outer = quad::composite_gauss(0.0, dl, outer_bps);
    double acc = 0.0;
    for (std::size_t i = 0; i < outer.size(); ++i) {
      const double s = outer.nodes[i];
      // left within the arrival interval
      double v = density_exp_integral(h, 0.0, dl - s, L[l], 0.0);
      // left in [t_k, t_{k+1})
      for (std::size_t k = l; k + 1 <= d; ++k) {
        const double pre = C[k] + L[l] * (dl - s);
        v += std::exp(pre) * density_exp_integral(h, A[k] - s, A[k + 1] - s, L[k + 1], A[k] - s);
      }
      // still present at t_d
      v += h.tail(A[d] - s) * std::exp(C[d] + L[l] * (dl - s));
      acc += outer.weights[i] * v;
    }
    total += p.lambda * (acc - dl);
  }
  return total;
}

double m_plus_multi(const ModelParams& p, const TimeGrid& grid, const DualVector& duals) {
  return std::exp(log_m_plus_multi(p, grid, duals));
}

double log_n(const ModelParams& p, const TimeGrid& grid, const DualVector& duals) {
  for (std::size_t k = 0; k < duals.size(); ++k)
    if (!std::isfinite(duals.omega[k]) || !std::isfinite(duals.theta[k])) return kInf;
  try {
    double v = 0.0;
    if (p.f0 > 0.0) v += p.f0 * log_m_minus_multi(p, grid, duals);
    v += log_m_plus_multi(p, grid, duals);
    return std::isfinite(v) ? v : kInf;
  } catch (const std::domain_error&) {
    return kInf;
  }
}

// ------------------------------------------------------------------ limits

DualFunction::DualFunction(double T, std::vector<double> omega, std::vector<double> theta)
    : T_(T), omega_(std::move(omega)), theta_(std::move(theta)) {
  if (!(T > 0.0)) throw std::invalid_argument("DualFunction: T must be > 0");
  if (omega_.size() < 2 || omega_.size() != theta_.size())
    throw std::invalid_argument("DualFunction: need matching node arrays of length >= 2");
  const double h = step();
  omega_cum_.assign(omega_.size(), 0.0);
  theta_cum_.assign(theta_.size(), 0.0);
  for (std::size_t i = 1; i < omega_.size(); ++i) {
    omega_cum_[i] = omega_cum_[i - 1] + 0.5 * h * (omega_[i - 1] + omega_[i]);
    theta_cum_[i] = theta_cum_[i - 1] + 0.5 * h * (theta_[i - 1] + theta_[i]);
  }
}

DualFunction DualFunction::sample(double T, std::size_t intervals, const std::function<double(double)>& w,
                                  const std::function<double(double)>& th) {
  std::vector<double> wv(intervals + 1), tv(intervals + 1);
  for (std::size_t i = 0; i <= intervals; ++i) {
    const double s = T * static_cast<double>(i) / static_cast<double>(intervals);
    wv[i] = w(s);
    tv[i] = th(s);
  }
  return {T, std::move(wv), std::move(tv)};
}

double DualFunction::interp(const std::vector<double>& v, double s) const {
  const double h = step();
  const double x = std::clamp(s, 0.0, T_) / h;
  const std::size_t i = std::min(static_cast<std::size_t>(x), intervals() - 1);
  const double f = x - static_cast<double>(i);
  return (1.0 - f) * v[i] + f * v[i + 1];
}

double DualFunction::omega(double s) const { return interp(omega_, s); }
double DualFunction::theta(double s) const { return interp(theta_, s); }

namespace {
double cumulative(const std::vector<double>& v, const std::vector<double>& cum, double s, double h,
                  std::size_t n) {
  const double x = s / h;
  const std::size_t i = std::min(static_cast<std::size_t>(std::max(x, 0.0)), n - 1);
  const double dx = s - static_cast<double>(i) * h;
  const double f = dx / h;
  const double vs = (1.0 - f) * v[i] + f * v[i + 1];
  return cum[i] + 0.5 * dx * (v[i] + vs);
}
}  // namespace

double DualFunction::Omega(double s) const {
  return cumulative(omega_, omega_cum_, std::clamp(s, 0.0, T_), step(), intervals());
}

double DualFunction::Theta(double s) const {
  return theta_cum_.back() - cumulative(theta_, theta_cum_, std::clamp(s, 0.0, T_), step(), intervals());
}

PsiTable::PsiTable(const ModelParams& p, const DualFunction& duals) : duals_(&duals) {
  const std::size_t n = duals.intervals();
  const double h = duals.step();
  value_.assign(n + 1, 0.0);
  slope_.assign(n + 1, 0.0);
  const quad::Rule& gl = quad::gauss_legendre(8);
  const auto lp = [&p](double th) {
    require_domain(p, th);
    return log_phi(p, th);
  };
  for (std::size_t i = 0; i <= n; ++i) {
    const double s = h * static_cast<double>(i);
    slope_[i] = duals.omega(s) + lp(duals.Theta(s));
    if (i == n) break;
    double acc = 0.0;
    for (std::size_t q = 0; q < gl.size(); ++q) {
      const double x = s + 0.5 * h * (gl.nodes[q] + 1.0);
      acc += 0.5 * h * gl.weights[q] * lp(duals.Theta(x));
    }
    value_[i + 1] = value_[i] + (duals.Omega(s + h) - duals.Omega(s)) + acc;
  }
}

double PsiTable::operator()(double u) const {
  const std::size_t n = duals_->intervals();
  const double h = duals_->step();
  const double x = std::clamp(u, 0.0, duals_->horizon()) / h;
  const std::size_t i = std::min(static_cast<std::size_t>(x), n - 1);
  const double f = x - static_cast<double>(i);
  const double f2 = f * f, f3 = f2 * f;
  return (2 * f3 - 3 * f2 + 1) * value_[i] + (f3 - 2 * f2 + f) * h * slope_[i] +
         (-2 * f3 + 3 * f2) * value_[i + 1] + (f3 - f2) * h * slope_[i + 1];
}

double psi(const ModelParams& p, const DualFunction& duals, double u) {
  if (u < 0.0 || u > duals.horizon()) throw std::invalid_argument("psi: u outside [0, T]");
  return PsiTable(p, duals)(u);
}

double m_minus_limit(const ModelParams& p, const DualFunction& duals) {
  const PsiTable psi_t(p, duals);
  const double T = duals.horizon();
  const quad::Rule rule = p.residual.density_rule(0.0, T);
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) acc += rule.weights[i] * std::exp(psi_t(rule.nodes[i]));
  return acc + p.residual.tail(T) * std::exp(psi_t(T));
}

double log_m_plus_limit(const ModelParams& p, const DualFunction& duals) {
  const PsiTable psi_t(p, duals);
  if (p.lambda == 0.0) return 0.0;
  const double T = duals.horizon();
  std::vector<double> bps;
  for (double b : p.sojourn.breakpoints())
    if (T - b > 0.0 && T - b < T) bps.push_back(T - b);
  std::sort(bps.begin(), bps.end());
  const quad::Rule outer = quad::composite_gauss(0.0, T, bps);
  const double psiT = psi_t(T);
  double acc = 0.0;
  for (std::size_t i = 0; i < outer.size(); ++i) {
    const double s = outer.nodes[i];
    const double ps = psi_t(s);
    const quad::Rule inner = p.sojourn.density_rule(0.0, T - s);
    double phi_s = 0.0;
    for (std::size_t q = 0; q < inner.size(); ++q)
      phi_s += inner.weights[q] * std::exp(psi_t(s + inner.nodes[q]) - ps);
    const double phibar = p.sojourn.tail(T - s) * std::exp(psiT - ps);
    acc += outer.weights[i] * (phi_s + phibar - 1.0);
  }
  return p.lambda * acc;
}

double m_plus_limit(const ModelParams& p, const DualFunction& duals) {
  return std::exp(log_m_plus_limit(p, duals));
}

std::pair<TimeGrid, DualVector> embed_duals(double T, std::size_t d, const std::function<double(double)>& w,
                                            const std::function<double(double)>& th) {
  const double delta = T / static_cast<double>(d);
  std::vector<double> t(d), wv(d), tv(d);
  for (std::size_t k = 1; k <= d; ++k) {
    const double s = delta * static_cast<double>(k);
    t[k - 1] = s;
    wv[k - 1] = delta * w(s);
    tv[k - 1] = delta * th(s);
  }
  t.back() = T;
  return {TimeGrid(std::move(t)), DualVector(std::move(wv), std::move(tv))};
}

}  // namespace fluctruin
