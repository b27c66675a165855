#ifndef IHUM_CONVEXITY_HPP
#define IHUM_CONVEXITY_HPP

// Numerical counterparts of the logarithmic convexity argument: the Gaussian
// weight Phi = s phi / Upsilon, the weighted state F = U e^{Phi/2}, the
// frequency function N = <-S F, F> / ||F||^2, the explicit constants of the
// differential inequality, the three-point interpolation bound and the
// single-time observability estimate together with its Young-inequality
// corollary.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ihum/grid.hpp"
#include "ihum/propagator.hpp"

namespace ihum {

struct WeightParams {
  double x0 = 0.5;
  double s = 0.9;
  double hbar = 0.004;
  double t_final = 0.02;

  /// Upper bound on s for the constants to be valid: min(2/sqrt(x0-a), 2/sqrt(b-x0), 1).
  double s_bound(const Grid& g) const {
    return std::min({2.0 / std::sqrt(x0 - g.a()), 2.0 / std::sqrt(g.b() - x0), 1.0});
  }

  /// s == 0 is accepted as a degenerate mode in which the weight vanishes.
  void validate(const Grid& g) const {
    if (!(x0 > g.a() && x0 < g.b())) throw std::invalid_argument("weight: x0 must lie in (a, b)");
    if (!(hbar > 0.0 && hbar <= 1.0)) throw std::invalid_argument("weight: hbar must lie in (0, 1]");
    if (!(t_final > 0.0)) throw std::invalid_argument("weight: t_final must be positive");
    if (!(s >= 0.0) || s > s_bound(g))
      throw std::invalid_argument("weight: s = " + std::to_string(s) +
                                  " violates 0 <= s <= min(2/sqrt(x0-a), 2/sqrt(b-x0), 1) = " +
                                  std::to_string(s_bound(g)));
  }

  double upsilon(double t) const { return t_final - t + hbar; }
  static double varphi(double x, double x0) { return -(x - x0) * (x - x0) / 4.0; }
  double varphi(double x) const { return varphi(x, x0); }
  double varphi_x(double x) const { return -(x - x0) / 2.0; }

  double phi(double x, double t) const { return s * varphi(x) / upsilon(t); }
  double phi_x(double x, double t) const { return s * varphi_x(x) / upsilon(t); }
  double phi_xx(double, double t) const { return -0.5 * s / upsilon(t); }
  double phi_t(double x, double t) const {
    const double u = upsilon(t);
    return s * varphi(x) / (u * u);
  }
  /// eta = 1/2 (Phi_t + 1/2 |Phi_x|^2)
  double eta(double x, double t) const {
    const double px = phi_x(x, t);
    return 0.5 * (phi_t(x, t) + 0.5 * px * px);
  }
};

inline double weight_phi(double x, double t, const WeightParams& wp) { return wp.phi(x, t); }

/// F = U e^{Phi(., t)/2}, traces included.
inline State weighted_state(const State& u, double t, const WeightParams& wp,
                            const Discretization& d) {
  d.check(u);
  State f(u.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    f[i] = u[i] * std::exp(0.5 * wp.phi(d.grid().node(i), t));
  return f;
}

/// <S F, F> for S = (d_xx + eta, d_x|a + Phi_t(a)/2, -d_x|b + Phi_t(b)/2).
/// Interior: three-point Laplacian; at the end nodes the second derivative and
/// the boundary fluxes use second-order one-sided stencils. The integral is a
/// trapezoid rule and the traces enter with unit weight.
inline double symmetric_form(const State& f, double t, const WeightParams& wp,
                             const Discretization& d) {
  d.check(f);
  const Grid& g = d.grid();
  const std::size_t n = g.nx();
  if (n < 3) throw std::invalid_argument("frequency: needs nx >= 3 for one-sided stencils");
  const double dx = g.dx();
  const double inv2 = 1.0 / (dx * dx);
  double integral = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    double fxx;
    if (i == 0)
      fxx = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) * inv2;
    else if (i == n)
      fxx = (2.0 * f[n] - 5.0 * f[n - 1] + 4.0 * f[n - 2] - f[n - 3]) * inv2;
    else
      fxx = (f[i + 1] - 2.0 * f[i] + f[i - 1]) * inv2;
    const double q = (i == 0 || i == n) ? 0.5 * dx : dx;
    integral += q * (fxx + wp.eta(g.node(i), t) * f[i]) * f[i];
  }
  const double fx_a = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dx);
  const double fx_b = (3.0 * f[n] - 4.0 * f[n - 1] + f[n - 2]) / (2.0 * dx);
  const double trace_a = (fx_a + 0.5 * wp.phi_t(g.a(), t) * f[0]) * f[0];
  const double trace_b = (-fx_b + 0.5 * wp.phi_t(g.b(), t) * f[n]) * f[n];
  return integral + trace_a + trace_b;
}

/// N(t) evaluated directly from the operator.
inline double frequency_direct(const State& u, double t, const WeightParams& wp,
                               const Discretization& d) {
  const State f = weighted_state(u, t, wp, d);
  const double nf = inner(f, f, d);
  if (!(nf > 0.0)) throw std::domain_error("frequency: undefined for a zero state");
  return -symmetric_form(f, t, wp, d) / nf;
}

struct FrequencySample {
  double t = 0.0;
  double norm_f = 0.0;
  double direct = 0.0;
  /// -1/2 d/dt ln ||F||^2 by centered differences; NaN at the first and last snapshot.
  double oracle = std::numeric_limits<double>::quiet_NaN();
};

/// Frequency along an uncontrolled trajectory with uniformly spaced snapshots.
inline std::vector<FrequencySample> frequency(const Trajectory& traj, const WeightParams& wp,
                                              const Discretization& d) {
  if (traj.impulse_index) throw std::invalid_argument("frequency: needs an uncontrolled trajectory");
  const std::size_t m = traj.size();
  std::vector<FrequencySample> out(m);
  std::vector<double> log_nf(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double t = traj.times[k];
    const State f = weighted_state(traj.states[k], t, wp, d);
    const double nf = inner(f, f, d);
    if (!(nf > 0.0)) throw std::domain_error("frequency: undefined for a zero state");
    out[k].t = t;
    out[k].norm_f = std::sqrt(nf);
    out[k].direct = -symmetric_form(f, t, wp, d) / nf;
    log_nf[k] = std::log(nf);
  }
  for (std::size_t k = 1; k + 1 < m; ++k) {
    const double h_lo = traj.times[k] - traj.times[k - 1];
    const double h_hi = traj.times[k + 1] - traj.times[k];
    if (std::abs(h_lo - h_hi) > 1e-9 * h_hi) continue;
    out[k].oracle = -0.5 * (log_nf[k + 1] - log_nf[k - 1]) / (h_lo + h_hi);
  }
  return out;
}

struct ConvexityConstants {
  double c_const = 0.0;        // C
  double c0 = 0.0;             // C_0
  double ell = 0.0;
  double m_ell = 0.0;          // M_ell
  double d_ell = 0.0;          // D_ell
  double m_three_point = 0.0;  // M
  double d_three_point = 0.0;  // D
};

/// C = max((phi_x(b) - 1)^2 / (4(b - x0)), (phi_x(a) + 1)^2 / (4(x0 - a))).
inline double constant_c(const WeightParams& wp, const Grid& g) {
  const double pb = wp.varphi_x(g.b());
  const double pa = wp.varphi_x(g.a());
  return std::max((pb - 1.0) * (pb - 1.0) / (4.0 * (g.b() - wp.x0)),
                  (pa + 1.0) * (pa + 1.0) / (4.0 * (wp.x0 - g.a())));
}

/// C_0 = 1 - min(s, s^2 (x0 - a)/4, s^2 (b - x0)/4).
inline double constant_c0(const WeightParams& wp, const Grid& g) {
  const double s2 = wp.s * wp.s;
  return 1.0 - std::min({wp.s, s2 * (wp.x0 - g.a()) / 4.0, s2 * (g.b() - wp.x0) / 4.0});
}

/// M = int_{t2}^{t3} Upsilon^{-1-C0} / int_{t1}^{t2} Upsilon^{-1-C0}, using the
/// antiderivative Upsilon(t)^{-C0} / C0.
inline double three_point_m(const WeightParams& wp, double c0, double t1, double t2, double t3) {
  auto prim = [&](double t) { return std::pow(wp.upsilon(t), -c0); };
  return (prim(t3) - prim(t2)) / (prim(t2) - prim(t1));
}

/// D = 2 (1 + M) (t3 - t1)^2 C / hbar^2.
inline double three_point_d(const WeightParams& wp, double c, double m, double t1, double t3) {
  return 2.0 * (1.0 + m) * (t3 - t1) * (t3 - t1) * c / (wp.hbar * wp.hbar);
}

/// M_ell = ((ell+1)^C0 - 1) / (1 - ((ell+1)/(2 ell+1))^C0).
inline double constant_m_ell(double c0, double ell) {
  return (std::pow(ell + 1.0, c0) - 1.0) / (1.0 - std::pow((ell + 1.0) / (2.0 * ell + 1.0), c0));
}

/// D_ell = 2 C ell^2 (1 + M_ell).
inline double constant_d_ell(double c, double ell, double m_ell) {
  return 2.0 * c * ell * ell * (1.0 + m_ell);
}

inline void check_time_triple(const WeightParams& wp, double t1, double t2, double t3) {
  if (!(0.0 < t1 && t1 < t2 && t2 < t3 && t3 <= wp.t_final * (1.0 + 1e-12)))
    throw std::invalid_argument("three-point: need 0 < t1 < t2 < t3 <= T");
}

inline ConvexityConstants proof_constants(const WeightParams& wp, const Grid& g, double ell,
                                          double t1, double t2, double t3) {
  wp.validate(g);
  if (!(wp.s > 0.0)) throw std::invalid_argument("constants: s must be positive");
  check_time_triple(wp, t1, t2, t3);
  if (!(ell > 1.0)) throw std::invalid_argument("constants: ell must exceed 1");
  if (!(2.0 * ell * wp.hbar < wp.t_final))
    throw std::invalid_argument("constants: need 2 ell hbar < T");
  ConvexityConstants k;
  k.c_const = constant_c(wp, g);
  k.c0 = constant_c0(wp, g);
  if (!(k.c0 > 0.0 && k.c0 < 1.0)) throw std::invalid_argument("constants: C0 outside (0, 1)");
  k.ell = ell;
  k.m_three_point = three_point_m(wp, k.c0, t1, t2, t3);
  k.d_three_point = three_point_d(wp, k.c_const, k.m_three_point, t1, t3);
  k.m_ell = constant_m_ell(k.c0, ell);
  k.d_ell = constant_d_ell(k.c_const, ell, k.m_ell);
  return k;
}

struct ThreePointResult {
  double norm_sq[3] = {0.0, 0.0, 0.0};  // ||F(t_i)||^2
  double m = 0.0;
  double d = 0.0;
  double slack = 0.0;      // M ln n1 + ln n3 + D - (1 + M) ln n2
  double allowance = 0.0;  // 1e-6 + 5 (dx + dt) (|ln n1| + |ln n2| + |ln n3|)
  bool passes = false;
};

/// Log form of (||F(t2)||^2)^{1+M} <= (||F(t1)||^2)^M ||F(t3)||^2 e^D.
inline ThreePointResult three_point_check(const State& u0, const WeightParams& wp, double t1,
                                          double t2, double t3, const Discretization& d,
                                          const TimeScheme& scheme) {
  wp.validate(d.grid());
  check_time_triple(wp, t1, t2, t3);
  ThreePointResult r;
  const double c0 = constant_c0(wp, d.grid());
  r.m = three_point_m(wp, c0, t1, t2, t3);
  r.d = three_point_d(wp, constant_c(wp, d.grid()), r.m, t1, t3);

  const double times[3] = {t1, t2, t3};
  State u = u0;
  double prev = 0.0;
  double logs[3];
  for (int i = 0; i < 3; ++i) {
    u = evolve(u, times[i] - prev, d, scheme);
    prev = times[i];
    const State f = weighted_state(u, times[i], wp, d);
    r.norm_sq[i] = inner(f, f, d);
    if (!(r.norm_sq[i] > 0.0)) throw std::domain_error("three-point: zero weighted norm");
    logs[i] = std::log(r.norm_sq[i]);
  }
  r.slack = r.m * logs[0] + logs[2] + r.d - (1.0 + r.m) * logs[1];
  r.allowance = 1e-6 + 5.0 * (d.grid().dx() + scheme.dt()) *
                           (std::abs(logs[0]) + std::abs(logs[1]) + std::abs(logs[2]));
  r.passes = r.slack >= -r.allowance;
  return r;
}

/// One observation for the single-time estimate
///   ||U(T)|| <= (mu e^{K/T} ||u(T)||_omega)^beta ||U(0)||^{1-beta}.
struct ObservabilitySample {
  double norm_initial = 0.0;  // ||U(0)||
  double norm_omega = 0.0;    // ||u(T)||_{L2(omega)}
  double norm_final = 0.0;    // ||U(T)||
  double t_final = 0.0;
};

struct Lemma11Fit {
  double mu = 0.0;
  double k = 0.0;
  double beta = 0.0;
  double satisfied_fraction = 0.0;
  std::size_t samples = 0;
};

inline bool lemma11_holds(const ObservabilitySample& s, double mu, double k, double beta) {
  const double lhs = std::log(s.norm_final);
  const double rhs =
      beta * (std::log(mu) + k / s.t_final + std::log(s.norm_omega)) +
      (1.0 - beta) * std::log(s.norm_initial);
  return lhs <= rhs + 1e-12 * (1.0 + std::abs(lhs));
}

/// Envelope fit of (mu, K, beta). For each beta on a 0.01 grid in [0.01, 0.99]
/// the normalized bound r_j = y_j / beta - z_j <= ln mu + K / T_j, with
/// y = ln(||U(T)|| / ||U(0)||) and z = ln(||u(T)||_omega / ||U(0)||), is fitted by
/// least squares (K clipped at 0) and then lifted to cover every sample; the beta
/// with the smallest squared gap in y units wins.
inline Lemma11Fit fit_lemma11(std::span<const ObservabilitySample> samples) {
  if (samples.size() < 10) throw std::invalid_argument("fit: need at least 10 samples");
  const std::size_t n = samples.size();
  std::vector<double> y(n), z(n), inv_t(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto& s = samples[j];
    if (!(s.norm_initial > 0.0 && s.norm_omega > 0.0 && s.norm_final > 0.0 && s.t_final > 0.0))
      throw std::invalid_argument("fit: degenerate sample (zero norm or time)");
    y[j] = std::log(s.norm_final / s.norm_initial);
    z[j] = std::log(s.norm_omega / s.norm_initial);
    inv_t[j] = 1.0 / s.t_final;
  }
  double mean_inv = 0.0;
  for (double v : inv_t) mean_inv += v;
  mean_inv /= static_cast<double>(n);
  double var_inv = 0.0;
  for (double v : inv_t) var_inv += (v - mean_inv) * (v - mean_inv);

  Lemma11Fit best;
  double best_cost = std::numeric_limits<double>::infinity();
  std::vector<double> r(n);
  for (int step = 1; step <= 99; ++step) {
    const double beta = 0.01 * step;
    double mean_r = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      r[j] = y[j] / beta - z[j];
      mean_r += r[j];
    }
    mean_r /= static_cast<double>(n);
    double k = 0.0;
    if (var_inv > 1e-14 * mean_inv * mean_inv) {
      double cov = 0.0;
      for (std::size_t j = 0; j < n; ++j) cov += (inv_t[j] - mean_inv) * (r[j] - mean_r);
      k = std::max(0.0, cov / var_inv);
    }
    double c = mean_r - k * mean_inv;
    double lift = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) lift = std::max(lift, r[j] - c - k * inv_t[j]);
    c += lift;
    double cost = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double gap = beta * (c + k * inv_t[j] - r[j]);
      cost += gap * gap;
    }
    if (cost < best_cost) {
      best_cost = cost;
      best.mu = std::exp(c);
      best.k = k;
      best.beta = beta;
    }
  }
  std::size_t ok = 0;
  for (const auto& s : samples) ok += lemma11_holds(s, best.mu, best.k, best.beta) ? 1 : 0;
  best.samples = n;
  best.satisfied_fraction = static_cast<double>(ok) / static_cast<double>(n);
  return best;
}

struct Lemma31Constants {
  double m1 = 0.0;
  double m2 = 0.0;
  double delta = 0.0;
};

/// M1 = K1^{1/beta} (1-beta)^{(1-beta)/(2 beta)} beta^{1/2}, M2 = K2/beta,
/// delta = (1-beta)/beta, for the squared hypothesis
///   ||theta(T)||^2 <= (K1 e^{K2/T})^2 ||v(T)||_omega^{2 beta} ||theta0||^{2(1-beta)}.
inline Lemma31Constants lemma31_constants(double k1, double k2, double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("lemma31: beta must lie in (0, 1)");
  if (!(k1 > 0.0)) throw std::invalid_argument("lemma31: K1 must be positive");
  Lemma31Constants c;
  c.m1 = std::pow(k1, 1.0 / beta) * std::pow(1.0 - beta, (1.0 - beta) / (2.0 * beta)) *
         std::sqrt(beta);
  c.m2 = k2 / beta;
  c.delta = (1.0 - beta) / beta;
  return c;
}

/// Maps a fitted (mu, K, beta) onto the squared hypothesis: K1 = mu^beta, K2 = beta K.
inline Lemma31Constants lemma31_constants_from_fit(const Lemma11Fit& fit) {
  return lemma31_constants(std::pow(fit.mu, fit.beta), fit.beta * fit.k, fit.beta);
}

struct Lemma31Result {
  double lhs = 0.0;  // ||theta(T)||^2
  double rhs = 0.0;  // (M1 e^{M2/T} / eps^delta)^2 ||v(T)||^2_omega + eps^2 ||theta0||^2
  double slack = 0.0;
};

inline Lemma31Result lemma31_check(const State& theta0, double epsilon, const Lemma31Constants& c,
                                   const Discretization& d, const SubdomainMask& mask,
                                   const TimeScheme& scheme) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("lemma31: epsilon must be positive");
  const double t = scheme.t_final;
  const State end = evolve(theta0, t, d, scheme);
  const double obs = omega_norm(end, mask, d);
  Lemma31Result r;
  r.lhs = inner(end, end, d);
  double observed = 0.0;
  if (obs > 0.0) {
    const double log_term =
        2.0 * (std::log(c.m1) + c.m2 / t - c.delta * std::log(epsilon)) + 2.0 * std::log(obs);
    observed = log_term > 700.0 ? std::numeric_limits<double>::infinity() : std::exp(log_term);
  }
  r.rhs = observed + epsilon * epsilon * inner(theta0, theta0, d);
  r.slack = r.rhs - r.lhs;
  return r;
}

}  // namespace ihum

#endif  // IHUM_CONVEXITY_HPP
