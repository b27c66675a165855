#ifndef IHUM_PROPAGATOR_HPP
#define IHUM_PROPAGATOR_HPP

// Time integration of W dU/dt = K U (the discrete semigroup) and the
// impulsive mild solution
//   Psi(t) = e^{tA} Psi0 + 1_{t >= tau} e^{(t - tau)A} (1_omega h, 0, 0).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ihum/grid.hpp"
#include "ihum/tridiagonal.hpp"

namespace ihum {

enum class Method { crank_nicolson, backward_euler };

inline const char* to_string(Method m) {
  return m == Method::crank_nicolson ? "crank_nicolson" : "backward_euler";
}

inline Method parse_method(const std::string& s) {
  if (s == "crank_nicolson" || s == "cn") return Method::crank_nicolson;
  if (s == "backward_euler" || s == "be") return Method::backward_euler;
  throw std::invalid_argument("unknown time method '" + s + "'");
}

/// Implicitness parameter of the theta scheme.
inline double theta_of(Method m) { return m == Method::crank_nicolson ? 0.5 : 1.0; }

struct TimeScheme {
  double t_final = 0.02;
  std::size_t n_steps = 200;
  Method method = Method::crank_nicolson;

  double dt() const { return t_final / static_cast<double>(n_steps); }

  void validate() const {
    if (!(std::isfinite(t_final) && t_final > 0.0))
      throw std::invalid_argument("time scheme: t_final must be positive");
    if (n_steps < 1) throw std::invalid_argument("time scheme: n_steps must be >= 1");
  }

  /// True when tau is an integer multiple of dt (relative slack 1e-9).
  bool on_grid(double tau) const {
    const double m = tau / dt();
    return std::abs(m - std::round(m)) <= 1e-9 * std::max(1.0, m);
  }

  std::size_t step_index(double tau) const {
    return static_cast<std::size_t>(std::llround(tau / dt()));
  }

  /// Smallest step count >= n_steps for which tau falls on the time grid.
  static TimeScheme aligned(double t_final, std::size_t n_steps, double tau,
                            Method method = Method::crank_nicolson) {
    TimeScheme s{t_final, n_steps, method};
    s.validate();
    if (!(tau > 0.0 && tau < t_final))
      throw std::invalid_argument("impulse time must lie in (0, t_final)");
    const std::size_t limit = n_steps * 1000;
    for (std::size_t n = n_steps; n <= limit; ++n) {
      s.n_steps = n;
      if (s.on_grid(tau)) return s;
    }
    throw std::invalid_argument("cannot align impulse time with the time grid");
  }
};

/// Number of steps and the step size actually used to reach time t.
struct StepPlan {
  std::size_t steps = 0;
  double dt = 0.0;
};

/// Rounds the step count up so that steps * dt == t exactly in real arithmetic.
inline StepPlan plan_steps(double t, const TimeScheme& scheme) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("evolve: need finite t >= 0");
  if (t == 0.0) return {0, scheme.dt()};
  const double ratio = t / scheme.dt();
  auto n = static_cast<std::size_t>(std::ceil(ratio - 1e-9 * std::max(1.0, ratio)));
  if (n == 0) n = 1;
  return {n, t / static_cast<double>(n)};
}

/// One theta-scheme step (W - theta dt K) U^{n+1} = (W + (1 - theta) dt K) U^n.
class Stepper {
 public:
  Stepper(const Discretization& d, double dt, Method method) : d_(&d), dt_(dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("stepper: dt must be positive");
    const double theta = theta_of(method);
    explicit_ = (1.0 - theta) * dt;
    const std::size_t n = d.size();
    std::vector<double> diag(n), off(n - 1);
    for (std::size_t i = 0; i < n; ++i) diag[i] = d.weight(i) - theta * dt * d.k_diagonal()[i];
    for (std::size_t i = 0; i + 1 < n; ++i) off[i] = -theta * dt * d.k_off_diagonal()[i];
    solver_ = TridiagonalSolver(off, diag, off);
    scratch_.resize(n);
  }

  double dt() const { return dt_; }

  void step(State& u) {
    const auto kd = d_->k_diagonal();
    const auto ko = d_->k_off_diagonal();
    const std::size_t n = u.size();
    for (std::size_t i = 0; i < n; ++i) {
      double ku = kd[i] * u[i];
      if (i > 0) ku += ko[i - 1] * u[i - 1];
      if (i + 1 < n) ku += ko[i] * u[i + 1];
      scratch_[i] = d_->weight(i) * u[i] + explicit_ * ku;
    }
    solver_.solve(scratch_);
    for (std::size_t i = 0; i < n; ++i) u[i] = scratch_[i];
  }

  void advance(State& u, std::size_t steps) {
    for (std::size_t k = 0; k < steps; ++k) step(u);
  }

 private:
  const Discretization* d_;
  double dt_;
  double explicit_ = 0.0;
  TridiagonalSolver solver_;
  std::vector<double> scratch_;
};

inline void check_finite(const State& u, const char* what) {
  if (!u.all_finite()) throw std::domain_error(std::string(what) + ": non-finite state");
}

/// Approximates e^{t A_h} u0 with the scheme's step size (rounded per plan_steps).
inline State evolve(const State& u0, double t, const Discretization& d, const TimeScheme& scheme) {
  d.check(u0);
  check_finite(u0, "evolve");
  const StepPlan plan = plan_steps(t, scheme);
  State u = u0;
  if (plan.steps == 0) return u;
  Stepper stepper(d, plan.dt, scheme.method);
  stepper.advance(u, plan.steps);
  return u;
}

/// Stored snapshots of a (possibly impulsive) run.
///
/// states[k] is the value at times[k]; at the impulse the stored value is the
/// post-jump state and the left limit is kept separately.
struct Trajectory {
  std::vector<double> times;
  std::vector<State> states;
  std::optional<std::size_t> impulse_index;
  std::optional<State> left_limit;

  const State& final_state() const { return states.back(); }
  std::size_t size() const { return times.size(); }
};

/// Uncontrolled run with a snapshot every `stride` steps (final state always kept).
inline Trajectory solve_uncontrolled(const State& u0, const Discretization& d,
                                     const TimeScheme& scheme, std::size_t stride = 1) {
  scheme.validate();
  d.check(u0);
  check_finite(u0, "solve_uncontrolled");
  if (stride == 0) throw std::invalid_argument("snapshot stride must be >= 1");
  Trajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(u0);
  Stepper stepper(d, scheme.dt(), scheme.method);
  State u = u0;
  for (std::size_t n = 1; n <= scheme.n_steps; ++n) {
    stepper.step(u);
    if (n % stride == 0 || n == scheme.n_steps) {
      traj.times.push_back(static_cast<double>(n) * scheme.dt());
      traj.states.push_back(u);
    }
  }
  return traj;
}

/// Impulsive mild solution on [0, t_final] with jump (mask * h, 0, 0) at tau.
inline Trajectory solve_impulsive(const State& psi0, const State& h, double tau,
                                  const Discretization& d, const SubdomainMask& mask,
                                  const TimeScheme& scheme, std::size_t stride = 1) {
  scheme.validate();
  d.check(psi0);
  d.check(h);
  check_finite(psi0, "solve_impulsive");
  check_finite(h, "solve_impulsive");
  if (stride == 0) throw std::invalid_argument("snapshot stride must be >= 1");
  if (!(tau > 0.0 && tau < scheme.t_final))
    throw std::invalid_argument("impulse time must lie in (0, t_final)");
  if (!scheme.on_grid(tau)) throw std::invalid_argument("impulse time is not on the time grid");
  const std::size_t jump_step = scheme.step_index(tau);

  Trajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(psi0);
  Stepper stepper(d, scheme.dt(), scheme.method);
  State u = psi0;
  for (std::size_t n = 1; n <= scheme.n_steps; ++n) {
    stepper.step(u);
    const double t = static_cast<double>(n) * scheme.dt();
    if (n == jump_step) {
      traj.left_limit = u;
      for (std::size_t i = 0; i < u.size(); ++i) u[i] += mask[i] * h[i];
      traj.impulse_index = traj.times.size();
      traj.times.push_back(t);
      traj.states.push_back(u);
    } else if (n % stride == 0 || n == scheme.n_steps) {
      traj.times.push_back(t);
      traj.states.push_back(u);
    }
  }
  return traj;
}

/// CSV with columns t, x_0..x_nx; at the impulse the left limit row precedes
/// the post-jump row at the same t.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  if (traj.states.empty()) return;
  const std::size_t n = traj.states.front().size();
  os << 't';
  for (std::size_t i = 0; i < n; ++i) os << ",x_" << i;
  os << '\n';
  char buf[32];
  auto row = [&](double t, const State& s) {
    std::snprintf(buf, sizeof buf, "%.17g", t);
    os << buf;
    for (double v : s) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      os << ',' << buf;
    }
    os << '\n';
  };
  for (std::size_t k = 0; k < traj.size(); ++k) {
    if (traj.impulse_index && *traj.impulse_index == k && traj.left_limit)
      row(traj.times[k], *traj.left_limit);
    row(traj.times[k], traj.states[k]);
  }
}

}  // namespace ihum

#endif  // IHUM_PROPAGATOR_HPP
