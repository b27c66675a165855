#ifndef IHUM_HUM_HPP
#define IHUM_HUM_HPP

// Penalized HUM for the impulse control problem.
//
// With the control operator B(v, c, d) = (1_omega v, 0, 0) and the Gramian
//   Lambda = e^{(T - tau)A} B e^{(T - tau)A}
// the minimizer of
//   J(theta) = alpha/2 ||v(T - tau)||^2_omega + beta/2 ||theta||^2 + <Psi0, theta(T)>
// solves (alpha Lambda + beta I) theta = -e^{TA} Psi0, and the control
//   h = alpha B e^{(T - tau)A} theta
// drives the impulsive system to Psi(T) = -beta theta.
// alpha = 1, beta = eps gives the HUM functional used by the CG iteration;
// alpha = kappa^2, beta = eps^2 gives the functional behind the cost bound.

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ihum/cg.hpp"
#include "ihum/grid.hpp"
#include "ihum/propagator.hpp"

namespace ihum {

struct HumConfig {
  double epsilon = 1e-2;
  double tol = 1e-3;
  std::size_t max_iter = 0;  // 0 selects 10 * nx
  double tau = 0.01;
  double t_final = 0.02;
  std::optional<double> kappa;

  void validate() const {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
      throw std::invalid_argument("hum: epsilon must be positive");
    if (!(tol > 0.0 && tol < 1.0)) throw std::invalid_argument("hum: tol must lie in (0, 1)");
    if (!(tau > 0.0 && tau < t_final))
      throw std::invalid_argument("hum: tau must lie in (0, t_final)");
    if (kappa && !(*kappa > 0.0)) throw std::invalid_argument("hum: kappa must be positive");
  }

  std::size_t iteration_cap(std::size_t nx) const { return max_iter > 0 ? max_iter : 10 * nx; }
  double kappa_or_default() const { return kappa.value_or(1.0 / epsilon); }
};

/// Everything the HUM operators need besides the penalty parameters.
struct ControlProblem {
  Discretization disc;
  SubdomainMask mask;
  TimeScheme scheme;

  ControlProblem(const Grid& grid, double omega_lo, double omega_hi, TimeScheme time_scheme)
      : disc(grid), mask(grid, omega_lo, omega_hi), scheme(time_scheme) {
    scheme.validate();
  }

  double t_final() const { return scheme.t_final; }
  std::size_t size() const { return disc.size(); }
};

struct HumSolution {
  State minimizer;
  State control;
  State final_state;
  State final_gradient;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> residual_history;
  std::vector<double> functional_history;
  double control_norm = 0.0;
  double final_norm = 0.0;
  double initial_norm = 0.0;
  double epsilon = 0.0;
  double tol = 0.0;
  std::optional<double> kappa;
  /// ||Psi(T) + penalty * theta||, the Euler-Lagrange terminal identity defect.
  double terminal_defect = 0.0;
};

namespace detail {

inline void check_consistent(const HumConfig& cfg, const ControlProblem& p, bool strict_tau) {
  if (std::abs(cfg.t_final - p.t_final()) > 1e-12 * p.t_final())
    throw std::invalid_argument("hum: config t_final differs from the time scheme");
  if (strict_tau) {
    cfg.validate();
  } else if (!(cfg.tau > 0.0 && cfg.tau <= cfg.t_final)) {
    throw std::invalid_argument("hum: tau must lie in (0, t_final]");
  }
  if (cfg.tau < cfg.t_final && !p.scheme.on_grid(cfg.tau))
    throw std::invalid_argument("hum: tau is not on the time grid");
}

}  // namespace detail

/// B(v, c, d) = (1_omega v, 0, 0).
inline State control_op(const State& v, const SubdomainMask& mask) {
  if (v.size() != mask.size()) throw std::invalid_argument("control_op: length mismatch");
  State out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = mask[i] * v[i];
  return out;
}

/// Lambda rho = e^{(T - tau)A} B e^{(T - tau)A} rho. tau == T gives B.
inline State gramian_apply(const State& rho, const HumConfig& cfg, const ControlProblem& p) {
  detail::check_consistent(cfg, p, false);
  const double lag = cfg.t_final - cfg.tau;
  return evolve(control_op(evolve(rho, lag, p.disc, p.scheme), p.mask), lag, p.disc, p.scheme);
}

/// J_eps(theta) = 1/2 ||v(T - tau)||^2_omega + eps/2 ||theta||^2 + <Psi0, theta(T)>.
inline double functional_j_eps(const State& theta0, const State& psi0, const HumConfig& cfg,
                               const ControlProblem& p) {
  detail::check_consistent(cfg, p, true);
  const State at_lag = evolve(theta0, cfg.t_final - cfg.tau, p.disc, p.scheme);
  const State at_end = evolve(at_lag, cfg.tau, p.disc, p.scheme);
  const double obs = omega_norm(at_lag, p.mask, p.disc);
  return 0.5 * obs * obs + 0.5 * cfg.epsilon * inner(theta0, theta0, p.disc) +
         inner(psi0, at_end, p.disc);
}

/// Gradient of J_eps in the weighted product: (Lambda + eps I) theta + e^{TA} Psi0.
inline State gradient_j_eps(const State& theta0, const State& psi0, const HumConfig& cfg,
                            const ControlProblem& p) {
  detail::check_consistent(cfg, p, true);
  State g = gramian_apply(theta0, cfg, p);
  g.axpy(cfg.epsilon, theta0);
  g.axpy(1.0, evolve(psi0, cfg.t_final, p.disc, p.scheme));
  return g;
}

namespace detail {

inline HumSolution solve_penalized(const State& psi0, const HumConfig& cfg,
                                   const ControlProblem& p, double alpha, double beta,
                                   const State* initial_guess) {
  check_consistent(cfg, p, true);
  p.disc.check(psi0);
  check_finite(psi0, "hum");
  const State rhs = evolve(psi0, cfg.t_final, p.disc, p.scheme);
  auto apply = [&](const State& v) {
    State out = gramian_apply(v, cfg, p);
    out *= alpha;
    out.axpy(beta, v);
    return out;
  };
  auto dot = [&](const State& u, const State& v) { return inner(u, v, p.disc); };
  State f0 = initial_guess ? *initial_guess : State(p.size());
  auto cg = conjugate_gradient(apply, rhs, std::move(f0), cfg.tol,
                               cfg.iteration_cap(p.disc.grid().nx()), dot);

  HumSolution sol;
  sol.minimizer = std::move(cg.solution);
  sol.final_gradient = std::move(cg.gradient);
  sol.iterations = cg.iterations;
  sol.converged = cg.converged;
  sol.residual_history = std::move(cg.residual_history);
  sol.functional_history = std::move(cg.functional_history);
  sol.epsilon = cfg.epsilon;
  sol.tol = cfg.tol;

  sol.control = control_op(evolve(sol.minimizer, cfg.t_final - cfg.tau, p.disc, p.scheme), p.mask);
  sol.control *= alpha;
  const Trajectory traj = solve_impulsive(psi0, sol.control, cfg.tau, p.disc, p.mask, p.scheme,
                                          p.scheme.n_steps);
  sol.final_state = traj.final_state();
  sol.control_norm = omega_norm(sol.control, p.mask, p.disc);
  sol.final_norm = norm(sol.final_state, p.disc);
  sol.initial_norm = norm(psi0, p.disc);
  State defect = sol.final_state;
  defect.axpy(beta, sol.minimizer);
  sol.terminal_defect = norm(defect, p.disc);
  return sol;
}

}  // namespace detail

/// CG iteration for (Lambda + eps I) theta = -e^{TA} Psi0 started from f0 = 0
/// (or the given initial guess). Non-convergence within the iteration cap is
/// reported through `converged`, not thrown.
inline HumSolution cg_solve(const State& psi0, const HumConfig& cfg, const ControlProblem& p,
                            const State* initial_guess = nullptr) {
  return detail::solve_penalized(psi0, cfg, p, 1.0, cfg.epsilon, initial_guess);
}

/// Minimizes J_{eps,kappa}: (kappa^2 Lambda + eps^2 I) theta = -e^{TA} Psi0 and
/// h = kappa^2 B e^{(T - tau)A} theta. kappa defaults to 1/eps.
inline HumSolution solve_penalized_kappa(const State& psi0, const HumConfig& cfg,
                                         const ControlProblem& p) {
  const double kappa = cfg.kappa_or_default();
  if (!(kappa > 0.0)) throw std::invalid_argument("hum: kappa must be positive");
  HumSolution sol =
      detail::solve_penalized(psi0, cfg, p, kappa * kappa, cfg.epsilon * cfg.epsilon, nullptr);
  sol.kappa = kappa;
  return sol;
}

struct DualityTerms {
  double control_term = 0.0;  // int_omega h z(T - tau)
  double initial_term = 0.0;  // <Psi0, zeta(T)>
  double final_term = 0.0;    // <Psi(T), zeta(0)>
  double residual = 0.0;      // |control + initial - final|
  double scale = 0.0;         // |control| + |initial| + |final|
};

/// Evaluates the adjoint identity
///   int_omega h z(T - tau) + <Psi0, zeta(T)> - <Psi(T), zeta0> = 0
/// with Psi the impulsive trajectory and zeta the free evolution of zeta0.
inline DualityTerms duality_residual(const State& psi0, const State& h, const State& zeta0,
                                     const HumConfig& cfg, const ControlProblem& p) {
  detail::check_consistent(cfg, p, true);
  const State z_lag = evolve(zeta0, cfg.t_final - cfg.tau, p.disc, p.scheme);
  const State z_end = evolve(z_lag, cfg.tau, p.disc, p.scheme);
  const Trajectory traj =
      solve_impulsive(psi0, h, cfg.tau, p.disc, p.mask, p.scheme, p.scheme.n_steps);
  DualityTerms t;
  t.control_term = omega_inner(h, z_lag, p.mask, p.disc);
  t.initial_term = inner(psi0, z_end, p.disc);
  t.final_term = inner(traj.final_state(), zeta0, p.disc);
  t.residual = std::abs(t.control_term + t.initial_term - t.final_term);
  t.scale = std::abs(t.control_term) + std::abs(t.initial_term) + std::abs(t.final_term);
  return t;
}

struct CostBoundReport {
  double control_term = 0.0;  // ||h||^2_omega / kappa^2
  double final_term = 0.0;    // ||Psi(T)||^2 / eps^2
  double sum = 0.0;
  double initial_norm_sq = 0.0;
  double slack = 0.0;  // initial_norm_sq - sum
  bool holds = false;  // slack >= -10 tol ||Psi0||^2
};

/// (1/kappa^2) ||h||^2_omega + (1/eps^2) ||Psi(T)||^2 <= ||Psi0||^2.
inline CostBoundReport cost_bound_check(const HumSolution& sol, const HumConfig& cfg) {
  if (!sol.kappa) throw std::invalid_argument("cost bound needs a solution from solve_penalized_kappa");
  const double kappa = *sol.kappa;
  CostBoundReport r;
  r.control_term = sol.control_norm * sol.control_norm / (kappa * kappa);
  r.final_term = sol.final_norm * sol.final_norm / (cfg.epsilon * cfg.epsilon);
  r.sum = r.control_term + r.final_term;
  r.initial_norm_sq = sol.initial_norm * sol.initial_norm;
  r.slack = r.initial_norm_sq - r.sum;
  r.holds = r.slack >= -10.0 * cfg.tol * r.initial_norm_sq;
  return r;
}

/// Two-column CSV (x, value) of a nodal profile.
inline void write_profile_csv(std::ostream& os, const State& values, const Grid& grid) {
  os << "x,value\n";
  char buf[64];
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", grid.node(i), values[i]);
    os << buf;
  }
}

}  // namespace ihum

#endif  // IHUM_HUM_HPP
