#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "ihum/hum.hpp"
#include "ihum/random.hpp"
#include "oracles.hpp"

using namespace ihum;

namespace {

State sine_profile(const Discretization& d) {
  State u = d.sample([](double x) { return std::numbers::sqrt2 * std::sin(std::numbers::pi * x); });
  u[0] = 0.0;
  u[d.size() - 1] = 0.0;
  return u;
}

ControlProblem default_problem(std::size_t nx = 25, std::size_t n_steps = 200) {
  return ControlProblem(Grid(0.0, 1.0, nx), 0.2, 0.8, TimeScheme{0.02, n_steps});
}

double rel_diff(const State& u, const oracle::Vec& ref) {
  return (oracle::to_vec(u) - ref).norm() / ref.norm();
}

// Tiny vector type to exercise the CG template with a Euclidean product.
struct Vec2 {
  double x = 0, y = 0;
  Vec2& axpy(double a, const Vec2& o) {
    x += a * o.x;
    y += a * o.y;
    return *this;
  }
  Vec2& operator*=(double s) {
    x *= s;
    y *= s;
    return *this;
  }
};

}  // namespace

TEST(HumConfig, Validation) {
  HumConfig c;
  EXPECT_NO_THROW(c.validate());
  c.epsilon = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = HumConfig{};
  c.tau = 0.02;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = HumConfig{};
  c.tol = 1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  EXPECT_EQ(HumConfig{}.iteration_cap(25), 250u);
  EXPECT_DOUBLE_EQ(HumConfig{}.kappa_or_default(), 100.0);
}

TEST(ControlOp, IndicatorIdempotentSelfAdjoint) {
  const auto p = default_problem();
  const State b = control_op(State(p.size(), 1.0), p.mask);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double x = p.disc.grid().node(i);
    const bool inside = i != 0 && i != 25 && x > 0.2 - 1e-9 && x < 0.8 + 1e-9;
    EXPECT_EQ(b[i], inside ? 1.0 : 0.0) << i;
  }
  SplitMix64 rng(1);
  for (int k = 0; k < 10; ++k) {
    const State u = random_state(p.disc, rng), v = random_state(p.disc, rng);
    EXPECT_EQ(control_op(control_op(u, p.mask), p.mask), control_op(u, p.mask));
    EXPECT_NEAR(inner(control_op(u, p.mask), v, p.disc), inner(u, control_op(v, p.mask), p.disc),
                1e-15);
  }
}

TEST(Gramian, ZeroAndDegenerateLag) {
  const auto p = default_problem();
  HumConfig c;
  for (double v : gramian_apply(State(p.size()), c, p)) EXPECT_EQ(v, 0.0);
  c.tau = c.t_final;
  SplitMix64 rng(2);
  const State r = random_state(p.disc, rng);
  EXPECT_EQ(gramian_apply(r, c, p), control_op(r, p.mask));
}

TEST(Gramian, SymmetricPositiveSemidefinite) {
  const auto p = default_problem();
  const HumConfig c;
  SplitMix64 rng(3);
  for (int k = 0; k < 30; ++k) {
    const State x = random_state(p.disc, rng), y = random_state(p.disc, rng);
    const double nx = norm(x, p.disc), ny = norm(y, p.disc);
    EXPECT_LE(std::abs(inner(gramian_apply(x, c, p), y, p.disc) -
                       inner(x, gramian_apply(y, c, p), p.disc)),
              1e-10 * nx * ny);
    EXPECT_GE(inner(gramian_apply(x, c, p), x, p.disc), -1e-12 * nx * nx);
  }
}

TEST(Gramian, DenseAssemblyMatchesExponentialOracle) {
  const auto p = default_problem(4, 100000);
  const HumConfig c;
  const oracle::Mat ref = oracle::gramian(p.disc.grid(), 0.01, 0.2, 0.8);
  for (std::size_t j = 0; j < p.size(); ++j) {
    State e(p.size());
    e[j] = 1.0;
    const State col = gramian_apply(e, c, p);
    for (std::size_t i = 0; i < p.size(); ++i)
      EXPECT_NEAR(col[i], ref(i, j), 1e-8 * ref.norm()) << i << "," << j;
  }
}

TEST(Functional, ZeroAndNonNegative) {
  const auto p = default_problem();
  const HumConfig c;
  SplitMix64 rng(4);
  const State psi0 = random_state(p.disc, rng);
  EXPECT_EQ(functional_j_eps(State(p.size()), psi0, c, p), 0.0);
  for (int k = 0; k < 10; ++k)
    EXPECT_GE(functional_j_eps(random_state(p.disc, rng), State(p.size()), c, p), 0.0);
}

TEST(Functional, GradientMatchesFiniteDifferences) {
  const auto p = default_problem();
  const HumConfig c;
  SplitMix64 rng(5);
  const State psi0 = smooth_random_state(p.disc, rng);
  for (int k = 0; k < 10; ++k) {
    const State theta = random_state(p.disc, rng);
    const State dir = random_state(p.disc, rng);
    const double h = 1e-4;
    State plus = theta, minus = theta;
    plus.axpy(h, dir);
    minus.axpy(-h, dir);
    const double fd =
        (functional_j_eps(plus, psi0, c, p) - functional_j_eps(minus, psi0, c, p)) / (2 * h);
    const double an = inner(gradient_j_eps(theta, psi0, c, p), dir, p.disc);
    EXPECT_NEAR(fd, an, 1e-5 * std::abs(an));
  }
}

TEST(ConjugateGradient, NonPositiveCurvatureIsAFault) {
  auto apply = [](const Vec2& v) { return Vec2{v.x, -v.y}; };
  auto dot = [](const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; };
  EXPECT_THROW(conjugate_gradient(apply, Vec2{0.0, 1.0}, Vec2{}, 1e-8, 10, dot), NumericalFault);
}

TEST(ConjugateGradient, SolvesSpdSystem) {
  auto apply = [](const Vec2& v) { return Vec2{4 * v.x + v.y, v.x + 3 * v.y}; };
  auto dot = [](const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; };
  const auto r = conjugate_gradient(apply, Vec2{-1.0, -2.0}, Vec2{}, 1e-12, 10, dot);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.iterations, 2u);
  EXPECT_NEAR(r.solution.x, 1.0 / 11.0, 1e-12);
  EXPECT_NEAR(r.solution.y, 7.0 / 11.0, 1e-12);
}

TEST(CgSolve, ZeroDataGivesZeroControl) {
  const auto p = default_problem();
  const HumSolution s = cg_solve(State(p.size()), HumConfig{}, p);
  EXPECT_EQ(s.iterations, 0u);
  EXPECT_TRUE(s.converged);
  EXPECT_EQ(s.control_norm, 0.0);
  EXPECT_EQ(s.final_norm, 0.0);
}

TEST(CgSolve, MatchesDenseSolveAtNx4) {
  const auto p = default_problem(4, 10000);
  SplitMix64 rng(6);
  const State psi0 = random_state(p.disc, rng);
  for (double eps : {1e-2, 1e-3}) {
    HumConfig c;
    c.epsilon = eps;
    c.tol = 1e-12;
    const HumSolution s = cg_solve(psi0, c, p);
    const oracle::Vec ref = oracle::penalized_minimizer(p.disc.grid(), oracle::to_vec(psi0), 0.02,
                                                        0.01, 0.2, 0.8, 1.0, eps);
    EXPECT_LT(rel_diff(s.minimizer, ref), 1e-6) << eps;
  }
}

TEST(CgSolve, DescentAndResidualHistory) {
  const auto p = default_problem();
  const State psi0 = sine_profile(p.disc);
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    HumConfig c;
    c.epsilon = eps;
    const HumSolution s = cg_solve(psi0, c, p);
    ASSERT_TRUE(s.converged);
    ASSERT_EQ(s.functional_history.size(), s.iterations + 1);
    const double scale = std::abs(s.functional_history.back());
    for (std::size_t k = 1; k < s.functional_history.size(); ++k)
      EXPECT_LE(s.functional_history[k], s.functional_history[k - 1] + 1e-12 * scale);
    for (std::size_t k = 0; k + 1 < s.residual_history.size(); ++k)
      EXPECT_GT(s.residual_history[k], 0.0);
    EXPECT_LE(s.residual_history.back(), c.tol * s.residual_history.front());
  }
}

TEST(CgSolve, ControlSupportedInOmega) {
  const auto p = default_problem();
  const HumSolution s = cg_solve(sine_profile(p.disc), HumConfig{}, p);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p.mask[i] == 0.0) {
      EXPECT_EQ(s.control[i], 0.0) << i;
    }
  }
}

TEST(CgSolve, EulerLagrangeResidual) {
  const auto p = default_problem();
  const HumConfig c;
  const State psi0 = sine_profile(p.disc);
  const HumSolution s = cg_solve(psi0, c, p);
  SplitMix64 rng(7);
  for (int k = 0; k < 10; ++k) {
    const State z = random_state(p.disc, rng);
    EXPECT_LE(std::abs(inner(s.final_gradient, z, p.disc)),
              c.tol * s.residual_history.front() * norm(z, p.disc));
  }
}

TEST(CgSolve, IterationCapIsFlagged) {
  const auto p = default_problem();
  HumConfig c;
  c.epsilon = 1e-4;
  c.max_iter = 1;
  const HumSolution s = cg_solve(sine_profile(p.disc), c, p);
  EXPECT_FALSE(s.converged);
  EXPECT_EQ(s.iterations, 1u);
}

TEST(CgSolve, WarmStartBeginsAtTheMinimizer) {
  const auto p = default_problem();
  HumConfig c;
  c.tol = 1e-10;
  const State psi0 = sine_profile(p.disc);
  const HumSolution s = cg_solve(psi0, c, p);
  c.tol = 1e-3;
  const HumSolution w = cg_solve(psi0, c, p, &s.minimizer);
  EXPECT_TRUE(w.converged);
  EXPECT_LE(w.residual_history.front(), 1e-9 * s.residual_history.front());
}

TEST(CgSolve, MonotoneTrendsAcrossEpsilon) {
  const auto p = default_problem();
  const State psi0 = sine_profile(p.disc);
  double prev_final = INFINITY, prev_control = 0.0;
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    HumConfig c;
    c.epsilon = eps;
    const HumSolution s = cg_solve(psi0, c, p);
    EXPECT_LT(s.final_norm, prev_final);
    EXPECT_GT(s.control_norm, prev_control);
    prev_final = s.final_norm;
    prev_control = s.control_norm;
  }
}

TEST(KappaVariant, ZeroData) {
  const auto p = default_problem();
  const HumSolution s = solve_penalized_kappa(State(p.size()), HumConfig{}, p);
  EXPECT_EQ(s.control_norm, 0.0);
  EXPECT_EQ(s.final_norm, 0.0);
  const CostBoundReport r = cost_bound_check(s, HumConfig{});
  EXPECT_EQ(r.sum, 0.0);
  EXPECT_TRUE(r.holds);
}

TEST(KappaVariant, MatchesDenseSolveAtNx4) {
  const auto p = default_problem(4, 10000);
  SplitMix64 rng(8);
  const State psi0 = random_state(p.disc, rng);
  HumConfig c;
  c.kappa = 10.0;
  c.tol = 1e-12;
  const HumSolution s = solve_penalized_kappa(psi0, c, p);
  const oracle::Vec ref = oracle::penalized_minimizer(p.disc.grid(), oracle::to_vec(psi0), 0.02,
                                                      0.01, 0.2, 0.8, 100.0, 1e-4);
  EXPECT_LT(rel_diff(s.minimizer, ref), 1e-6);
}

TEST(KappaVariant, TerminalIdentity) {
  const auto p = default_problem();
  const State psi0 = sine_profile(p.disc);
  for (double eps : {1e-2, 1e-3}) {
    HumConfig c;
    c.epsilon = eps;
    const HumSolution s = solve_penalized_kappa(psi0, c, p);
    EXPECT_LE(s.terminal_defect, 10 * c.tol * norm(psi0, p.disc));
  }
}

TEST(KappaVariant, ScalingIsQuadratic) {
  const auto p = default_problem();
  HumConfig c;
  c.tol = 1e-10;
  const State psi0 = sine_profile(p.disc);
  State twice = psi0;
  twice *= 2.0;
  const HumSolution a = solve_penalized_kappa(psi0, c, p);
  const HumSolution b = solve_penalized_kappa(twice, c, p);
  EXPECT_NEAR(b.control_norm, 2 * a.control_norm, 1e-8 * a.control_norm);
  EXPECT_NEAR(b.final_norm, 2 * a.final_norm, 1e-8 * a.final_norm);
  const CostBoundReport ra = cost_bound_check(a, c), rb = cost_bound_check(b, c);
  EXPECT_NEAR(rb.slack, 4 * ra.slack, 1e-6 * std::abs(ra.slack));
}

TEST(CostBound, RequiresKappaSolution) {
  const auto p = default_problem();
  const HumSolution s = cg_solve(sine_profile(p.disc), HumConfig{}, p);
  EXPECT_THROW(cost_bound_check(s, HumConfig{}), std::invalid_argument);
}

TEST(Duality, TrivialCases) {
  const auto p = default_problem();
  const HumConfig c;
  SplitMix64 rng(9);
  const State psi0 = random_state(p.disc, rng);
  const State zero(p.size());
  EXPECT_EQ(duality_residual(psi0, zero, zero, c, p).residual, 0.0);
  const DualityTerms t = duality_residual(psi0, zero, random_state(p.disc, rng), c, p);
  EXPECT_LE(t.residual, 1e-10);
}

TEST(Duality, RandomTriples) {
  const auto p = default_problem();
  const HumConfig c;
  SplitMix64 rng(10);
  for (int k = 0; k < 20; ++k) {
    const DualityTerms t = duality_residual(random_state(p.disc, rng), random_state(p.disc, rng),
                                            random_state(p.disc, rng), c, p);
    EXPECT_LE(t.residual, 1e-10 * t.scale);
  }
}

TEST(ProfileCsv, Format) {
  std::ostringstream os;
  write_profile_csv(os, State{1.0, 0.5, 0.0}, Grid(0.0, 1.0, 2));
  EXPECT_EQ(os.str(), "x,value\n0,1\n0.5,0.5\n1,0\n");
}
