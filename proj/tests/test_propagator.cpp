#include <cmath>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "ihum/propagator.hpp"
#include "ihum/random.hpp"
#include "oracles.hpp"

using namespace ihum;

namespace {

double rel_err(const State& u, const oracle::Vec& ref) {
  return (oracle::to_vec(u) - ref).norm() / ref.norm();
}

}  // namespace

TEST(TimeScheme, MethodNames) {
  EXPECT_EQ(parse_method("cn"), Method::crank_nicolson);
  EXPECT_EQ(parse_method("backward_euler"), Method::backward_euler);
  EXPECT_THROW(parse_method("rk4"), std::invalid_argument);
  EXPECT_STREQ(to_string(Method::backward_euler), "backward_euler");
}

TEST(TimeScheme, GridAlignment) {
  const TimeScheme s{0.02, 200, Method::crank_nicolson};
  EXPECT_DOUBLE_EQ(s.dt(), 1e-4);
  EXPECT_TRUE(s.on_grid(0.01));
  EXPECT_EQ(s.step_index(0.01), 100u);
  EXPECT_FALSE(s.on_grid(0.01005));
  const TimeScheme a = TimeScheme::aligned(0.02, 7, 0.01);
  EXPECT_TRUE(a.on_grid(0.01));
  EXPECT_EQ(a.n_steps, 8u);
}

TEST(TimeScheme, PlanRoundsUp) {
  const TimeScheme s{0.02, 200, Method::crank_nicolson};
  const StepPlan p = plan_steps(0.01005, s);
  EXPECT_EQ(p.steps, 101u);
  EXPECT_NEAR(p.dt * 101, 0.01005, 1e-15);
  EXPECT_EQ(plan_steps(0.01, s).steps, 100u);
  EXPECT_THROW(plan_steps(-1.0, s), std::invalid_argument);
}

TEST(Evolve, ConstantsAndZeroAreSteady) {
  const Discretization d(Grid(0.0, 1.0, 25));
  for (Method m : {Method::crank_nicolson, Method::backward_euler}) {
    const TimeScheme s{0.02, 200, m};
    const State c = evolve(State(d.size(), 3.5), 0.02, d, s);
    for (double v : c) EXPECT_NEAR(v, 3.5, 1e-13);
    for (double v : evolve(State(d.size()), 0.02, d, s)) EXPECT_EQ(v, 0.0);
  }
}

TEST(Evolve, RejectsNonFinite) {
  const Discretization d(Grid(0.0, 1.0, 5));
  State u(d.size());
  u[2] = NAN;
  EXPECT_THROW(evolve(u, 0.01, d, TimeScheme{}), std::domain_error);
}

TEST(Evolve, MatchesExponentialAtNx4) {
  const Grid g(0.0, 1.0, 4);
  const Discretization d(g);
  SplitMix64 rng(5);
  const State u0 = random_state(d, rng);
  const oracle::Vec ref = oracle::exponential(g, 0.02) * oracle::to_vec(u0);
  const State u = evolve(u0, 0.02, d, TimeScheme{0.02, 10000, Method::crank_nicolson});
  EXPECT_LT(rel_err(u, ref), 1e-4);
}

TEST(Evolve, ConvergenceOrders) {
  const Grid g(0.0, 1.0, 4);
  const Discretization d(g);
  SplitMix64 rng(9);
  const State u0 = random_state(d, rng);
  const oracle::Vec ref = oracle::exponential(g, 0.02) * oracle::to_vec(u0);
  for (auto [m, order] : {std::pair{Method::crank_nicolson, 2.0}, {Method::backward_euler, 1.0}}) {
    const double e1 = rel_err(evolve(u0, 0.02, d, TimeScheme{0.02, 200, m}), ref);
    const double e2 = rel_err(evolve(u0, 0.02, d, TimeScheme{0.02, 400, m}), ref);
    EXPECT_NEAR(std::log2(e1 / e2), order, 0.15) << to_string(m);
  }
}

TEST(Evolve, SemigroupProperty) {
  const Discretization d(Grid(0.0, 1.0, 25));
  SplitMix64 rng(13);
  const State u0 = random_state(d, rng);
  const TimeScheme s{0.02, 200, Method::crank_nicolson};
  const State once = evolve(u0, 0.015, d, s);
  const State twice = evolve(evolve(u0, 0.005, d, s), 0.01, d, s);
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_NEAR(once[i], twice[i], 1e-13);
}

TEST(Evolve, SelfAdjointPropagator) {
  const Discretization d(Grid(0.0, 1.0, 25));
  SplitMix64 rng(17);
  const TimeScheme s{};
  for (int k = 0; k < 20; ++k) {
    const State u = random_state(d, rng), v = random_state(d, rng);
    EXPECT_NEAR(inner(evolve(u, 0.02, d, s), v, d), inner(u, evolve(v, 0.02, d, s), d), 1e-12);
  }
}

TEST(Trajectory, ContractionOnEveryStep) {
  const Discretization d(Grid(0.0, 1.0, 25));
  SplitMix64 rng(19);
  for (Method m : {Method::crank_nicolson, Method::backward_euler}) {
    const Trajectory t = solve_uncontrolled(random_state(d, rng), d, TimeScheme{0.02, 200, m});
    ASSERT_EQ(t.size(), 201u);
    for (std::size_t k = 1; k < t.size(); ++k)
      EXPECT_LT(norm(t.states[k], d), norm(t.states[k - 1], d));
  }
}

TEST(Trajectory, StrideKeepsFinalState) {
  const Discretization d(Grid(0.0, 1.0, 10));
  const Trajectory t = solve_uncontrolled(State(d.size(), 1.0), d, TimeScheme{0.02, 200}, 30);
  EXPECT_EQ(t.size(), 1u + 6u + 1u);
  EXPECT_DOUBLE_EQ(t.times.back(), 0.02);
}

TEST(Impulsive, ZeroControlIsFreeEvolution) {
  const Grid g(0.0, 1.0, 25);
  const Discretization d(g);
  const SubdomainMask m(g, 0.2, 0.8);
  SplitMix64 rng(23);
  const State psi0 = random_state(d, rng);
  const TimeScheme s{};
  const Trajectory a = solve_impulsive(psi0, State(d.size()), 0.01, d, m, s);
  const Trajectory b = solve_uncontrolled(psi0, d, s);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a.states[k], b.states[k]);
  EXPECT_EQ(*a.left_limit, a.states[*a.impulse_index]);
}

TEST(Impulsive, Superposition) {
  const Grid g(0.0, 1.0, 25);
  const Discretization d(g);
  const SubdomainMask m(g, 0.2, 0.8);
  SplitMix64 rng(29);
  const TimeScheme s{};
  for (int k = 0; k < 10; ++k) {
    const State psi0 = random_state(d, rng), h = random_state(d, rng);
    State masked(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) masked[i] = m[i] * h[i];
    State expect = evolve(psi0, 0.02, d, s);
    expect += evolve(masked, 0.01, d, s);
    const State got = solve_impulsive(psi0, h, 0.01, d, m, s).final_state();
    double diff = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) diff = std::max(diff, std::abs(got[i] - expect[i]));
    EXPECT_LE(diff, 1e-12 * norm(expect, d));
  }
}

TEST(Impulsive, JumpLeavesTracesAlone) {
  const Grid g(0.0, 1.0, 25);
  const Discretization d(g);
  const SubdomainMask m(g, 0.2, 0.8);
  const Trajectory t = solve_impulsive(State(d.size()), State(d.size(), 1.0), 0.01, d, m, TimeScheme{});
  const State& jump = t.states[*t.impulse_index];
  EXPECT_EQ(jump[0], 0.0);
  EXPECT_EQ(jump[25], 0.0);
  EXPECT_EQ(jump[10], 1.0);
  EXPECT_EQ(t.times[*t.impulse_index], 0.01);
}

TEST(Impulsive, Guards) {
  const Grid g(0.0, 1.0, 25);
  const Discretization d(g);
  const SubdomainMask m(g, 0.2, 0.8);
  const State z(d.size());
  EXPECT_THROW(solve_impulsive(z, z, 0.0, d, m, TimeScheme{}), std::invalid_argument);
  EXPECT_THROW(solve_impulsive(z, z, 0.02, d, m, TimeScheme{}), std::invalid_argument);
  EXPECT_THROW(solve_impulsive(z, z, 0.01005, d, m, TimeScheme{}), std::invalid_argument);
}

TEST(TrajectoryCsv, LeftLimitRowPrecedesJump) {
  const Grid g(0.0, 1.0, 4);
  const Discretization d(g);
  const SubdomainMask m(g, 0.2, 0.8);
  const Trajectory t =
      solve_impulsive(State(d.size()), State(d.size(), 1.0), 0.01, d, m, TimeScheme{0.02, 2});
  std::ostringstream os;
  write_trajectory_csv(os, t);
  EXPECT_EQ(os.str(),
            "t,x_0,x_1,x_2,x_3,x_4\n"
            "0,0,0,0,0,0\n"
            "0.01,0,0,0,0,0\n"
            "0.01,0,1,1,1,0\n" +
                [&] {
                  std::ostringstream row;
                  char buf[32];
                  row << "0.02";
                  for (double v : t.final_state()) {
                    std::snprintf(buf, sizeof buf, "%.17g", v);
                    row << ',' << buf;
                  }
                  return row.str() + "\n";
                }());
}
