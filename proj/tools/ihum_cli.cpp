// ihum: command line front end for the impulse-control experiments.
//
//   ihum uncontrolled|controlled|table1|convexity|sweep
//        [--config file.json] [--out dir] [--epsilon 1e-2,1e-3] [--nx N]
//        [--nsteps N] [--seed S]
//
// Exit status: 0 success, 2 configuration error, 3 solver failure.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ihum/experiment.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kSolverError = 3;

struct Overrides {
  std::string config;
  std::optional<std::string> out;
  std::vector<double> epsilons;
  std::optional<std::size_t> nx;
  std::optional<std::size_t> n_steps;
  std::optional<std::uint64_t> seed;
};

ihum::ExperimentConfig resolve(const Overrides& o) {
  ihum::ExperimentConfig c = o.config.empty() ? ihum::ExperimentConfig{} : ihum::load_config(o.config);
  if (o.out) c.output = *o.out;
  if (!o.epsilons.empty()) c.epsilons = o.epsilons;
  if (o.nx) c.nx = *o.nx;
  if (o.n_steps) c.n_steps = *o.n_steps;
  if (o.seed) c.seed = *o.seed;
  c.validate();
  return c;
}

void print_rows(const std::vector<ihum::SummaryRow>& rows, bool header = true) {
  if (header) std::printf("%-10s %6s %14s %14s\n", "epsilon", "iter", "||Psi(T)||", "||h||");
  for (const auto& r : rows) {
    if (!r.error.empty()) {
      std::printf("%-10.1e  failed: %s\n", r.epsilon, r.error.c_str());
      continue;
    }
    std::printf("%-10.1e %6zu %14.4e %14.4e%s\n", r.epsilon, r.iterations, r.final_norm,
                r.control_norm, r.converged ? "" : "  (not converged)");
  }
}

int run(const std::string& command, const Overrides& o) {
  const ihum::ExperimentConfig c = resolve(o);
  if (command == "uncontrolled") {
    const auto r = ihum::run_uncontrolled(c);
    std::printf("||Psi0|| = %.6e  ||Psi(T)|| = %.6e\n", r.initial_norm, r.final_norm);
    return 0;
  }
  if (command == "controlled") {
    bool ok = true;
    for (double eps : c.epsilons) {
      const auto r = ihum::run_controlled(c, eps);
      std::printf("eps %.1e: %zu iterations, ||Psi(T)|| = %.6e (uncontrolled %.6e), ||h|| = %.6e\n",
                  eps, r.solution.iterations, r.solution.final_norm, r.uncontrolled_final_norm,
                  r.solution.control_norm);
      ok = ok && r.solution.converged;
    }
    return ok ? 0 : kSolverError;
  }
  if (command == "table1") {
    const auto s = ihum::run_table1(c);
    print_rows(s.rows);
    std::fprintf(stderr, "wall time %.3f s\n", s.wall_seconds);
    return s.all_ok() ? 0 : kSolverError;
  }
  if (command == "convexity") {
    const auto r = ihum::run_convexity(c);
    std::printf("C = %.6g  C0 = %.6g  M_ell = %.6g  D_ell = %.6g\n", r.constants.c_const,
                r.constants.c0, r.constants.m_ell, r.constants.d_ell);
    std::printf("three-point: %zu/%zu violations, min slack %.6g\n", r.three_point_violations,
                r.three_point.size(), r.min_three_point_slack);
    std::printf("fit: mu = %.6g  K = %.6g  beta = %.2f  satisfied %.1f%%\n", r.fit.mu, r.fit.k,
                r.fit.beta, 100.0 * r.fit.satisfied_fraction);
    return 0;
  }
  // sweep
  const auto cells = ihum::run_sweep(c);
  bool ok = true;
  std::printf("%-6s ", "seed");
  print_rows({}, true);
  for (const auto& cell : cells) {
    std::printf("%-6llu ", static_cast<unsigned long long>(cell.seed));
    print_rows({cell.row}, false);
    ok = ok && cell.row.error.empty();
  }
  return ok ? 0 : kSolverError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Impulse controls for the heat equation with dynamic boundary conditions"};
  app.require_subcommand(1, 1);
  Overrides o;

  for (const char* name : {"uncontrolled", "controlled", "table1", "convexity", "sweep"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", o.config, "JSON configuration file");
    sub->add_option_function<std::string>("--out", [&](const std::string& v) { o.out = v; },
                                          "output directory");
    sub->add_option("--epsilon", o.epsilons, "penalty values")->delimiter(',');
    sub->add_option_function<std::size_t>("--nx", [&](std::size_t v) { o.nx = v; },
                                          "number of space intervals");
    sub->add_option_function<std::size_t>("--nsteps", [&](std::size_t v) { o.n_steps = v; },
                                          "number of time steps");
    sub->add_option_function<std::uint64_t>("--seed", [&](std::uint64_t v) { o.seed = v; },
                                            "random seed");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    return run(app.get_subcommands().front()->get_name(), o);
  } catch (const ihum::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kSolverError;
  }
}
