#ifndef IHUM_EXPERIMENT_HPP
#define IHUM_EXPERIMENT_HPP

// Scenario runner behind the command line tool. A run reads an
// ExperimentConfig (JSON, every field optional), validates it completely and
// writes flat files under <output>/<scenario>/.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <iterator>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "ihum/convexity.hpp"
#include "ihum/grid.hpp"
#include "ihum/hum.hpp"
#include "ihum/io.hpp"
#include "ihum/propagator.hpp"
#include "ihum/random.hpp"

namespace ihum {

/// Invalid configuration; field() is the dotted JSON path of the culprit.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class ProfileKind { sine, gaussian, nodes };

struct ProfileSpec {
  ProfileKind kind = ProfileKind::sine;
  double amplitude = std::numbers::sqrt2;
  double center = 0.5;  // gaussian only
  double width = 0.1;   // gaussian only
  std::string file;     // nodes only
  double c = 0.0;       // trace at a (analytic profiles)
  double d = 0.0;       // trace at b (analytic profiles)
};

struct ExperimentConfig {
  double a = 0.0;
  double b = 1.0;
  std::size_t nx = 25;
  double t_final = 0.02;
  std::size_t n_steps = 200;
  Method method = Method::crank_nicolson;
  double tau = 0.01;
  double omega_lo = 0.2;
  double omega_hi = 0.8;
  ProfileSpec psi0;
  std::vector<double> epsilons{1e-2, 1e-3, 1e-4};
  double tol = 1e-3;
  std::size_t max_iter = 0;
  std::optional<double> kappa;
  double x0 = 0.5;
  double s = 0.9;
  double hbar = 0.004;
  double ell = 2.0;
  std::size_t ensemble = 20;                       // seeds per ensemble
  std::vector<double> fit_times{0.02, 0.05, 0.1};  // horizons for the (mu, K, beta) fit
  std::string output = "out";
  std::size_t stride = 1;
  std::uint64_t seed = 1;

  Grid grid() const { return Grid(a, b, nx); }
  TimeScheme scheme() const { return TimeScheme{t_final, n_steps, method}; }
  WeightParams weight() const { return WeightParams{x0, s, hbar, t_final}; }
  HumConfig hum(double epsilon) const {
    HumConfig h;
    h.epsilon = epsilon;
    h.tol = tol;
    h.max_iter = max_iter;
    h.tau = tau;
    h.t_final = t_final;
    h.kappa = kappa;
    return h;
  }

  /// Throws ConfigError on the first violated invariant.
  void validate() const {
    auto require = [](bool ok, const char* field, const std::string& msg) {
      if (!ok) throw ConfigError(field, msg);
    };
    require(std::isfinite(a) && std::isfinite(b) && a < b, "grid.a", "need finite a < b");
    require(nx >= 3, "grid.nx", "need nx >= 3");
    require(std::isfinite(t_final) && t_final > 0.0, "time.T", "must be positive");
    require(n_steps >= 1, "time.n_steps", "must be >= 1");
    require(tau > 0.0 && tau < t_final, "tau", "must lie in (0, T)");
    require(scheme().on_grid(tau), "tau", "must be a multiple of T / n_steps");
    require(a < omega_lo && omega_lo < omega_hi && omega_hi < b, "omega",
            "need a < lo < hi < b");
    try {
      SubdomainMask m(grid(), omega_lo, omega_hi);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("omega", e.what());
    }
    require(std::isfinite(psi0.amplitude), "psi0.amplitude", "must be finite");
    require(std::isfinite(psi0.c) && std::isfinite(psi0.d), "psi0.c", "traces must be finite");
    if (psi0.kind == ProfileKind::gaussian)
      require(psi0.width > 0.0 && std::isfinite(psi0.center), "psi0.width",
              "gaussian needs width > 0 and a finite center");
    if (psi0.kind == ProfileKind::nodes)
      require(!psi0.file.empty(), "psi0.file", "nodes profile needs a file");
    require(!epsilons.empty(), "hum.epsilons", "list must not be empty");
    for (double e : epsilons)
      require(std::isfinite(e) && e > 0.0, "hum.epsilons", "entries must be positive");
    require(tol > 0.0 && tol < 1.0, "hum.tol", "must lie in (0, 1)");
    if (kappa) require(std::isfinite(*kappa) && *kappa > 0.0, "hum.kappa", "must be positive");
    try {
      weight().validate(grid());
    } catch (const std::invalid_argument& e) {
      throw ConfigError("weight.s", e.what());
    }
    require(ell > 1.0, "weight.ell", "must exceed 1");
    require(2.0 * ell * hbar < t_final, "weight.hbar", "need 2 ell hbar < T");
    require(ensemble >= 1, "convexity.ensemble", "must be >= 1");
    for (double t : fit_times)
      require(std::isfinite(t) && t > 0.0, "convexity.fit_times", "entries must be positive");
    require(stride >= 1, "stride", "must be >= 1");
    require(!output.empty(), "output", "must not be empty");
  }
};

namespace detail {

template <typename T>
T get_field(const nlohmann::json& obj, const char* key, const std::string& path, T fallback) {
  if (!obj.contains(key)) return fallback;
  // the JSON library would silently wrap -1 or truncate 2.5 into an unsigned count
  if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T>)
    if (!obj.at(key).is_number_integer() || obj.at(key).get<long double>() < 0)
      throw ConfigError(path + key, "expected a non-negative integer");
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(path + key, "wrong type");
  }
}

inline void reject_unknown(const nlohmann::json& obj, const std::string& path,
                           std::initializer_list<const char*> known) {
  if (!obj.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ConfigError(path + key, "unknown field");
  }
}

inline const nlohmann::json& section(const nlohmann::json& root, const char* key) {
  static const nlohmann::json empty = nlohmann::json::object();
  return root.contains(key) ? root.at(key) : empty;
}

inline std::string kind_name(ProfileKind k) {
  switch (k) {
    case ProfileKind::sine: return "sine";
    case ProfileKind::gaussian: return "gaussian";
    case ProfileKind::nodes: return "nodes";
  }
  return "sine";
}

}  // namespace detail

/// Reads a config object. Missing fields keep their defaults; unknown fields
/// and type mismatches are errors.
inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  using detail::get_field;
  using detail::section;
  ExperimentConfig c;
  detail::reject_unknown(j, "", {"grid", "time", "tau", "omega", "psi0", "hum", "weight",
                                 "convexity", "output", "stride", "seed"});

  const auto& g = section(j, "grid");
  detail::reject_unknown(g, "grid.", {"a", "b", "nx"});
  c.a = get_field(g, "a", "grid.", c.a);
  c.b = get_field(g, "b", "grid.", c.b);
  c.nx = get_field(g, "nx", "grid.", c.nx);

  const auto& t = section(j, "time");
  detail::reject_unknown(t, "time.", {"T", "n_steps", "method"});
  c.t_final = get_field(t, "T", "time.", c.t_final);
  c.n_steps = get_field(t, "n_steps", "time.", c.n_steps);
  if (t.contains("method")) {
    try {
      c.method = parse_method(get_field<std::string>(t, "method", "time.", ""));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("time.method", e.what());
    }
  }

  c.tau = get_field(j, "tau", "", c.tau);
  if (j.contains("omega")) {
    const auto w = get_field<std::vector<double>>(j, "omega", "", {});
    if (w.size() != 2) throw ConfigError("omega", "expected [lo, hi]");
    c.omega_lo = w[0];
    c.omega_hi = w[1];
  }

  const auto& p = section(j, "psi0");
  detail::reject_unknown(p, "psi0.", {"kind", "amplitude", "center", "width", "file", "c", "d"});
  if (p.contains("kind")) {
    const auto k = get_field<std::string>(p, "kind", "psi0.", "");
    if (k == "sine") c.psi0.kind = ProfileKind::sine;
    else if (k == "gaussian") c.psi0.kind = ProfileKind::gaussian;
    else if (k == "nodes") c.psi0.kind = ProfileKind::nodes;
    else throw ConfigError("psi0.kind", "expected sine, gaussian or nodes, got '" + k + "'");
  }
  c.psi0.amplitude = get_field(p, "amplitude", "psi0.", c.psi0.amplitude);
  c.psi0.center = get_field(p, "center", "psi0.", c.psi0.center);
  c.psi0.width = get_field(p, "width", "psi0.", c.psi0.width);
  c.psi0.file = get_field(p, "file", "psi0.", c.psi0.file);
  c.psi0.c = get_field(p, "c", "psi0.", c.psi0.c);
  c.psi0.d = get_field(p, "d", "psi0.", c.psi0.d);

  const auto& h = section(j, "hum");
  detail::reject_unknown(h, "hum.", {"epsilons", "tol", "max_iter", "kappa"});
  c.epsilons = get_field(h, "epsilons", "hum.", c.epsilons);
  c.tol = get_field(h, "tol", "hum.", c.tol);
  c.max_iter = get_field(h, "max_iter", "hum.", c.max_iter);
  if (h.contains("kappa") && !h.at("kappa").is_null())
    c.kappa = get_field<double>(h, "kappa", "hum.", 0.0);

  const auto& w = section(j, "weight");
  detail::reject_unknown(w, "weight.", {"x0", "s", "hbar", "ell"});
  c.x0 = get_field(w, "x0", "weight.", c.x0);
  c.s = get_field(w, "s", "weight.", c.s);
  c.hbar = get_field(w, "hbar", "weight.", c.hbar);
  c.ell = get_field(w, "ell", "weight.", c.ell);

  const auto& cv = section(j, "convexity");
  detail::reject_unknown(cv, "convexity.", {"ensemble", "fit_times"});
  c.ensemble = get_field(cv, "ensemble", "convexity.", c.ensemble);
  c.fit_times = get_field(cv, "fit_times", "convexity.", c.fit_times);

  c.output = get_field(j, "output", "", c.output);
  c.stride = get_field(j, "stride", "", c.stride);
  c.seed = get_field(j, "seed", "", c.seed);
  return c;
}

inline void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  nlohmann::json psi{{"kind", detail::kind_name(c.psi0.kind)},
                     {"amplitude", c.psi0.amplitude},
                     {"c", c.psi0.c},
                     {"d", c.psi0.d}};
  if (c.psi0.kind == ProfileKind::gaussian) {
    psi["center"] = c.psi0.center;
    psi["width"] = c.psi0.width;
  }
  if (c.psi0.kind == ProfileKind::nodes) psi["file"] = c.psi0.file;
  j = nlohmann::json{
      {"grid", {{"a", c.a}, {"b", c.b}, {"nx", c.nx}}},
      {"time", {{"T", c.t_final}, {"n_steps", c.n_steps}, {"method", to_string(c.method)}}},
      {"tau", c.tau},
      {"omega", {c.omega_lo, c.omega_hi}},
      {"psi0", psi},
      {"hum", {{"epsilons", c.epsilons}, {"tol", c.tol}, {"max_iter", c.max_iter}}},
      {"weight", {{"x0", c.x0}, {"s", c.s}, {"hbar", c.hbar}, {"ell", c.ell}}},
      {"convexity", {{"ensemble", c.ensemble}, {"fit_times", c.fit_times}}},
      {"output", c.output},
      {"stride", c.stride},
      {"seed", c.seed}};
  j["hum"]["kappa"] = c.kappa ? nlohmann::json(*c.kappa) : nlohmann::json(nullptr);
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config", e.what());
  }
  return config_from_json(j);
}

/// Reads nx + 1 numbers separated by whitespace or commas.
inline State read_nodes_file(const std::string& file, std::size_t expected) {
  std::ifstream in(file);
  if (!in) throw ConfigError("psi0.file", "cannot open " + file);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::replace(text.begin(), text.end(), ',', ' ');
  std::istringstream ss(text);
  std::vector<double> v;
  double x;
  while (ss >> x) v.push_back(x);
  if (!ss.eof()) throw ConfigError("psi0.file", "non-numeric entry in " + file);
  if (v.size() != expected)
    throw ConfigError("psi0.file", "expected " + std::to_string(expected) + " values, found " +
                                       std::to_string(v.size()));
  for (double e : v)
    if (!std::isfinite(e)) throw ConfigError("psi0.file", "non-finite value");
  return State(std::move(v));
}

/// Psi0 for the configured profile. Analytic profiles take their traces from (c, d).
inline State initial_state(const ExperimentConfig& c, const Discretization& d) {
  const Grid& g = d.grid();
  if (c.psi0.kind == ProfileKind::nodes) return read_nodes_file(c.psi0.file, g.size());
  State u = d.sample([&](double x) {
    if (c.psi0.kind == ProfileKind::sine)
      return c.psi0.amplitude * std::sin(std::numbers::pi * (x - g.a()) / (g.b() - g.a()));
    const double z = (x - c.psi0.center) / c.psi0.width;
    return c.psi0.amplitude * std::exp(-0.5 * z * z);
  });
  u[0] = c.psi0.c;
  u[g.nx()] = c.psi0.d;
  return u;
}

namespace detail {

inline std::filesystem::path scenario_dir(const ExperimentConfig& c, const std::string& name) {
  std::filesystem::path dir = std::filesystem::path(c.output) / name;
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

template <typename Writer>
void write_file(const std::filesystem::path& path, Writer&& w) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  w(out);
}

/// Scenario-name tag for an epsilon, e.g. 1e-03.
inline std::string eps_tag(double eps) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.0e", eps);
  return buf;
}

inline HumSolution solve(const State& psi0, const ExperimentConfig& c, const ControlProblem& p,
                         double eps) {
  const HumConfig hc = c.hum(eps);
  return c.kappa ? solve_penalized_kappa(psi0, hc, p) : cg_solve(psi0, hc, p);
}

inline ControlProblem problem(const ExperimentConfig& c) {
  return ControlProblem(c.grid(), c.omega_lo, c.omega_hi, c.scheme());
}

}  // namespace detail

struct UncontrolledResult {
  Trajectory trajectory;
  double initial_norm = 0.0;
  double final_norm = 0.0;
};

/// Free evolution of Psi0; writes summary.json and trajectory.csv.
inline UncontrolledResult run_uncontrolled(const ExperimentConfig& c) {
  c.validate();
  const Discretization d(c.grid());
  const State psi0 = initial_state(c, d);
  UncontrolledResult r;
  r.trajectory = solve_uncontrolled(psi0, d, c.scheme(), c.stride);
  r.initial_norm = norm(psi0, d);
  r.final_norm = norm(r.trajectory.final_state(), d);

  const auto dir = detail::scenario_dir(c, "uncontrolled");
  detail::write_file(dir / "trajectory.csv",
                     [&](std::ostream& os) { write_trajectory_csv(os, r.trajectory); });
  detail::write_json(dir / "summary.json", {{"scenario", "uncontrolled"},
                                            {"initial_norm", r.initial_norm},
                                            {"final_norm", r.final_norm},
                                            {"config", c}});
  return r;
}

struct ControlledResult {
  HumSolution solution;
  Trajectory trajectory;
  double uncontrolled_final_norm = 0.0;
};

/// One CG solve at the given epsilon; writes summary.json, trajectory.csv
/// (left limit and post-jump rows at tau), control.csv and report.json.
inline ControlledResult run_controlled(const ExperimentConfig& c, double epsilon) {
  c.validate();
  if (!(epsilon > 0.0)) throw ConfigError("hum.epsilons", "must be positive");
  const ControlProblem p = detail::problem(c);
  const State psi0 = initial_state(c, p.disc);
  ControlledResult r;
  r.solution = detail::solve(psi0, c, p, epsilon);
  r.trajectory = solve_impulsive(psi0, r.solution.control, c.tau, p.disc, p.mask, p.scheme,
                                 c.stride);
  r.uncontrolled_final_norm = norm(evolve(psi0, c.t_final, p.disc, p.scheme), p.disc);

  const std::string name = "controlled_eps" + detail::eps_tag(epsilon);
  const auto dir = detail::scenario_dir(c, name);
  detail::write_file(dir / "trajectory.csv",
                     [&](std::ostream& os) { write_trajectory_csv(os, r.trajectory); });
  detail::write_file(dir / "control.csv", [&](std::ostream& os) {
    write_profile_csv(os, r.solution.control, p.disc.grid());
  });
  nlohmann::json report = r.solution;
  detail::write_json(dir / "report.json", report);
  detail::write_json(dir / "summary.json", {{"scenario", name},
                                            {"epsilon", epsilon},
                                            {"iterations", r.solution.iterations},
                                            {"converged", r.solution.converged},
                                            {"final_norm", r.solution.final_norm},
                                            {"control_norm", r.solution.control_norm},
                                            {"uncontrolled_final_norm", r.uncontrolled_final_norm},
                                            {"config", c}});
  return r;
}

struct SummaryRow {
  double epsilon = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  double final_norm = 0.0;
  double control_norm = 0.0;
  std::string error;  // non-empty when the solve failed
};

inline void to_json(nlohmann::json& j, const SummaryRow& r) {
  j = nlohmann::json{{"epsilon", r.epsilon},
                     {"iterations", r.iterations},
                     {"converged", r.converged},
                     {"final_norm", r.final_norm},
                     {"control_norm", r.control_norm}};
  if (!r.error.empty()) j["error"] = r.error;
}

struct RunSummary {
  std::string scenario;
  std::vector<SummaryRow> rows;  // decreasing epsilon
  double wall_seconds = 0.0;     // reported on the console, not in summary.json
  nlohmann::json config;

  bool all_ok() const {
    return std::all_of(rows.begin(), rows.end(), [](const SummaryRow& r) { return r.error.empty(); });
  }
};

namespace detail {

inline SummaryRow solve_row(const State& psi0, const ExperimentConfig& c, const ControlProblem& p,
                            double eps) {
  SummaryRow row;
  row.epsilon = eps;
  try {
    const HumSolution sol = detail::solve(psi0, c, p, eps);
    row.iterations = sol.iterations;
    row.converged = sol.converged;
    row.final_norm = sol.final_norm;
    row.control_norm = sol.control_norm;
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

}  // namespace detail

/// One CG solve per epsilon, run concurrently; rows come back sorted by
/// decreasing epsilon. A failed solve yields a row carrying the error message.
inline RunSummary run_table1(const ExperimentConfig& c) {
  c.validate();
  const auto start = std::chrono::steady_clock::now();
  const ControlProblem p = detail::problem(c);
  const State psi0 = initial_state(c, p.disc);
  std::vector<double> eps = c.epsilons;
  std::stable_sort(eps.begin(), eps.end(), std::greater<>());

  std::vector<std::future<SummaryRow>> jobs;
  for (double e : eps)
    jobs.push_back(std::async(std::launch::async, [&, e] { return detail::solve_row(psi0, c, p, e); }));
  RunSummary s;
  s.scenario = "table1";
  s.config = c;
  for (auto& j : jobs) s.rows.push_back(j.get());
  s.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const auto dir = detail::scenario_dir(c, "table1");
  detail::write_file(dir / "table1.csv", [&](std::ostream& os) {
    os << "epsilon,iterations,final_norm,control_norm\n";
    char buf[128];
    for (const auto& r : s.rows) {
      std::snprintf(buf, sizeof buf, "%.17g,%zu,%.17g,%.17g\n", r.epsilon, r.iterations,
                    r.final_norm, r.control_norm);
      os << buf;
    }
  });
  detail::write_json(dir / "summary.json",
                     {{"scenario", s.scenario}, {"rows", s.rows}, {"config", s.config}});
  return s;
}

struct ConvexityRun {
  std::vector<FrequencySample> frequency;
  ConvexityConstants constants;
  std::vector<ThreePointResult> three_point;  // one per ensemble member
  std::size_t three_point_violations = 0;
  double min_three_point_slack = 0.0;
  std::vector<ObservabilitySample> samples;
  Lemma11Fit fit;
  Lemma31Constants young;
  std::size_t lemma31_checked = 0;     // (sample, eps) pairs whose fitted bound held
  std::size_t lemma31_violations = 0;  // negative slacks among those
};

/// Ensemble member k: a smooth random state drawn from seed + k.
inline State ensemble_state(const ExperimentConfig& c, const Discretization& d, std::size_t k) {
  SplitMix64 rng(c.seed + k);
  return smooth_random_state(d, rng);
}

/// Frequency along the Psi0 trajectory, constants at the triple
/// (T - 2 ell hbar, T - ell hbar, T), the three-point ensemble, the
/// (mu, K, beta) fit over ensemble x fit_times and the Young-inequality
/// corollary for eps in {1, 0.1, 0.01}.
inline ConvexityRun run_convexity(const ExperimentConfig& c) {
  c.validate();
  const Discretization d(c.grid());
  const TimeScheme scheme = c.scheme();
  const WeightParams wp = c.weight();
  const SubdomainMask mask(c.grid(), c.omega_lo, c.omega_hi);
  const double t1 = c.t_final - 2.0 * c.ell * c.hbar;
  const double t2 = c.t_final - c.ell * c.hbar;
  const double t3 = c.t_final;

  ConvexityRun r;
  const State psi0 = initial_state(c, d);
  r.frequency = frequency(solve_uncontrolled(psi0, d, scheme, c.stride), wp, d);
  r.constants = proof_constants(wp, d.grid(), c.ell, t1, t2, t3);

  std::vector<std::future<ThreePointResult>> tp;
  for (std::size_t k = 0; k < c.ensemble; ++k)
    tp.push_back(std::async(std::launch::async, [&, k] {
      return three_point_check(ensemble_state(c, d, k), wp, t1, t2, t3, d, scheme);
    }));
  r.min_three_point_slack = std::numeric_limits<double>::infinity();
  for (auto& f : tp) {
    r.three_point.push_back(f.get());
    r.three_point_violations += r.three_point.back().passes ? 0 : 1;
    r.min_three_point_slack = std::min(r.min_three_point_slack, r.three_point.back().slack);
  }

  const double dt = scheme.dt();
  for (double horizon : c.fit_times) {
    const TimeScheme hs{horizon, static_cast<std::size_t>(std::max(1.0, std::ceil(horizon / dt - 1e-9))),
                        c.method};
    for (std::size_t k = 0; k < c.ensemble; ++k) {
      const State u0 = ensemble_state(c, d, k);
      const State uT = evolve(u0, horizon, d, hs);
      r.samples.push_back({norm(u0, d), omega_norm(uT, mask, d), norm(uT, d), horizon});
    }
  }
  if (r.samples.size() >= 10) {
    r.fit = fit_lemma11(r.samples);
    r.young = lemma31_constants_from_fit(r.fit);
    for (std::size_t k = 0; k < c.ensemble; ++k) {
      const ObservabilitySample& smp = r.samples[k];  // first horizon
      if (!lemma11_holds(smp, r.fit.mu, r.fit.k, r.fit.beta)) continue;
      const TimeScheme hs{smp.t_final,
                          static_cast<std::size_t>(std::max(1.0, std::ceil(smp.t_final / dt - 1e-9))),
                          c.method};
      for (double eps : {1.0, 0.1, 0.01}) {
        const Lemma31Result l = lemma31_check(ensemble_state(c, d, k), eps, r.young, d, mask, hs);
        ++r.lemma31_checked;
        r.lemma31_violations += l.slack >= -1e-12 * l.lhs ? 0 : 1;
      }
    }
  }

  const auto dir = detail::scenario_dir(c, "convexity");
  detail::write_file(dir / "frequency.csv",
                     [&](std::ostream& os) { write_frequency_csv(os, r.frequency); });
  nlohmann::json freq = nlohmann::json::array();
  for (const auto& f : r.frequency)
    freq.push_back({{"t", f.t}, {"norm_f", f.norm_f}, {"direct", f.direct}, {"oracle", f.oracle}});
  nlohmann::json report{{"weight", wp},
                        {"constants", r.constants},
                        {"times", {t1, t2, t3}},
                        {"three_point", r.three_point},
                        {"fit", r.fit},
                        {"lemma31_constants", r.young},
                        {"frequency", freq}};
  detail::write_json(dir / "report.json", report);
  detail::write_json(dir / "summary.json",
                     {{"scenario", "convexity"},
                      {"C0", r.constants.c0},
                      {"C", r.constants.c_const},
                      {"three_point_min_slack", r.min_three_point_slack},
                      {"three_point_violations", r.three_point_violations},
                      {"fit", r.fit},
                      {"lemma31_checked", r.lemma31_checked},
                      {"lemma31_violations", r.lemma31_violations},
                      {"config", c}});
  return r;
}

struct SweepCell {
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  SummaryRow row;
};

/// Grid of (epsilon, seed) cells: Psi0 is the unit-norm smooth random state of
/// the seed. Cells run concurrently and write to their own directories; the
/// aggregate summary.json is written afterwards.
inline std::vector<SweepCell> run_sweep(const ExperimentConfig& c) {
  c.validate();
  const ControlProblem p = detail::problem(c);
  std::vector<double> eps = c.epsilons;
  std::stable_sort(eps.begin(), eps.end(), std::greater<>());
  std::vector<SweepCell> cells;
  for (double e : eps)
    for (std::size_t k = 0; k < c.ensemble; ++k) cells.push_back({e, c.seed + k, {}});

  std::vector<std::future<void>> jobs;
  for (auto& cell : cells)
    jobs.push_back(std::async(std::launch::async, [&] {
      SplitMix64 rng(cell.seed);
      State psi0 = smooth_random_state(p.disc, rng);
      psi0 *= 1.0 / norm(psi0, p.disc);
      cell.row = detail::solve_row(psi0, c, p, cell.epsilon);
      const auto dir = detail::scenario_dir(
          c, "sweep/eps" + detail::eps_tag(cell.epsilon) + "_seed" + std::to_string(cell.seed));
      detail::write_json(dir / "summary.json", {{"seed", cell.seed}, {"row", cell.row}});
    }));
  for (auto& j : jobs) j.get();

  nlohmann::json rows = nlohmann::json::array();
  for (const auto& cell : cells) rows.push_back({{"seed", cell.seed}, {"row", cell.row}});
  detail::write_json(detail::scenario_dir(c, "sweep") / "summary.json",
                     {{"scenario", "sweep"}, {"cells", rows}, {"config", c}});
  return cells;
}

}  // namespace ihum

#endif  // IHUM_EXPERIMENT_HPP
