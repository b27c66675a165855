#ifndef IHUM_IO_HPP
#define IHUM_IO_HPP

// JSON views of solver results. Kept apart from the numerics so the core
// headers build without the JSON dependency.

#include <cstdio>
#include <ostream>
#include <vector>

#include <json.hpp>

#include "ihum/convexity.hpp"
#include "ihum/hum.hpp"

namespace ihum {

inline void to_json(nlohmann::json& j, const HumSolution& s) {
  j = nlohmann::json{{"epsilon", s.epsilon},
                     {"tol", s.tol},
                     {"iterations", s.iterations},
                     {"converged", s.converged},
                     {"control_norm", s.control_norm},
                     {"final_norm", s.final_norm},
                     {"initial_norm", s.initial_norm},
                     {"terminal_defect", s.terminal_defect},
                     {"residual_history", s.residual_history},
                     {"functional_history", s.functional_history}};
  j["kappa"] = s.kappa ? nlohmann::json(*s.kappa) : nlohmann::json(nullptr);
}

inline void to_json(nlohmann::json& j, const CostBoundReport& r) {
  j = nlohmann::json{{"control_term", r.control_term}, {"final_term", r.final_term},
                     {"sum", r.sum},                   {"initial_norm_sq", r.initial_norm_sq},
                     {"slack", r.slack},               {"holds", r.holds}};
}

inline void to_json(nlohmann::json& j, const DualityTerms& t) {
  j = nlohmann::json{{"control_term", t.control_term}, {"initial_term", t.initial_term},
                     {"final_term", t.final_term},     {"residual", t.residual},
                     {"scale", t.scale}};
}

inline void to_json(nlohmann::json& j, const WeightParams& w) {
  j = nlohmann::json{{"x0", w.x0}, {"s", w.s}, {"hbar", w.hbar}, {"t_final", w.t_final}};
}

inline void to_json(nlohmann::json& j, const ConvexityConstants& k) {
  j = nlohmann::json{{"C", k.c_const},        {"C0", k.c0},          {"ell", k.ell},
                     {"M_ell", k.m_ell},       {"D_ell", k.d_ell},    {"M", k.m_three_point},
                     {"D", k.d_three_point}};
}

inline void to_json(nlohmann::json& j, const ThreePointResult& r) {
  j = nlohmann::json{{"norm_sq", {r.norm_sq[0], r.norm_sq[1], r.norm_sq[2]}},
                     {"M", r.m},
                     {"D", r.d},
                     {"slack", r.slack},
                     {"allowance", r.allowance},
                     {"passes", r.passes}};
}

inline void to_json(nlohmann::json& j, const Lemma11Fit& f) {
  j = nlohmann::json{{"mu", f.mu},
                     {"K", f.k},
                     {"beta", f.beta},
                     {"satisfied_fraction", f.satisfied_fraction},
                     {"samples", f.samples}};
}

inline void to_json(nlohmann::json& j, const Lemma31Constants& c) {
  j = nlohmann::json{{"M1", c.m1}, {"M2", c.m2}, {"delta", c.delta}};
}

/// CSV of (t, ||F(t)||, N_direct, N_oracle); the oracle column is empty where undefined.
inline void write_frequency_csv(std::ostream& os, const std::vector<FrequencySample>& samples) {
  os << "t,norm_f,freq_direct,freq_oracle\n";
  char buf[128];
  for (const auto& s : samples) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,", s.t, s.norm_f, s.direct);
    os << buf;
    if (s.oracle == s.oracle) {
      std::snprintf(buf, sizeof buf, "%.17g", s.oracle);
      os << buf;
    }
    os << '\n';
  }
}

}  // namespace ihum

#endif  // IHUM_IO_HPP
