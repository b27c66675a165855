#ifndef IHUM_CG_HPP
#define IHUM_CG_HPP

// Matrix-free conjugate gradient in the gradient form used by the HUM
// iteration: with an SPD operator M and data b the minimizer of
//   q(f) = 1/2 <M f, f> + <b, f>
// solves M f = -b. The running gradient is g = M f + b.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ihum {

/// Raised when <M w, w> <= 0, i.e. the operator lost positive definiteness.
class NumericalFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename Vec>
struct CgResult {
  Vec solution;
  Vec gradient;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> residual_history;    // ||g_k||, k = 0..iterations
  std::vector<double> functional_history;  // q(f_k),  k = 0..iterations
};

template <typename Vec>
concept CgVector = requires(Vec v, const Vec& c, double s) {
  { v.axpy(s, c) };
  { v *= s };
};

/// Runs CG from f0 until ||g_k|| / ||g_0|| <= tol or max_iter iterations.
/// `apply(v)` returns M v and `dot(u, v)` is the inner product M is symmetric in.
template <CgVector Vec, typename Apply, typename Dot>
CgResult<Vec> conjugate_gradient(Apply&& apply, const Vec& b, Vec f0, double tol,
                                 std::size_t max_iter, Dot&& dot) {
  if (!(tol > 0.0)) throw std::invalid_argument("cg: tol must be positive");
  CgResult<Vec> out;
  Vec f = std::move(f0);
  Vec g = apply(f);
  g.axpy(1.0, b);

  auto functional = [&](const Vec& fk, const Vec& gk) {
    // q(f) = 1/2 <g + b, f> since M f = g - b
    return 0.5 * (dot(gk, fk) + dot(b, fk));
  };

  double gg = dot(g, g);
  const double g0 = std::sqrt(gg);
  out.residual_history.push_back(g0);
  out.functional_history.push_back(functional(f, g));
  if (g0 == 0.0) {
    out.converged = true;
    out.solution = std::move(f);
    out.gradient = std::move(g);
    return out;
  }

  Vec w = g;
  for (std::size_t k = 1; k <= max_iter; ++k) {
    Vec gbar = apply(w);
    const double curvature = dot(gbar, w);
    if (!(curvature > 0.0))
      throw NumericalFault("cg: non-positive curvature <Mw, w> = " + std::to_string(curvature));
    const double rho = gg / curvature;
    f.axpy(-rho, w);
    g.axpy(-rho, gbar);
    const double gg_new = dot(g, g);
    out.iterations = k;
    out.residual_history.push_back(std::sqrt(gg_new));
    out.functional_history.push_back(functional(f, g));
    if (std::sqrt(gg_new) <= tol * g0) {
      out.converged = true;
      break;
    }
    const double gamma = gg_new / gg;
    w *= gamma;
    w.axpy(1.0, g);
    gg = gg_new;
  }
  out.solution = std::move(f);
  out.gradient = std::move(g);
  return out;
}

}  // namespace ihum

#endif  // IHUM_CG_HPP
