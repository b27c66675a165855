#ifndef IHUM_GRID_HPP
#define IHUM_GRID_HPP

// Spatial grid, nodal state, weighted product space and the semi-discrete
// heat operator with dynamic (Wentzell-type) boundary conditions.
//
// The continuous state (psi, psi(a), psi(b)) lives in L2(a,b) x R^2. On the
// grid it is a single nodal vector: entry 0 is the trace at a, entry nx the
// trace at b, and entries 1..nx-1 sample the interior profile. The product
// inner product becomes sum_i w_i u_i v_i with trapezoid weights in the
// interior plus a unit weight for each trace, merged into the end weights.

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ihum {

class Grid {
 public:
  Grid(double a, double b, std::size_t nx) : a_(a), b_(b), nx_(nx) {
    if (!(std::isfinite(a) && std::isfinite(b)) || !(a < b))
      throw std::invalid_argument("grid: need finite a < b");
    if (nx < 2) throw std::invalid_argument("grid: nx must be at least 2");
    dx_ = (b - a) / static_cast<double>(nx);
  }

  double a() const { return a_; }
  double b() const { return b_; }
  std::size_t nx() const { return nx_; }
  std::size_t size() const { return nx_ + 1; }
  double dx() const { return dx_; }

  // x_0 = a and x_nx = b are returned exactly.
  double node(std::size_t i) const {
    if (i == nx_) return b_;
    return a_ + static_cast<double>(i) * dx_;
  }

 private:
  double a_;
  double b_;
  std::size_t nx_;
  double dx_;
};

/// Nodal values of (psi, psi(a), psi(b)); see the file comment for layout.
class State {
 public:
  State() = default;
  explicit State(std::size_t n, double value = 0.0) : values_(n, value) {}
  explicit State(std::vector<double> values) : values_(std::move(values)) {}
  State(std::initializer_list<double> values) : values_(values) {}

  std::size_t size() const { return values_.size(); }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  auto begin() { return values_.begin(); }
  auto end() { return values_.end(); }
  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  const std::vector<double>& vector() const { return values_; }

  double left_trace() const { return values_.front(); }
  double right_trace() const { return values_.back(); }

  bool all_finite() const {
    for (double v : values_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  State& operator+=(const State& o) {
    check_same_size(o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    return *this;
  }
  State& operator-=(const State& o) {
    check_same_size(o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
    return *this;
  }
  State& operator*=(double s) {
    for (double& v : values_) v *= s;
    return *this;
  }

  // this += alpha * x
  State& axpy(double alpha, const State& x) {
    check_same_size(x);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += alpha * x.values_[i];
    return *this;
  }

  friend State operator+(State l, const State& r) { return l += r; }
  friend State operator-(State l, const State& r) { return l -= r; }
  friend State operator*(double s, State v) { return v *= s; }
  friend State operator*(State v, double s) { return v *= s; }
  friend bool operator==(const State&, const State&) = default;

  void check_same_size(const State& o) const {
    if (o.size() != size())
      throw std::invalid_argument("state length mismatch: " + std::to_string(size()) +
                                  " vs " + std::to_string(o.size()));
  }

 private:
  std::vector<double> values_;
};

/// Weighted-symmetric pair (W, K) with A_h = W^{-1} K.
///
/// Interior rows are the three-point Laplacian multiplied by w_i = dx. The
/// end rows come from lumping the half cell next to each boundary into the
/// trace equation:
///   (1 + dx/2) u_0'  =  (u_1 - u_0) / dx
///   (1 + dx/2) u_nx' = -(u_nx - u_{nx-1}) / dx
/// K is stored as its diagonal and one shared off-diagonal, so K = K^T holds
/// bit for bit.
class Discretization {
 public:
  explicit Discretization(Grid grid) : grid_(grid) {
    const std::size_t n = grid_.size();
    const double dx = grid_.dx();
    const double inv = 1.0 / dx;
    weights_.assign(n, dx);
    weights_.front() = 1.0 + 0.5 * dx;
    weights_.back() = 1.0 + 0.5 * dx;
    diag_.assign(n, -2.0 * inv);
    diag_.front() = -inv;
    diag_.back() = -inv;
    off_.assign(n - 1, inv);
  }

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return grid_.size(); }
  std::span<const double> weights() const { return weights_; }
  double weight(std::size_t i) const { return weights_[i]; }

  /// Diagonal of K.
  std::span<const double> k_diagonal() const { return diag_; }
  /// K(i, i+1) == K(i+1, i).
  std::span<const double> k_off_diagonal() const { return off_; }

  /// Entry (i, j) of K; zero outside the tridiagonal band.
  double k(std::size_t i, std::size_t j) const {
    if (i == j) return diag_[i];
    if (i + 1 == j) return off_[i];
    if (j + 1 == i) return off_[j];
    return 0.0;
  }

  /// Returns K u.
  State apply_k(const State& u) const {
    check(u);
    const std::size_t n = size();
    State out(n);
    for (std::size_t i = 0; i < n; ++i) {
      double acc = diag_[i] * u[i];
      if (i > 0) acc += off_[i - 1] * u[i - 1];
      if (i + 1 < n) acc += off_[i] * u[i + 1];
      out[i] = acc;
    }
    return out;
  }

  /// Returns A_h u = W^{-1} K u.
  State apply_operator(const State& u) const {
    State out = apply_k(u);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] /= weights_[i];
    return out;
  }

  /// Builds a state by sampling f at the nodes.
  template <typename F>
  State sample(F&& f) const {
    State s(size());
    for (std::size_t i = 0; i < size(); ++i) s[i] = f(grid_.node(i));
    return s;
  }

  void check(const State& u) const {
    if (u.size() != size())
      throw std::invalid_argument("state has length " + std::to_string(u.size()) +
                                  ", grid needs " + std::to_string(size()));
  }

 private:
  Grid grid_;
  std::vector<double> weights_;
  std::vector<double> diag_;
  std::vector<double> off_;
};

inline Discretization build_discretization(const Grid& grid) { return Discretization(grid); }

/// Product-space inner product sum_i w_i u_i v_i.
inline double inner(const State& u, const State& v, const Discretization& d) {
  d.check(u);
  d.check(v);
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) acc += d.weight(i) * u[i] * v[i];
  return acc;
}

inline double norm(const State& u, const Discretization& d) { return std::sqrt(inner(u, u, d)); }

/// Indicator of the observation/control region omega on the nodes.
/// Closed-interval membership; the two trace nodes are always excluded.
class SubdomainMask {
 public:
  SubdomainMask(const Grid& grid, double lo, double hi) : lo_(lo), hi_(hi) {
    if (!(grid.a() < lo && lo < hi && hi < grid.b()))
      throw std::invalid_argument("omega must satisfy a < lo < hi < b");
    const double slack = 1e-12 * (grid.b() - grid.a());
    mask_.assign(grid.size(), 0.0);
    for (std::size_t i = 1; i < grid.nx(); ++i) {
      const double x = grid.node(i);
      if (x >= lo - slack && x <= hi + slack) mask_[i] = 1.0;
    }
    bool any = false;
    for (double m : mask_) any = any || m != 0.0;
    if (!any) throw std::invalid_argument("omega contains no grid node; refine the grid");
  }

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  std::size_t size() const { return mask_.size(); }
  double operator[](std::size_t i) const { return mask_[i]; }
  std::span<const double> values() const { return mask_; }

  std::size_t count() const {
    std::size_t c = 0;
    for (double m : mask_) c += m != 0.0 ? 1 : 0;
    return c;
  }

 private:
  double lo_;
  double hi_;
  std::vector<double> mask_;
};

/// L2(omega) norm with interior quadrature weight dx per masked node.
inline double omega_norm(const State& u, const SubdomainMask& mask, const Discretization& d) {
  d.check(u);
  if (mask.size() != u.size()) throw std::invalid_argument("mask built on a different grid");
  const double dx = d.grid().dx();
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) acc += mask[i] * dx * u[i] * u[i];
  return std::sqrt(acc);
}

/// L2(omega) inner product matching omega_norm.
inline double omega_inner(const State& u, const State& v, const SubdomainMask& mask,
                          const Discretization& d) {
  d.check(u);
  d.check(v);
  if (mask.size() != u.size()) throw std::invalid_argument("mask built on a different grid");
  const double dx = d.grid().dx();
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) acc += mask[i] * dx * u[i] * v[i];
  return acc;
}

}  // namespace ihum

#endif  // IHUM_GRID_HPP
