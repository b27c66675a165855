#ifndef IHUM_TRIDIAGONAL_HPP
#define IHUM_TRIDIAGONAL_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace ihum {

/// Thomas elimination for a tridiagonal matrix, factored once and reused.
/// No pivoting: intended for diagonally dominant systems.
class TridiagonalSolver {
 public:
  TridiagonalSolver() = default;

  /// lower[i] = M(i+1, i), upper[i] = M(i, i+1), both of length n-1.
  TridiagonalSolver(std::span<const double> lower, std::span<const double> diag,
                    std::span<const double> upper)
      : lower_(lower.begin(), lower.end()) {
    const std::size_t n = diag.size();
    if (n == 0 || lower.size() + 1 != n || upper.size() + 1 != n)
      throw std::invalid_argument("tridiagonal: inconsistent band sizes");
    c_.assign(n, 0.0);
    inv_pivot_.assign(n, 0.0);
    double pivot = diag[0];
    for (std::size_t i = 0; i < n; ++i) {
      if (i > 0) pivot = diag[i] - lower[i - 1] * c_[i - 1];
      if (pivot == 0.0 || !std::isfinite(pivot))
        throw std::domain_error("tridiagonal: zero pivot");
      inv_pivot_[i] = 1.0 / pivot;
      if (i + 1 < n) c_[i] = upper[i] * inv_pivot_[i];
    }
  }

  std::size_t size() const { return inv_pivot_.size(); }

  /// Solves in place.
  void solve(std::span<double> rhs) const {
    const std::size_t n = size();
    if (rhs.size() != n) throw std::invalid_argument("tridiagonal: rhs length mismatch");
    rhs[0] *= inv_pivot_[0];
    for (std::size_t i = 1; i < n; ++i)
      rhs[i] = (rhs[i] - lower_[i - 1] * rhs[i - 1]) * inv_pivot_[i];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c_[i] * rhs[i + 1];
  }

 private:
  std::vector<double> lower_;
  std::vector<double> c_;
  std::vector<double> inv_pivot_;
};

}  // namespace ihum

#endif  // IHUM_TRIDIAGONAL_HPP
