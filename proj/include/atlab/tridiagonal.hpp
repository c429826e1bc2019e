#ifndef ATLAB_TRIDIAGONAL_HPP
#define ATLAB_TRIDIAGONAL_HPP

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace atlab {

/// Thomas algorithm for lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i].
/// lower[0] and upper[n-1] are ignored. No pivoting: intended for the
/// diagonally dominant systems assembled in this library.
inline std::vector<double> solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                                             std::span<const double> upper, std::span<const double> rhs) {
  const std::size_t n = diag.size();
  if (lower.size() != n || upper.size() != n || rhs.size() != n) {
    throw std::invalid_argument("solve_tridiagonal: size mismatch");
  }
  std::vector<double> c(n), d(n), x(n);
  if (n == 0) return x;
  double beta = diag[0];
  if (beta == 0.0) throw std::runtime_error("solve_tridiagonal: zero pivot");
  c[0] = upper[0] / beta;
  d[0] = rhs[0] / beta;
  for (std::size_t i = 1; i < n; ++i) {
    beta = diag[i] - lower[i] * c[i - 1];
    if (beta == 0.0) throw std::runtime_error("solve_tridiagonal: zero pivot");
    c[i] = (i + 1 < n) ? upper[i] / beta : 0.0;
    d[i] = (rhs[i] - lower[i] * d[i - 1]) / beta;
  }
  x[n - 1] = d[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
  return x;
}

}  // namespace atlab

#endif  // ATLAB_TRIDIAGONAL_HPP
