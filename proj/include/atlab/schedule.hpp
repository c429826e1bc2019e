#ifndef ATLAB_SCHEDULE_HPP
#define ATLAB_SCHEDULE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace atlab {

/// How eta depends on eps.
struct EtaRule {
  enum class Kind { eps_squared, eps_pow, fixed };
  Kind kind = Kind::eps_squared;
  double value = 2.0;  ///< exponent for eps_pow, eta itself for fixed

  static EtaRule eps_squared() { return {Kind::eps_squared, 2.0}; }
  static EtaRule eps_pow(double p) { return {Kind::eps_pow, p}; }
  static EtaRule fixed(double eta) { return {Kind::fixed, eta}; }

  double operator()(double eps) const {
    switch (kind) {
      case Kind::eps_squared: return eps * eps;
      case Kind::eps_pow: return std::pow(eps, value);
      case Kind::fixed: return value;
    }
    return eps * eps;
  }

  std::string describe() const {
    switch (kind) {
      case Kind::eps_squared: return "eps_squared";
      case Kind::eps_pow: return "eps_pow(" + std::to_string(value) + ")";
      case Kind::fixed: return "fixed(" + std::to_string(value) + ")";
    }
    return "?";
  }
};

/// Cell count per eps: either a fixed count or max(min_cells, ceil(per_eps * L / eps)).
struct CellRule {
  std::size_t fixed = 0;
  std::size_t min_cells = 2048;
  double per_eps = 32.0;

  static CellRule fixed_count(std::size_t n) { return {n, 0, 0.0}; }
  static CellRule proportional(std::size_t min_cells = 2048, double per_eps = 32.0) { return {0, min_cells, per_eps}; }

  std::size_t operator()(double eps, double length) const {
    if (fixed > 0) return fixed;
    const double n = std::ceil(per_eps * length / eps);
    return std::max<std::size_t>(min_cells, static_cast<std::size_t>(n));
  }
};

}  // namespace atlab

#endif  // ATLAB_SCHEDULE_HPP
