#ifndef ATLAB_ENERGY_HPP
#define ATLAB_ENERGY_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "atlab/grid.hpp"

namespace atlab {

/// Problem parameters. `boundary_value` is the Dirichlet datum u(L).
struct ATParams {
  double eps = 0.05;
  double eta = 0.0025;
  double length = 1.0;
  double boundary_value = 0.0;

  void validate() const {
    if (!(eps > 0.0) || !(eta > 0.0) || !(length > 0.0)) {
      throw std::invalid_argument("ATParams: eps, eta and length must be positive");
    }
    if (!(eta / eps < 1.0)) throw std::invalid_argument("ATParams: need eta < eps");
    if (!std::isfinite(boundary_value)) throw std::invalid_argument("ATParams: boundary value not finite");
  }

  ATParams with_boundary(double a) const {
    ATParams p = *this;
    p.boundary_value = a;
    return p;
  }
};

/// Displacement u and phase field v, both nodal.
struct State {
  NodalField u;
  NodalField v;
};

inline void require_state(const State& s, const Grid1D& g, const char* who) {
  require_nodal(s.u, g, who);
  require_nodal(s.v, g, who);
}

struct EnergyBreakdown {
  double elastic = 0.0;  ///< sum_c h (eta + <v^2>_c) |u'_c|^2
  double well = 0.0;     ///< trapezoid of (1 - v)^2 / eps
  double grad = 0.0;     ///< sum_c h eps |v'_c|^2
  double total = 0.0;

  double modica() const { return well + grad; }
};

/// Discrete Ambrosio-Tortorelli energy. Cell value of v^2 is the mean of the
/// squared endpoint values, so this is exactly the functional the u- and
/// v-subproblems minimise.
inline EnergyBreakdown at_energy(const State& s, const ATParams& p, const Grid1D& g) {
  require_state(s, g, "at_energy");
  const double h = g.spacing();
  long double el = 0.0L, gr = 0.0L, wl = 0.0L;
  for (std::size_t c = 0; c < g.n_cells(); ++c) {
    const double du = (s.u[c + 1] - s.u[c]) / h;
    const double dv = (s.v[c + 1] - s.v[c]) / h;
    const double m = 0.5 * (s.v[c] * s.v[c] + s.v[c + 1] * s.v[c + 1]);
    el += (p.eta + m) * du * du;
    gr += p.eps * dv * dv;
  }
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const double w = (1.0 - s.v[i]) * (1.0 - s.v[i]) / p.eps;
    wl += (i == 0 || i == g.n_cells()) ? 0.5 * w : w;
  }
  EnergyBreakdown e;
  e.elastic = static_cast<double>(el * h);
  e.grad = static_cast<double>(gr * h);
  e.well = static_cast<double>(wl * h);
  e.total = static_cast<double>((el + gr + wl) * h);
  return e;
}

/// One affine piece of a limit displacement on [left, right).
struct AffinePiece {
  double left = 0.0;
  double right = 0.0;
  double value_left = 0.0;
  double value_right = 0.0;

  double slope() const { return (value_right - value_left) / (right - left); }
  double at(double x) const { return value_left + slope() * (x - left); }
};

/// A piecewise-affine SBV limit profile: jump set J_u, the time-0 crack set
/// Gamma_0 and the affine pieces describing u between jumps.
struct JumpSpec {
  double length = 1.0;
  std::vector<double> jump_points;
  std::vector<double> gamma0;
  std::vector<AffinePiece> pieces;

  /// u(x), right-continuous at jumps.
  double u_at(double x) const {
    if (pieces.empty()) return 0.0;
    for (const auto& pc : pieces) {
      if (x >= pc.left && x < pc.right) return pc.at(x);
    }
    return x < pieces.front().left ? pieces.front().value_left : pieces.back().value_right;
  }

  double slope_at(double x) const {
    for (const auto& pc : pieces) {
      if (x >= pc.left && x < pc.right) return pc.slope();
    }
    return pieces.empty() ? 0.0 : pieces.back().slope();
  }

  /// Points of J_u not already in Gamma_0.
  std::vector<double> new_jumps(double tol) const {
    std::vector<double> out;
    for (double x : jump_points) {
      bool in_gamma0 = std::any_of(gamma0.begin(), gamma0.end(), [&](double y) { return std::abs(x - y) <= tol; });
      if (!in_gamma0) out.push_back(x);
    }
    return out;
  }

  /// Affine ramp 0 -> a on [0, L].
  static JumpSpec affine(double length, double a, std::vector<double> gamma0 = {}) {
    JumpSpec j;
    j.length = length;
    j.gamma0 = std::move(gamma0);
    j.pieces = {{0.0, length, 0.0, a}};
    return j;
  }

  /// Step a * 1_[x_jump, L].
  static JumpSpec step(double length, double a, double x_jump, std::vector<double> gamma0 = {}) {
    JumpSpec j;
    j.length = length;
    j.jump_points = {x_jump};
    j.gamma0 = std::move(gamma0);
    j.pieces = {{0.0, x_jump, 0.0, 0.0}, {x_jump, length, a, a}};
    return j;
  }
};

inline double jump_tolerance(const JumpSpec& j) { return 1e-12 * j.length; }

/// Limit energy int |u'|^2 + 2 #(J_u U Gamma_0), with points closer than
/// 1e-12 L identified.
inline double ms_energy(const JumpSpec& j) {
  std::vector<AffinePiece> pieces = j.pieces;
  std::sort(pieces.begin(), pieces.end(), [](const auto& a, const auto& b) { return a.left < b.left; });
  const double tol = jump_tolerance(j);
  double dirichlet = 0.0;
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    if (!(pieces[k].right > pieces[k].left)) throw std::invalid_argument("ms_energy: empty or reversed piece");
    if (k > 0 && pieces[k].left < pieces[k - 1].right - tol) {
      throw std::invalid_argument("ms_energy: overlapping segments");
    }
    const double du = pieces[k].value_right - pieces[k].value_left;
    dirichlet += du * du / (pieces[k].right - pieces[k].left);
  }
  std::vector<double> pts = j.jump_points;
  pts.insert(pts.end(), j.gamma0.begin(), j.gamma0.end());
  std::sort(pts.begin(), pts.end());
  std::size_t distinct = 0;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    if (k == 0 || pts[k] - pts[k - 1] > tol) ++distinct;
  }
  return dirichlet + 2.0 * static_cast<double>(distinct);
}

}  // namespace atlab

#endif  // ATLAB_ENERGY_HPP
