#ifndef ATLAB_OBSTACLE_HPP
#define ATLAB_OBSTACLE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "atlab/energy.hpp"
#include "atlab/errors.hpp"
#include "atlab/grid.hpp"
#include "atlab/tridiagonal.hpp"

namespace atlab {

/// Upper bound for the phase field: the constant one at time 0, the previous
/// phase field afterwards.
struct ObstacleSpec {
  NodalField obstacle;

  static ObstacleSpec unconstrained(const Grid1D& g) { return {constant_nodal(g, 1.0)}; }

  void validate(const Grid1D& g) const {
    require_nodal(obstacle, g, "ObstacleSpec");
    if (obstacle[0] != 1.0 || obstacle[g.n_cells()] != 1.0) {
      throw std::invalid_argument("ObstacleSpec: obstacle must equal 1 at both endpoints");
    }
    for (double b : obstacle) {
      if (!(b >= 0.0 && b <= 1.0)) throw std::invalid_argument("ObstacleSpec: obstacle outside [0, 1]");
    }
  }
};

/// Nodal density of the obstacle multiplier; zero on the free set.
struct MultiplierField {
  NodalField mu;
};

/// Partition of the interior nodes into contact (v == obstacle) and free.
struct ActiveSet {
  std::vector<std::size_t> contact_indices;
  std::vector<std::size_t> free_indices;

  double contact_fraction(const Grid1D& g) const {
    return static_cast<double>(contact_indices.size()) / static_cast<double>(g.n_cells() - 1);
  }
  bool empty() const { return contact_indices.empty(); }
};

struct ObstacleTolerances {
  double active = 1e-10;
  double mu = 1e-10;
  double comp_scale = 1e-12;  ///< multiplied by 1/eps
};

struct ObstacleOptions {
  /// Zero means the finite-termination bound (interior node count + 2).
  int max_active_set_iters = 0;
  int max_relaxation_sweeps = 2'000'000;
  double relaxation = 1.6;
  double tol = 1e-11;
  double switch_threshold = 1e-14;
  ObstacleTolerances tols{};
};

/// Normalised residuals of the v-complementarity system.
struct LcpResidual {
  double stationarity = 0.0;     ///< |r_i| / row scale on free nodes
  double sign = 0.0;             ///< positive part of r_i / row scale on contact nodes
  double feasibility = 0.0;      ///< max of (v - obstacle)^+ and (-v)^+
  double complementarity = 0.0;  ///< max |mu_i (obstacle_i - v_i)| * eps

  double max() const { return std::max({stationarity, sign, feasibility, complementarity}); }
};

struct ObstacleSolution {
  NodalField v;
  MultiplierField multiplier;
  ActiveSet active;
  LcpResidual residual;
  int active_set_iterations = 0;
  bool used_relaxation = false;
};

namespace detail {

/// Nodal load q_i: mean of the adjacent cell values of |u'|^2.
inline NodalField nodal_load(const CellField& u_prime_sq, const Grid1D& g) {
  NodalField q(g.node_count(), 0.0);
  for (std::size_t i = 1; i < g.n_cells(); ++i) q[i] = 0.5 * (u_prime_sq[i - 1] + u_prime_sq[i]);
  return q;
}

struct RowResidual {
  double value;
  double scale;
};

inline RowResidual row_residual(const NodalField& v, const NodalField& q, std::size_t i, const ATParams& p,
                                double h) {
  const double k = p.eps / (h * h);
  const double lap = 2.0 * v[i] - v[i - 1] - v[i + 1];
  RowResidual r;
  r.value = k * lap + (v[i] - 1.0) / p.eps + q[i] * v[i];
  r.scale = k * (2.0 * std::abs(v[i]) + std::abs(v[i - 1]) + std::abs(v[i + 1])) + (std::abs(v[i]) + 1.0) / p.eps +
            q[i] * std::abs(v[i]);
  return r;
}

}  // namespace detail

/// Residual r_i = -eps v'' + (v - 1)/eps + q v at every interior node
/// (boundary entries zero).
inline NodalField v_equation_residual(const NodalField& v, const CellField& u_prime_sq, const ATParams& p,
                                      const Grid1D& g) {
  require_nodal(v, g, "v_equation_residual");
  require_cell(u_prime_sq, g, "v_equation_residual");
  const NodalField q = detail::nodal_load(u_prime_sq, g);
  NodalField r(g.node_count(), 0.0);
  for (std::size_t i = 1; i < g.n_cells(); ++i) r[i] = detail::row_residual(v, q, i, p, g.spacing()).value;
  return r;
}

/// Classifies contact, extracts the multiplier and measures the KKT residuals
/// of a candidate v against load u_prime_sq.
inline void certify(ObstacleSolution& sol, const CellField& u_prime_sq, const ObstacleSpec& obs, const ATParams& p,
                    const Grid1D& g, const ObstacleTolerances& tols = {}) {
  const NodalField q = detail::nodal_load(u_prime_sq, g);
  const double h = g.spacing();
  sol.multiplier.mu = NodalField(g.node_count(), 0.0);
  sol.active = ActiveSet{};
  LcpResidual res;
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    res.feasibility = std::max({res.feasibility, sol.v[i] - obs.obstacle[i], -sol.v[i]});
  }
  for (std::size_t i = 1; i < g.n_cells(); ++i) {
    const auto r = detail::row_residual(sol.v, q, i, p, h);
    const double gap = obs.obstacle[i] - sol.v[i];
    if (gap <= tols.active) {
      sol.active.contact_indices.push_back(i);
      sol.multiplier.mu[i] = r.value;
      res.sign = std::max(res.sign, r.value / r.scale);
      res.complementarity = std::max(res.complementarity, std::abs(r.value * gap) * p.eps);
    } else {
      sol.active.free_indices.push_back(i);
      res.stationarity = std::max(res.stationarity, std::abs(r.value) / r.scale);
    }
  }
  sol.residual = res;
}

/// Solves the tridiagonal complementarity problem
///   A v - f <= 0,  v <= obstacle,  (A v - f)(obstacle - v) = 0
/// with rows [-eps/h^2, 2 eps/h^2 + 1/eps + q_i, -eps/h^2], load 1/eps and
/// v = 1 at both ends. Primal-dual active set iterations with direct
/// tridiagonal solves; projected SOR if the active set does not settle.
///
/// `warm_start`, when given, seeds the active set with its contact nodes.
inline ObstacleSolution solve_v(const CellField& u_prime_sq, const ObstacleSpec& obs, const ATParams& p,
                                const Grid1D& g, const ObstacleOptions& opts = {},
                                const NodalField* warm_start = nullptr) {
  require_cell(u_prime_sq, g, "solve_v");
  obs.validate(g);
  for (double s : u_prime_sq) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw std::invalid_argument("solve_v: load must be finite and nonnegative");
  }
  const double h = g.spacing();
  const std::size_t n_int = g.n_cells() - 1;
  const double k = p.eps / (h * h);
  const NodalField q = detail::nodal_load(u_prime_sq, g);

  std::vector<double> diag(n_int), f(n_int, 1.0 / p.eps), b(n_int);
  for (std::size_t j = 0; j < n_int; ++j) {
    diag[j] = 2.0 * k + 1.0 / p.eps + q[j + 1];
    b[j] = obs.obstacle[j + 1];
  }
  f.front() += k;
  f.back() += k;

  auto apply = [&](const std::vector<double>& x, std::size_t j) {
    double y = diag[j] * x[j];
    if (j > 0) y -= k * x[j - 1];
    if (j + 1 < n_int) y -= k * x[j + 1];
    return y;
  };

  std::vector<char> active(n_int, 0);
  std::vector<double> lower(n_int), upper(n_int), d(n_int), rhs(n_int), x;

  auto reduced_solve = [&]() {
    for (std::size_t j = 0; j < n_int; ++j) {
      if (active[j]) {
        lower[j] = upper[j] = 0.0;
        d[j] = 1.0;
        rhs[j] = b[j];
      } else {
        d[j] = diag[j];
        rhs[j] = f[j];
        lower[j] = -k;
        upper[j] = -k;
        if (j > 0 && active[j - 1]) {
          lower[j] = 0.0;
          rhs[j] += k * b[j - 1];
        }
        if (j + 1 < n_int && active[j + 1]) {
          upper[j] = 0.0;
          rhs[j] += k * b[j + 1];
        }
      }
    }
    x = solve_tridiagonal(lower, d, upper, rhs);
  };

  if (warm_start != nullptr) {
    require_nodal(*warm_start, g, "solve_v");
    for (std::size_t j = 0; j < n_int; ++j) active[j] = (*warm_start)[j + 1] >= b[j] ? 1 : 0;
  }

  ObstacleSolution sol;
  reduced_solve();
  bool settled = false;
  const int max_iters = opts.max_active_set_iters > 0 ? opts.max_active_set_iters : static_cast<int>(n_int) + 2;
  for (int it = 0; it < max_iters; ++it) {
    // Nodes where the free solution grazes the obstacle flip on rounding
    // noise; a switch needs a violation above `flip` (relative to the row).
    std::vector<char> next(n_int, 0);
    for (std::size_t j = 0; j < n_int; ++j) {
      const double flip = opts.switch_threshold * diag[j];
      if (active[j]) {
        next[j] = (f[j] - apply(x, j) < -flip) ? 0 : 1;
      } else {
        next[j] = (x[j] - b[j] > opts.switch_threshold) ? 1 : 0;
      }
    }
    sol.active_set_iterations = it + 1;
    if (next == active) {
      settled = true;
      break;
    }
    active.swap(next);
    reduced_solve();
  }

  if (!settled) {
    // Projected SOR from the last iterate.
    sol.used_relaxation = true;
    for (std::size_t j = 0; j < n_int; ++j) x[j] = std::min(x[j], b[j]);
    double change = 1.0;
    int sweep = 0;
    for (; sweep < opts.max_relaxation_sweeps && change > opts.tol * 1e-3; ++sweep) {
      change = 0.0;
      for (std::size_t j = 0; j < n_int; ++j) {
        double s = f[j];
        if (j > 0) s += k * x[j - 1];
        if (j + 1 < n_int) s += k * x[j + 1];
        const double gs = s / diag[j];
        const double xn = std::min(b[j], x[j] + opts.relaxation * (gs - x[j]));
        change = std::max(change, std::abs(xn - x[j]));
        x[j] = xn;
      }
    }
    if (sweep == opts.max_relaxation_sweeps) {
      throw SolverFailure("solve_v: projected relaxation did not converge", change);
    }
  }

  sol.v = NodalField(g.node_count(), 1.0);
  for (std::size_t j = 0; j < n_int; ++j) sol.v[j + 1] = std::min(x[j], b[j]);
  certify(sol, u_prime_sq, obs, p, g, opts.tols);
  if (sol.residual.max() > opts.tol) {
    throw SolverFailure("solve_v: complementarity residual above tolerance", sol.residual.max());
  }
  return sol;
}

}  // namespace atlab

#endif  // ATLAB_OBSTACLE_HPP
