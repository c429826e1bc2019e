#ifndef ATLAB_FLUX_HPP
#define ATLAB_FLUX_HPP

#include <cmath>

#include "atlab/energy.hpp"
#include "atlab/grid.hpp"

namespace atlab {

struct FluxSolution {
  NodalField u;
  double c_eps = 0.0;  ///< the constant flux (eta + v^2) u'
  CellField u_prime;
};

/// Exact minimiser in u for fixed v: harmonic-sum closed form.
inline FluxSolution solve_u(const NodalField& v, const ATParams& p, const Grid1D& g) {
  require_nodal(v, g, "solve_u");
  const double h = g.spacing();
  const CellField m = cell_mean_square(v, g);
  long double compliance = 0.0L;
  for (double mc : m) compliance += h / (p.eta + mc);

  FluxSolution sol;
  sol.c_eps = static_cast<double>(p.boundary_value / compliance);
  sol.u_prime = CellField(g.n_cells(), 0.0);
  for (std::size_t c = 0; c < g.n_cells(); ++c) sol.u_prime[c] = sol.c_eps / (p.eta + m[c]);
  sol.u = cumulative_integral(sol.u_prime, g, 0.0);
  sol.u[g.n_cells()] = p.boundary_value;
  return sol;
}

/// Backward error of the discrete flux equation (eta + m_c)(u_{c+1} - u_c) = c h,
/// normalised per cell by the magnitude of its terms.
inline double flux_residual(const NodalField& u, const NodalField& v, double c_eps, const ATParams& p,
                            const Grid1D& g) {
  require_nodal(u, g, "flux_residual");
  const double h = g.spacing();
  const CellField m = cell_mean_square(v, g);
  double worst = 0.0;
  for (std::size_t c = 0; c < g.n_cells(); ++c) {
    const double k = p.eta + m[c];
    const double r = k * (u[c + 1] - u[c]) - c_eps * h;
    const double scale = k * (std::abs(u[c + 1]) + std::abs(u[c])) + std::abs(c_eps) * h;
    if (scale > 0.0) worst = std::max(worst, std::abs(r) / scale);
  }
  return worst;
}

}  // namespace atlab

#endif  // ATLAB_FLUX_HPP
