#ifndef ATLAB_DIAGNOSTICS_HPP
#define ATLAB_DIAGNOSTICS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "atlab/critical.hpp"
#include "atlab/energy.hpp"
#include "atlab/flux.hpp"
#include "atlab/grid.hpp"
#include "atlab/obstacle.hpp"

namespace atlab {

/// Cell-wise discrepancy
///   d_c = (1 - v_i)(1 - v_{i+1})/eps - eps (dv/h)^2 - (eta + m_c) u'^2
/// on the staggered layout of the energy. The well and gradient parts of
/// successive cells differ by exactly (v_{i+1} - v_{i-1}) times the discrete
/// v-residual at node i, so this is the form whose increments the multiplier
/// controls.
inline CellField discrepancy_cells(const State& s, const ATParams& p, const Grid1D& g) {
  require_state(s, g, "discrepancy_cells");
  const double h = g.spacing();
  CellField d(g.n_cells());
  for (std::size_t c = 0; c < g.n_cells(); ++c) {
    const double a = s.v[c], b = s.v[c + 1];
    const double dv = (b - a) / h;
    const double du = (s.u[c + 1] - s.u[c]) / h;
    const double m = 0.5 * (a * a + b * b);
    d[c] = (1.0 - a) * (1.0 - b) / p.eps - p.eps * dv * dv - (p.eta + m) * du * du;
  }
  return d;
}

/// Nodal discrepancy (1 - v)^2/eps - eps|v'|^2 - (eta + v^2)|u'|^2 with the
/// cell quantities averaged to nodes.
inline NodalField discrepancy(const State& s, const ATParams& p, const Grid1D& g) {
  require_state(s, g, "discrepancy");
  const double h = g.spacing();
  CellField cells(g.n_cells());
  for (std::size_t c = 0; c < g.n_cells(); ++c) {
    const double a = s.v[c], b = s.v[c + 1];
    const double dv = (b - a) / h;
    const double du = (s.u[c + 1] - s.u[c]) / h;
    cells[c] = p.eps * dv * dv + (p.eta + 0.5 * (a * a + b * b)) * du * du;
  }
  NodalField d = to_nodes(cells, g);
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const double w = 1.0 - s.v[i];
    d[i] = w * w / p.eps - d[i];
  }
  return d;
}

/// Largest violation of "non-decreasing on [0, L/2], non-increasing on
/// [L/2, L]" among the increments d_c - d_{c-1}, relative to max |d|.
/// The increment across a node sitting exactly at L/2 belongs to neither
/// half and is skipped.
inline double discrepancy_sign_violation(const CellField& d, const Grid1D& g) {
  double scale = 0.0;
  for (double x : d) scale = std::max(scale, std::abs(x));
  if (scale == 0.0) return 0.0;
  const double half = 0.5 * g.length();
  const double tie = 1e-12 * g.length();
  double worst = 0.0;
  for (std::size_t c = 1; c < g.n_cells(); ++c) {
    const double x = g.x(c);
    if (std::abs(x - half) <= tie) continue;
    const double inc = d[c] - d[c - 1];
    worst = std::max(worst, x < half ? -inc : inc);
  }
  return worst / scale;
}

/// max |d - mean(d)| over the cells.
inline double discrepancy_spread(const CellField& d) {
  if (d.size() == 0) return 0.0;
  long double s = 0.0L;
  for (double x : d) s += x;
  const double mean = static_cast<double>(s / static_cast<long double>(d.size()));
  double out = 0.0;
  for (double x : d) out = std::max(out, std::abs(x - mean));
  return out;
}

/// Contact nodes whose two neighbours are also in contact (or are boundary
/// nodes). On these the discrete multiplier has no contribution from the
/// stencil reaching into the free set.
inline std::vector<std::size_t> interior_contact_nodes(const ActiveSet& active, const Grid1D& g) {
  std::vector<char> in(g.node_count(), 0);
  in[0] = in[g.n_cells()] = 1;
  for (std::size_t i : active.contact_indices) in[i] = 1;
  std::vector<std::size_t> out;
  for (std::size_t i : active.contact_indices) {
    if (in[i - 1] && in[i + 1]) out.push_back(i);
  }
  return out;
}

/// Both algebraic forms of the explicit multiplier on the contact set:
///   load form  v0 (|u'|^2 - |u0'|^2)
///   flux form  v0 (c^2 - c0^2) / (eta + v0^2)^2
/// with |u'|^2 and 1/(eta + v0^2)^2 taken as the mean over the two cells
/// adjacent to the node.
struct MuExplicit {
  NodalField load_form;
  NodalField flux_form;
};

inline MuExplicit mu_explicit_forms(const State& s1, const CriticalPointReport& report0, const FluxSolution& flux1,
                                    const ActiveSet& active, const ATParams& p, const Grid1D& g) {
  if (!report0.converged) throw std::invalid_argument("mu_explicit: time-0 report not converged");
  require_state(s1, g, "mu_explicit");
  require_state(report0.state, g, "mu_explicit");
  require_cell(flux1.u_prime, g, "mu_explicit");
  require_cell(report0.flux.u_prime, g, "mu_explicit");
  const NodalField& v0 = report0.state.v;
  const double c = flux1.c_eps, c0 = report0.flux.c_eps;
  MuExplicit out{NodalField(g.node_count(), 0.0), NodalField(g.node_count(), 0.0)};
  for (std::size_t i : active.contact_indices) {
    if (i == 0 || i >= g.n_cells()) throw std::invalid_argument("mu_explicit: contact index out of the interior");
    const double q1 = 0.5 * (flux1.u_prime[i - 1] * flux1.u_prime[i - 1] + flux1.u_prime[i] * flux1.u_prime[i]);
    const double q0 = 0.5 * (report0.flux.u_prime[i - 1] * report0.flux.u_prime[i - 1] +
                             report0.flux.u_prime[i] * report0.flux.u_prime[i]);
    out.load_form[i] = v0[i] * (q1 - q0);
    auto inv2 = [&](std::size_t cell) {
      const double m = 0.5 * (v0[cell] * v0[cell] + v0[cell + 1] * v0[cell + 1]);
      return 1.0 / ((p.eta + m) * (p.eta + m));
    };
    out.flux_form[i] = v0[i] * (c * c - c0 * c0) * 0.5 * (inv2(i - 1) + inv2(i));
  }
  return out;
}

inline NodalField mu_explicit(const State& s1, const CriticalPointReport& report0, const FluxSolution& flux1,
                              const ActiveSet& active, const ATParams& p, const Grid1D& g) {
  return mu_explicit_forms(s1, report0, flux1, active, p, g).load_form;
}

/// Trapezoid integral of |(1 - v)^2/eps - eps|v'|^2|, the gradient term
/// averaged from cells to nodes.
inline double equipartition_defect(const State& s, const ATParams& p, const Grid1D& g) {
  require_state(s, g, "equipartition_defect");
  CellField grad = derivative(s.v, g);
  for (double& x : grad) x = p.eps * x * x;
  NodalField f = to_nodes(grad, g);
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const double w = 1.0 - s.v[i];
    f[i] = std::abs(w * w / p.eps - f[i]);
  }
  return integrate(f, g);
}

struct ConcentrationReport {
  double x_eps = 0.0;
  double v_min = 1.0;
  double alpha_est = 0.0;
  double mass_total = 0.0;
  double mass_outside = 0.0;
  double delta = 0.0;
  double well_mass = 0.0;
  double grad_mass = 0.0;
};

inline std::size_t argmin_leftmost(const NodalField& v) {
  std::size_t k = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] < v[k]) k = i;
  }
  return k;
}

/// Values within this of the minimum are indistinguishable from it.
inline constexpr double minimum_band = 1e-12;

/// Node of the phase-field minimum. The leftmost argmin, except when the
/// nodes within `minimum_band` of the minimum form one contiguous run that
/// is not an exact tie (a flat interior resolved only to rounding); then
/// the centre of the run.
inline std::size_t minimum_node(const NodalField& v) {
  const std::size_t k = argmin_leftmost(v);
  const double vmin = v[k];
  std::size_t first = v.size(), last = 0;
  bool exact = true;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] <= vmin + minimum_band) {
      first = std::min(first, i);
      last = i;
      if (v[i] != vmin) exact = false;
    }
  }
  if (exact || first == last) return k;
  for (std::size_t i = first; i <= last; ++i) {
    if (v[i] > vmin + minimum_band) return k;
  }
  return first + (last - first) / 2;
}

/// Modica mass and its distribution around the minimum of v.
/// Cells whose midpoint lies at distance >= delta from x_eps count as outside.
inline ConcentrationReport concentration(const State& s, const ATParams& p, const Grid1D& g, double delta) {
  require_state(s, g, "concentration");
  if (!(delta > 0.0 && delta < 0.25 * g.length())) throw std::invalid_argument("concentration: need 0 < delta < L/4");
  ConcentrationReport r;
  r.delta = delta;
  const std::size_t k = minimum_node(s.v);
  r.x_eps = g.x(k);
  r.v_min = s.v[k];
  r.alpha_est = 2.0 * (1.0 - r.v_min) * (1.0 - r.v_min);
  const double h = g.spacing();
  long double well = 0.0L, grad = 0.0L, outside = 0.0L;
  for (std::size_t c = 0; c < g.n_cells(); ++c) {
    const double wa = 1.0 - s.v[c], wb = 1.0 - s.v[c + 1];
    const double dv = (s.v[c + 1] - s.v[c]) / h;
    const long double cw = 0.5L * (wa * wa + wb * wb) / p.eps * h;
    const long double cg = static_cast<long double>(p.eps) * dv * dv * h;
    well += cw;
    grad += cg;
    if (std::abs(g.midpoint(c) - r.x_eps) >= delta) outside += cw + cg;
  }
  r.well_mass = static_cast<double>(well);
  r.grad_mass = static_cast<double>(grad);
  r.mass_total = static_cast<double>(well + grad);
  r.mass_outside = static_cast<double>(outside);
  return r;
}

/// int 2|v'|(1 - v), exact for piecewise-linear v. Equals 2(1 - v_min)^2
/// when v is monotone on each side of its minimum.
inline double telescoping_weight(const NodalField& v, const Grid1D& g) {
  require_nodal(v, g, "telescoping_weight");
  long double s = 0.0L;
  for (std::size_t c = 0; c < g.n_cells(); ++c) {
    const double dv = v[c + 1] - v[c];
    s += 2.0L * std::abs(dv) * (1.0L - 0.5L * (static_cast<long double>(v[c]) + v[c + 1]));
  }
  return static_cast<double>(s);
}

/// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("loglog_slope: size mismatch");
  if (x.size() < 2) throw std::invalid_argument("loglog_slope: need at least two points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  std::vector<double> lx(x.size()), ly(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(x[k] > 0.0) || !(y[k] > 0.0)) throw std::invalid_argument("loglog_slope: values must be positive");
    lx[k] = std::log(x[k]);
    ly[k] = std::log(y[k]);
    sx += lx[k];
    sy += ly[k];
  }
  const double mx = sx / n, my = sy / n;
  double sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (lx[k] - mx) * (ly[k] - my);
    sxx += (lx[k] - mx) * (lx[k] - mx);
  }
  if (sxx == 0.0) throw std::invalid_argument("loglog_slope: abscissae coincide");
  return sxy / sxx;
}

inline double mass_outside_rate(const std::vector<std::pair<double, ConcentrationReport>>& sweep) {
  if (sweep.size() < 3) throw std::invalid_argument("mass_outside_rate: need at least three sweep points");
  std::vector<double> x, y;
  for (const auto& [eps, rep] : sweep) {
    if (rep.delta != sweep.front().second.delta) throw std::invalid_argument("mass_outside_rate: delta differs");
    x.push_back(eps);
    y.push_back(rep.mass_outside);
  }
  return loglog_slope(x, y);
}

struct ShapeResult {
  double x_eps = 0.0;
  bool ok = true;
};

/// v non-increasing up to its minimum and non-decreasing after, up to `tol`
/// per step.
inline ShapeResult shape_check(const NodalField& v, const Grid1D& g, double tol) {
  require_nodal(v, g, "shape_check");
  const std::size_t k = minimum_node(v);
  ShapeResult r{g.x(k), true};
  for (std::size_t i = 0; i < k; ++i) {
    if (v[i + 1] - v[i] > tol) r.ok = false;
  }
  for (std::size_t i = k; i < g.n_cells(); ++i) {
    if (v[i + 1] - v[i] < -tol) r.ok = false;
  }
  return r;
}

enum class Branch { affine, jump };

inline const char* to_string(Branch b) { return b == Branch::affine ? "affine" : "jump"; }

struct Classification {
  Branch branch = Branch::affine;
  double c_eps = 0.0;
  double c_target_dist = 0.0;
  double c_limit_guess = 0.0;
  double v_min = 1.0;
  /// Contact nonempty and |a1| >= a0: the slope is expected to vanish.
  bool expect_jump = false;
};

inline constexpr double jump_threshold = 0.5;

/// Branch from the depth of the phase-field well (v_min <= 0.5 is a jump;
/// the tie goes to jump). The slope target is reported independently.
inline Classification classify(const CriticalPointReport& report, const ATParams& p,
                               std::optional<double> a0 = std::nullopt) {
  if (!report.converged) throw std::invalid_argument("classify: report not converged");
  Classification c;
  c.v_min = *std::min_element(report.state.v.begin(), report.state.v.end());
  c.branch = c.v_min <= jump_threshold ? Branch::jump : Branch::affine;
  c.c_eps = report.flux.c_eps;
  const double target = p.boundary_value / p.length;
  const double d0 = std::abs(c.c_eps), d1 = std::abs(c.c_eps - target);
  c.c_target_dist = std::min(d0, d1);
  c.c_limit_guess = d0 <= d1 ? 0.0 : target;
  if (a0) c.expect_jump = !report.active.empty() && std::abs(p.boundary_value) >= std::abs(*a0);
  return c;
}

struct SupNormRates {
  double eps_vprime = 0.0;
  double eps_uprime = 0.0;
  double inf_v_over_sqrt_eps = 0.0;
};

inline SupNormRates sup_norm_rates(const CriticalPointReport& report, const ATParams& p, const Grid1D& g) {
  if (!report.converged) throw std::invalid_argument("sup_norm_rates: report not converged");
  SupNormRates r;
  for (double x : derivative(report.state.v, g)) r.eps_vprime = std::max(r.eps_vprime, p.eps * std::abs(x));
  for (double x : report.flux.u_prime) r.eps_uprime = std::max(r.eps_uprime, p.eps * std::abs(x));
  r.inf_v_over_sqrt_eps = *std::min_element(report.state.v.begin(), report.state.v.end()) / std::sqrt(p.eps);
  return r;
}

/// Eight smooth test functions on [0, L], each with sup norm 1: monomials
/// (x/L)^k for k = 0..3 and C-infinity bumps centred at L/5, 2L/5, 3L/5, 4L/5.
inline std::array<std::function<double(double)>, 8> test_panel(double length) {
  auto mono = [length](int k) {
    return std::function<double(double)>([length, k](double x) { return std::pow(x / length, k); });
  };
  auto bump = [length](double centre) {
    const double radius = 0.15 * length;
    return std::function<double(double)>([=](double x) {
      const double r = (x - centre) / radius;
      return std::abs(r) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - r * r)) : 0.0;
    });
  };
  return {mono(0), mono(1), mono(2), mono(3), bump(0.2 * length), bump(0.4 * length), bump(0.6 * length),
          bump(0.8 * length)};
}

/// Midpoint-rule pairings of a cell density with the panel.
inline std::array<double, 8> pair_with_panel(const CellField& density, const Grid1D& g) {
  require_cell(density, g, "pair_with_panel");
  const auto panel = test_panel(g.length());
  std::array<double, 8> out{};
  for (std::size_t k = 0; k < panel.size(); ++k) {
    long double s = 0.0L;
    for (std::size_t c = 0; c < g.n_cells(); ++c) s += static_cast<long double>(density[c]) * panel[k](g.midpoint(c));
    out[k] = static_cast<double>(s * g.spacing());
  }
  return out;
}

/// Elastic density (eta + m_c) u'^2 per cell.
inline CellField elastic_density(const State& s, const ATParams& p, const Grid1D& g) {
  require_state(s, g, "elastic_density");
  const CellField du = derivative(s.u, g);
  const CellField m = cell_mean_square(s.v, g);
  CellField e(g.n_cells());
  for (std::size_t c = 0; c < g.n_cells(); ++c) e[c] = (p.eta + m[c]) * du[c] * du[c];
  return e;
}

/// Pairings of |u'|^2 for a piecewise-affine limit with the panel, by
/// Gauss-Legendre quadrature on each piece.
inline std::array<double, 8> limit_elastic_pairings(const JumpSpec& target) {
  static constexpr std::array<double, 5> node{-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                              0.9061798459386640};
  static constexpr std::array<double, 5> weight{0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                                0.4786286704993665, 0.2369268850561891};
  const auto panel = test_panel(target.length);
  std::array<double, 8> out{};
  constexpr int sub = 64;
  for (std::size_t k = 0; k < panel.size(); ++k) {
    double s = 0.0;
    for (const auto& pc : target.pieces) {
      const double slope2 = pc.slope() * pc.slope();
      if (slope2 == 0.0) continue;
      const double w = (pc.right - pc.left) / sub;
      for (int j = 0; j < sub; ++j) {
        const double mid = pc.left + (j + 0.5) * w;
        for (std::size_t q = 0; q < node.size(); ++q) s += 0.5 * w * weight[q] * slope2 * panel[k](mid + 0.5 * w * node[q]);
      }
    }
    out[k] = s;
  }
  return out;
}

/// max_k |<nu_eps, phi_k> - <nu, phi_k>|; the panel has unit sup norm, so
/// this is already relative to the panel norm.
inline double panel_error(const std::array<double, 8>& a, const std::array<double, 8>& b) {
  double e = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) e = std::max(e, std::abs(a[k] - b[k]));
  return e;
}

}  // namespace atlab

#endif  // ATLAB_DIAGNOSTICS_HPP
