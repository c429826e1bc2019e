#ifndef ATLAB_RECOVERY_HPP
#define ATLAB_RECOVERY_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "atlab/critical.hpp"
#include "atlab/diagnostics.hpp"
#include "atlab/energy.hpp"
#include "atlab/grid.hpp"
#include "atlab/schedule.hpp"

namespace atlab {

/// Level parameters of the cut-off construction.
struct RecoveryScales {
  double alpha = 0.0;  ///< sqrt(eta eps), half-width of the w-plateau
  double r = 0.0;      ///< (eta/eps)^(1/4)
  double s = 0.0;      ///< 2 r
  double t = 0.0;      ///< sqrt(s)
  double k = 0.0;      ///< t / s

  static RecoveryScales of(const ATParams& p) {
    RecoveryScales sc;
    sc.alpha = std::sqrt(p.eta * p.eps);
    sc.r = std::pow(p.eta / p.eps, 0.25);
    sc.s = 2.0 * sc.r;
    sc.t = std::sqrt(sc.s);
    sc.k = sc.t / sc.s;
    return sc;
  }
};

struct RecoveryIntermediates {
  double alpha_eps = 0.0;
  double r_eps = 0.0, s_eps = 0.0, t_eps = 0.0, k_eps = 0.0;
  NodalField w, z, w1, w2, phi;
  std::pair<double, double> interval_endpoints{0.0, 0.0};
  bool cutoff_degenerate = false;
  bool under_resolved = false;  ///< plateau half-width below two cells
};

/// Optimal profile h(t) = 1 - exp(-(t - alpha)/eps).
inline double optimal_profile(double t, double alpha, double eps) { return 1.0 - std::exp(-(t - alpha) / eps); }

struct Profiles {
  NodalField w;
  NodalField z;
  bool under_resolved = false;
};

/// w = 0 within alpha of the new jumps J_u \ Gamma_0 and h(d) beyond;
/// z = 0 within alpha/2, the linear ramp (2d/alpha - 1) u up to alpha, u
/// beyond. With no new jumps the distance is +infinity: w = 1, z = u.
inline Profiles build_profiles(const JumpSpec& target, const ATParams& p, const Grid1D& g) {
  const double alpha = std::sqrt(p.eta * p.eps);
  const std::vector<double> jumps = target.new_jumps(jump_tolerance(target));
  Profiles out{NodalField(g.node_count()), NodalField(g.node_count()), alpha < 2.0 * g.spacing() && !jumps.empty()};
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const double x = g.x(i);
    double d = std::numeric_limits<double>::infinity();
    for (double y : jumps) d = std::min(d, std::abs(x - y));
    const double u = target.u_at(x);
    if (d <= alpha) {
      out.w[i] = 0.0;
    } else {
      out.w[i] = std::isinf(d) ? 1.0 : optimal_profile(d, alpha, p.eps);
    }
    if (d <= 0.5 * alpha) {
      out.z[i] = 0.0;
    } else if (d <= alpha) {
      out.z[i] = (2.0 * d / alpha - 1.0) * u;
    } else {
      out.z[i] = u;
    }
  }
  return out;
}

struct Cutoff {
  NodalField phi;
  std::pair<double, double> interval{0.0, 0.0};
  bool degenerate = false;
  std::size_t pieces = 0;
  std::vector<double> piece_mass;  ///< int eps|v0'|^2 over the preimage of each piece
  std::size_t selected = 0;
};

/// Cut-off phi = min((v0 - a)^+/(b - a), 1) where [a, b] is the piece of
/// [r, s] (split into floor(((eta/eps)/(s - r)^2)^(-1/2)) equal pieces)
/// carrying the least gradient mass of v0. A cell belongs to a piece when
/// the mean of v0 over the cell lies in it.
inline Cutoff build_cutoff(const NodalField& v0, const ATParams& p, const Grid1D& g) {
  require_nodal(v0, g, "build_cutoff");
  const RecoveryScales sc = RecoveryScales::of(p);
  Cutoff out;
  const double vmin = *std::min_element(v0.begin(), v0.end());
  if (!(vmin < sc.s)) {
    out.phi = constant_nodal(g, 1.0);
    out.interval = {sc.s, sc.s};
    out.degenerate = true;
    return out;
  }
  const double width = sc.s - sc.r;
  out.pieces = static_cast<std::size_t>(std::floor(std::pow((p.eta / p.eps) / (width * width), -0.5)));
  out.pieces = std::max<std::size_t>(out.pieces, 1);
  const double step = width / static_cast<double>(out.pieces);
  out.piece_mass.assign(out.pieces, 0.0);
  const double h = g.spacing();
  for (std::size_t c = 0; c < g.n_cells(); ++c) {
    const double m = 0.5 * (v0[c] + v0[c + 1]);
    if (m < sc.r || m >= sc.s) continue;
    const auto j = std::min(out.pieces - 1, static_cast<std::size_t>((m - sc.r) / step));
    const double dv = (v0[c + 1] - v0[c]) / h;
    out.piece_mass[j] += p.eps * dv * dv * h;
  }
  out.selected = static_cast<std::size_t>(std::min_element(out.piece_mass.begin(), out.piece_mass.end()) -
                                          out.piece_mass.begin());
  const double a = sc.r + step * static_cast<double>(out.selected);
  const double b = out.selected + 1 == out.pieces ? sc.s : a + step;
  out.interval = {a, b};
  out.phi = NodalField(g.node_count());
  for (std::size_t i = 0; i < g.node_count(); ++i) out.phi[i] = std::min(std::max(v0[i] - a, 0.0) / (b - a), 1.0);
  return out;
}

/// w2 = v0 above t, the steeper line k/(k-1)(v0 - t) + t on [s, t], 0 below s.
/// Once s >= 1 (eta/eps >= 1/16) every value of v0 falls in the bottom branch.
inline NodalField build_w2(const NodalField& v0, const ATParams& p, const Grid1D& g) {
  require_nodal(v0, g, "build_w2");
  const RecoveryScales sc = RecoveryScales::of(p);
  NodalField w2(g.node_count());
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const double x = v0[i];
    if (x >= sc.t) {
      w2[i] = x;
    } else if (x >= sc.s) {
      w2[i] = sc.k / (sc.k - 1.0) * (x - sc.t) + sc.t;
    } else {
      w2[i] = 0.0;
    }
  }
  return w2;
}

/// Upper bound on the Modica mass gained by replacing v0 with w2, given the
/// Modica mass C of v0.
inline double w2_modica_bound(const ATParams& p, double modica_v0) {
  const RecoveryScales sc = RecoveryScales::of(p);
  const double k = sc.k, t = sc.t;
  return modica_v0 * (2.0 * k / ((k - 1.0) * (k - 1.0)) + 2.0 * t / ((k - 1.0) * (1.0 - t) * (1.0 - t)) +
                      2.0 * t / ((1.0 - t) * (1.0 - t)));
}

/// Recovery state v = min(w, v0, w2), u = phi z with exact Dirichlet data.
/// Gamma_0 must match the branch of the time-0 phase field: empty for an
/// affine v0, nonempty for a cracked one.
inline std::pair<State, RecoveryIntermediates> assemble_recovery(const JumpSpec& target,
                                                                 const CriticalPointReport& time0,
                                                                 const ATParams& p, const Grid1D& g) {
  if (!time0.converged) throw std::invalid_argument("assemble_recovery: time-0 report not converged");
  const NodalField& v0 = time0.state.v;
  require_nodal(v0, g, "assemble_recovery");
  const double vmin = *std::min_element(v0.begin(), v0.end());
  const bool cracked = vmin <= jump_threshold;
  if (cracked == target.gamma0.empty()) {
    throw std::invalid_argument("assemble_recovery: Gamma_0 does not match the branch of the time-0 state");
  }
  const RecoveryScales sc = RecoveryScales::of(p);
  RecoveryIntermediates im;
  im.alpha_eps = sc.alpha;
  im.r_eps = sc.r;
  im.s_eps = sc.s;
  im.t_eps = sc.t;
  im.k_eps = sc.k;

  Profiles pr = build_profiles(target, p, g);
  im.w = std::move(pr.w);
  im.z = std::move(pr.z);
  im.under_resolved = pr.under_resolved;
  im.w1 = NodalField(g.node_count());
  for (std::size_t i = 0; i < g.node_count(); ++i) im.w1[i] = std::min(im.w[i], v0[i]);
  im.w2 = build_w2(v0, p, g);
  Cutoff cut = build_cutoff(v0, p, g);
  im.phi = std::move(cut.phi);
  im.interval_endpoints = cut.interval;
  im.cutoff_degenerate = cut.degenerate;

  State s{NodalField(g.node_count()), NodalField(g.node_count())};
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    s.v[i] = std::min(im.w1[i], im.w2[i]);
    s.u[i] = im.phi[i] * im.z[i];
  }
  const std::size_t n = g.n_cells();
  s.u[0] = 0.0;
  s.u[n] = target.u_at(g.length());
  s.v[0] = std::min(1.0, v0[0]);
  s.v[n] = std::min(1.0, v0[n]);
  return {std::move(s), std::move(im)};
}

struct RecoveryConfig {
  double length = 1.0;
  double a0 = 0.5;  ///< time-0 boundary datum
  InitStrategy init0 = InitStrategy::uniform_one();
  EtaRule eta = EtaRule::eps_squared();
  CellRule cells = CellRule::proportional();
  SolveOptions solve{};
};

struct RecoveryRow {
  double eps = 0.0;
  double eta = 0.0;
  std::size_t n = 0;
  double energy = 0.0;
  double ms = 0.0;
  double gap = 0.0;
  double l2_v = 0.0;  ///< ||v - 1||_L2
  double l2_u = 0.0;  ///< ||u - target||_L2
  bool compliant = true;
  bool under_resolved = false;
  bool degenerate_cutoff = false;
  double w2_modica_increase = 0.0;
  double w2_bound = 0.0;
};

/// Energy of the assembled recovery against the limit energy, per eps.
inline std::vector<RecoveryRow> gamma_limsup_table(const JumpSpec& target, const std::vector<double>& eps_list,
                                                   const RecoveryConfig& cfg) {
  if (eps_list.empty()) throw std::invalid_argument("gamma_limsup_table: empty eps list");
  for (std::size_t k = 1; k < eps_list.size(); ++k) {
    if (!(eps_list[k] < eps_list[k - 1])) throw std::invalid_argument("gamma_limsup_table: eps list must decrease");
  }
  const double ms = ms_energy(target);
  std::vector<RecoveryRow> rows;
  for (double eps : eps_list) {
    RecoveryRow row;
    row.eps = eps;
    row.eta = cfg.eta(eps);
    row.n = cfg.cells(eps, cfg.length);
    const Grid1D g = make_grid(cfg.length, row.n);
    const ATParams p0{eps, row.eta, cfg.length, cfg.a0};
    const CriticalPointReport r0 = solve_time0(p0, cfg.init0, g, cfg.solve);
    if (!r0.converged) throw SolverFailure("gamma_limsup_table: time-0 solve did not converge", r0.stationarity_residual);
    const ATParams p = p0.with_boundary(target.u_at(cfg.length));
    auto [s, im] = assemble_recovery(target, r0, p, g);
    row.energy = at_energy(s, p, g).total;
    row.ms = ms;
    row.gap = row.energy - ms;
    row.l2_v = l2_distance(s.v, constant_nodal(g, 1.0), g);
    row.l2_u = l2_distance(s.u, sample(g, [&](double x) { return target.u_at(x); }), g);
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      if (s.v[i] > r0.state.v[i]) row.compliant = false;
    }
    row.under_resolved = im.under_resolved;
    row.degenerate_cutoff = im.cutoff_degenerate;
    const EnergyBreakdown e0 = at_energy(State{r0.state.u, r0.state.v}, p0, g);
    const EnergyBreakdown e2 = at_energy(State{r0.state.u, im.w2}, p0, g);
    row.w2_modica_increase = e2.modica() - e0.modica();
    row.w2_bound = w2_modica_bound(p, e0.modica());
    rows.push_back(row);
  }
  return rows;
}

}  // namespace atlab

#endif  // ATLAB_RECOVERY_HPP
