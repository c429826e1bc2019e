#ifndef ATLAB_CRITICAL_HPP
#define ATLAB_CRITICAL_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "atlab/energy.hpp"
#include "atlab/flux.hpp"
#include "atlab/grid.hpp"
#include "atlab/obstacle.hpp"

namespace atlab {

/// Initial phase field for alternate minimisation. The critical points are not
/// unique; the initial v selects the basin.
struct InitStrategy {
  struct UniformOne {};
  /// v = 1 - depth * hat((x - center) / width).
  struct Notch {
    double center = 0.5;
    double width = 0.05;
    double depth = 0.9;
  };
  struct FromState {
    State state;
  };

  std::variant<UniformOne, Notch, FromState> kind = UniformOne{};

  static InitStrategy uniform_one() { return {UniformOne{}}; }
  static InitStrategy notch(double center, double width, double depth) { return {Notch{center, width, depth}}; }
  static InitStrategy from_state(State s) { return {FromState{std::move(s)}}; }

  NodalField initial_v(const Grid1D& g) const {
    if (std::holds_alternative<UniformOne>(kind)) return constant_nodal(g, 1.0);
    if (const auto* n = std::get_if<Notch>(&kind)) {
      if (!(n->center > 0.0 && n->center < g.length()) || !(n->width > 0.0) || !(n->depth >= 0.0 && n->depth < 1.0)) {
        throw std::invalid_argument("InitStrategy: notch parameters out of range");
      }
      NodalField v = sample(g, [&](double x) { return 1.0 - n->depth * std::max(0.0, 1.0 - std::abs(x - n->center) / n->width); });
      v[0] = v[g.n_cells()] = 1.0;
      return v;
    }
    const auto& s = std::get<FromState>(kind).state;
    require_nodal(s.v, g, "InitStrategy");
    return s.v;
  }
};

struct SolveOptions {
  int max_iters = 5000;
  double tol = 1e-10;
  /// Allowed energy increase per half-step (relative to max(1, E)).
  double monotone_slack = 1e-12;
  ObstacleOptions obstacle{};
};

struct CriticalPointReport {
  ATParams params;
  State state;
  FluxSolution flux;
  ObstacleSpec obstacle;
  MultiplierField multiplier;
  ActiveSet active;
  EnergyBreakdown energy;
  LcpResidual lcp;
  double flux_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  bool energy_monotone = true;
  double stationarity_residual = 0.0;
  std::vector<double> energy_history;    ///< after every half-step
  std::vector<double> residual_history;  ///< convergence metric per iteration
};

/// Stationarity certificate of a state for the coupled system at the given
/// obstacle: u from the exact flux solve, v measured against that load.
struct Certificate {
  FluxSolution flux;
  ObstacleSolution lcp;
  double flux_residual = 0.0;
};

inline Certificate certify_state(const NodalField& v, const ObstacleSpec& obs, const ATParams& p, const Grid1D& g,
                                 const ObstacleTolerances& tols = {}) {
  Certificate c;
  c.flux = solve_u(v, p, g);
  c.flux_residual = flux_residual(c.flux.u, v, c.flux.c_eps, p, g);
  CellField load = c.flux.u_prime;
  for (double& s : load) s *= s;
  c.lcp.v = v;
  certify(c.lcp, load, obs, p, g, tols);
  return c;
}

/// Alternate minimisation: v <- argmin over {v <= obstacle} at fixed u, then
/// u <- argmin at fixed v, until the state stops moving and the coupled
/// residuals vanish.
inline CriticalPointReport alternate_minimize(const ATParams& p, const ObstacleSpec& obs, const InitStrategy& init,
                                              const Grid1D& g, const SolveOptions& opts = {}) {
  p.validate();
  obs.validate(g);
  if (std::abs(g.length() - p.length) > 1e-12 * p.length) {
    throw std::invalid_argument("alternate_minimize: grid length differs from params");
  }

  CriticalPointReport rep;
  rep.params = p;
  rep.obstacle = obs;

  NodalField v = init.initial_v(g);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::clamp(std::min(v[i], obs.obstacle[i]), 0.0, 1.0);

  FluxSolution flux = solve_u(v, p, g);
  auto energy_of = [&](const NodalField& vv, const FluxSolution& fl) { return at_energy(State{fl.u, vv}, p, g).total; };
  auto push_energy = [&](double e) {
    if (!rep.energy_history.empty()) {
      const double prev = rep.energy_history.back();
      if (e > prev + opts.monotone_slack * std::max(1.0, std::abs(prev))) rep.energy_monotone = false;
    }
    rep.energy_history.push_back(e);
  };
  push_energy(energy_of(v, flux));

  double metric = 0.0;
  for (int it = 1; it <= opts.max_iters; ++it) {
    CellField load = flux.u_prime;
    for (double& s : load) s *= s;
    ObstacleSolution vs = solve_v(load, obs, p, g, opts.obstacle, &v);
    push_energy(energy_of(vs.v, flux));
    const double change = sup_distance(vs.v, v);
    v = std::move(vs.v);
    flux = solve_u(v, p, g);
    push_energy(energy_of(v, flux));

    const Certificate cert = certify_state(v, obs, p, g, opts.obstacle.tols);
    metric = std::max({change, cert.flux_residual, cert.lcp.residual.max()});
    rep.residual_history.push_back(metric);
    rep.iterations = it;
    if (metric <= opts.tol) {
      rep.converged = true;
      break;
    }
  }

  const Certificate cert = certify_state(v, obs, p, g, opts.obstacle.tols);
  rep.flux = cert.flux;
  rep.state = State{cert.flux.u, v};
  rep.multiplier = cert.lcp.multiplier;
  rep.active = cert.lcp.active;
  rep.lcp = cert.lcp.residual;
  rep.flux_residual = cert.flux_residual;
  rep.stationarity_residual = std::max(cert.flux_residual, cert.lcp.residual.max());
  rep.energy = at_energy(rep.state, p, g);
  return rep;
}

/// Time 0: no irreversibility constraint beyond v <= 1.
inline CriticalPointReport solve_time0(const ATParams& p, const InitStrategy& init, const Grid1D& g,
                                       const SolveOptions& opts = {}) {
  auto rep = alternate_minimize(p, ObstacleSpec::unconstrained(g), init, g, opts);
  if (rep.converged) {
    for (std::size_t i : rep.active.free_indices) {
      if (std::abs(rep.multiplier.mu[i]) > opts.obstacle.tols.mu) {
        throw std::logic_error("solve_time0: nonzero multiplier on the free set");
      }
    }
  }
  return rep;
}

/// Time 1: the obstacle is the time-0 phase field.
inline CriticalPointReport solve_time1(const ATParams& p1, const CriticalPointReport& time0, const InitStrategy& init,
                                       const Grid1D& g, const SolveOptions& opts = {}) {
  if (!time0.converged) throw std::invalid_argument("solve_time1: time-0 report not converged");
  const auto& p0 = time0.params;
  if (p0.eps != p1.eps || p0.eta != p1.eta || p0.length != p1.length) {
    throw std::invalid_argument("solve_time1: eps, eta and L must match the time-0 problem");
  }
  return alternate_minimize(p1, ObstacleSpec{time0.state.v}, init, g, opts);
}

struct ChainOptions {
  InitStrategy first = InitStrategy::uniform_one();
  /// Init for later steps; unset means continue from the previous state.
  std::optional<InitStrategy> later;
};

struct ChainResult {
  std::vector<CriticalPointReport> steps;
  bool truncated = false;
};

/// Quasi-static chain: step t uses the phase field of step t-1 as obstacle.
inline ChainResult evolve_chain(const std::vector<double>& schedule, const ATParams& p, const Grid1D& g,
                                const SolveOptions& opts = {}, const ChainOptions& chain = {}) {
  if (schedule.empty()) throw std::invalid_argument("evolve_chain: empty schedule");
  ChainResult out;
  out.steps.push_back(solve_time0(p.with_boundary(schedule.front()), chain.first, g, opts));
  if (!out.steps.back().converged) {
    out.truncated = true;
    return out;
  }
  for (std::size_t t = 1; t < schedule.size(); ++t) {
    const auto& prev = out.steps.back();
    InitStrategy init = chain.later ? *chain.later : InitStrategy::from_state(prev.state);
    auto rep = alternate_minimize(p.with_boundary(schedule[t]), ObstacleSpec{prev.state.v}, init, g, opts);
    const bool ok = rep.converged;
    out.steps.push_back(std::move(rep));
    if (!ok) {
      out.truncated = true;
      break;
    }
  }
  return out;
}

}  // namespace atlab

#endif  // ATLAB_CRITICAL_HPP
