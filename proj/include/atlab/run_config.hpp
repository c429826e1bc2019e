#ifndef ATLAB_RUN_CONFIG_HPP
#define ATLAB_RUN_CONFIG_HPP

#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "atlab/recovery.hpp"
#include "atlab/sweep.hpp"

namespace atlab {

/// Recovery table request: a limit profile plus the per-eps time-0 solves.
struct RecoveryRunConfig {
  std::string name = "recovery";
  JumpSpec target = JumpSpec::affine(1.0, 0.6);
  std::vector<double> eps_list{0.05, 0.025, 0.0125, 0.00625, 0.005};
  RecoveryConfig recovery{};
  std::string out_dir = ".";
};

/// Quasi-static chain request.
struct EvolveRunConfig {
  std::string name = "evolve";
  double length = 1.0;
  double eps = 0.05;
  EtaRule eta = EtaRule::eps_squared();
  CellRule cells = CellRule::proportional();
  std::vector<double> schedule{0.5, 1.0, 2.0};
  InitChoice first{InitChoice::Kind::uniform_one, {}};
  std::optional<InitChoice> later;
  double tol = 1e-10;
  int max_iters = 5000;
  std::string out_dir = ".";
};

namespace detail {

inline nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  if (!j.contains("schema_version") || j.at("schema_version") != sweep_schema_version) {
    throw ConfigError("missing or unsupported schema_version");
  }
  return j;
}

inline JumpSpec target_from_json(const nlohmann::json& j, double length) {
  const std::string kind = j.at("kind").get<std::string>();
  const auto gamma0 = j.value("gamma0", std::vector<double>{});
  for (double x : gamma0) {
    if (!(x > 0.0 && x < length)) throw ConfigError("gamma0 points must lie inside (0, L)");
  }
  const double a = j.at("a").get<double>();
  if (kind == "affine") return JumpSpec::affine(length, a, gamma0);
  if (kind == "step") {
    const double x = j.value("x_jump", 0.5 * length);
    if (!(x > 0.0 && x < length)) throw ConfigError("x_jump must lie inside (0, L)");
    return JumpSpec::step(length, a, x, gamma0);
  }
  throw ConfigError("unknown target kind '" + kind + "'");
}

}  // namespace detail

inline RecoveryRunConfig recovery_config_from_json(const nlohmann::json& j) {
  RecoveryRunConfig c;
  try {
    c.name = j.value("name", c.name);
    c.recovery.length = j.value("L", c.recovery.length);
    if (!(c.recovery.length > 0.0)) throw ConfigError("L must be positive");
    c.recovery.a0 = j.value("a0", c.recovery.a0);
    c.target = detail::target_from_json(j.at("target"), c.recovery.length);
    if (j.contains("eps_list")) c.eps_list = j.at("eps_list").get<std::vector<double>>();
    if (j.contains("eta_rule")) c.recovery.eta = detail::eta_from_json(j.at("eta_rule"));
    if (j.contains("n_cells")) c.recovery.cells = detail::cells_from_json(j.at("n_cells"));
    if (j.contains("init0")) {
      const InitChoice init = detail::init_from_json(j.at("init0"));
      if (init.kind == InitChoice::Kind::from_time0) throw ConfigError("init0 cannot continue from time 0");
      c.recovery.init0 = init.resolve(nullptr);
    }
    if (j.contains("solver")) {
      c.recovery.solve.tol = j.at("solver").value("tol", c.recovery.solve.tol);
      c.recovery.solve.max_iters = j.at("solver").value("max_iters", c.recovery.solve.max_iters);
    }
    if (j.contains("output")) c.out_dir = j.at("output").value("dir", c.out_dir);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed recovery config: ") + e.what());
  }
  if (c.eps_list.empty()) throw ConfigError("eps_list is empty");
  for (std::size_t k = 0; k < c.eps_list.size(); ++k) {
    if (!(c.eps_list[k] > 0.0)) throw ConfigError("eps values must be positive");
    if (k > 0 && !(c.eps_list[k] < c.eps_list[k - 1])) throw ConfigError("eps_list must be strictly decreasing");
    const double eta = c.recovery.eta(c.eps_list[k]);
    if (!(eta > 0.0 && eta < c.eps_list[k])) throw ConfigError("eta rule gives eta outside (0, eps)");
  }
  return c;
}

inline EvolveRunConfig evolve_config_from_json(const nlohmann::json& j) {
  EvolveRunConfig c;
  try {
    c.name = j.value("name", c.name);
    c.length = j.value("L", c.length);
    c.eps = j.at("eps").get<double>();
    if (j.contains("eta_rule")) c.eta = detail::eta_from_json(j.at("eta_rule"));
    if (j.contains("n_cells")) c.cells = detail::cells_from_json(j.at("n_cells"));
    c.schedule = j.at("schedule").get<std::vector<double>>();
    if (j.contains("init0")) c.first = detail::init_from_json(j.at("init0"));
    if (j.contains("init")) c.later = detail::init_from_json(j.at("init"));
    if (j.contains("solver")) {
      c.tol = j.at("solver").value("tol", c.tol);
      c.max_iters = j.at("solver").value("max_iters", c.max_iters);
    }
    if (j.contains("output")) c.out_dir = j.at("output").value("dir", c.out_dir);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed evolve config: ") + e.what());
  }
  if (!(c.length > 0.0) || !(c.eps > 0.0)) throw ConfigError("L and eps must be positive");
  const double eta = c.eta(c.eps);
  if (!(eta > 0.0 && eta < c.eps)) throw ConfigError("eta rule gives eta outside (0, eps)");
  if (c.schedule.empty()) throw ConfigError("schedule is empty");
  if (c.first.kind == InitChoice::Kind::from_time0) throw ConfigError("init0 cannot continue from time 0");
  return c;
}

/// Record thresholds for `check`, from the optional "check" block of a sweep
/// config. Geometry and loads come from the sweep itself.
inline CheckCriteria check_criteria_from_json(const nlohmann::json& j, const SweepConfig& cfg) {
  CheckCriteria cr;
  cr.length = cfg.length;
  cr.a0 = cfg.a0;
  cr.a1 = cfg.a1;
  if (!j.contains("check")) return cr;
  try {
    const auto& c = j.at("check");
    cr.expected_branch = c.value("expected_branch", cr.expected_branch);
    cr.residual_tol = c.value("residual_tol", cr.residual_tol);
    cr.defect_ratio = c.value("defect_ratio", cr.defect_ratio);
    cr.slope_tol = c.value("slope_tol", cr.slope_tol);
    cr.mass_rate_min = c.value("mass_rate_min", cr.mass_rate_min);
    cr.mass_rate_points = c.value("mass_rate_points", cr.mass_rate_points);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed check block: ") + e.what());
  }
  if (!cr.expected_branch.empty() && cr.expected_branch != "affine" && cr.expected_branch != "jump") {
    throw ConfigError("expected_branch must be affine or jump");
  }
  return cr;
}

inline std::pair<SweepConfig, CheckCriteria> load_check_config(const std::string& path) {
  const nlohmann::json j = detail::read_json(path);
  SweepConfig cfg = sweep_config_from_json(j);
  return {cfg, check_criteria_from_json(j, cfg)};
}

inline RecoveryRunConfig load_recovery_config(const std::string& path) {
  return recovery_config_from_json(detail::read_json(path));
}

inline EvolveRunConfig load_evolve_config(const std::string& path) {
  return evolve_config_from_json(detail::read_json(path));
}

/// Runs the chain described by `c`. The later-step init, when given, may
/// not continue from time 0 by name; it continues from the previous step.
inline ChainResult run_evolve(const EvolveRunConfig& c) {
  const Grid1D g = make_grid(c.length, c.cells(c.eps, c.length));
  const ATParams p{c.eps, c.eta(c.eps), c.length, c.schedule.front()};
  SolveOptions opts;
  opts.tol = c.tol;
  opts.max_iters = c.max_iters;
  ChainOptions chain;
  chain.first = c.first.resolve(nullptr);
  if (c.later && c.later->kind != InitChoice::Kind::from_time0) chain.later = c.later->resolve(nullptr);
  return evolve_chain(c.schedule, p, g, opts, chain);
}

/// Gap trend for a recovery table: positive and strictly decreasing, the
/// final gap within `final_tol`, every recovery under its obstacle.
inline CheckReport check_recovery(const std::vector<RecoveryRow>& rows, double final_tol) {
  using detail::fmt;
  if (rows.empty()) throw std::invalid_argument("check_recovery: empty table");
  CheckReport rep;
  CheckItem gaps{"gap_trend", true, ""};
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (!(rows[k].gap > 0.0)) gaps.pass = false;
    if (k > 0 && !(rows[k].gap < rows[k - 1].gap)) gaps.pass = false;
  }
  if (!(rows.back().gap <= final_tol)) gaps.pass = false;
  gaps.detail = "gap " + fmt(rows.front().gap) + " -> " + fmt(rows.back().gap) + " (final tol " + fmt(final_tol) + ")";
  rep.items.push_back(gaps);
  CheckItem comp{"compliance", true, ""};
  for (const auto& r : rows) comp.pass = comp.pass && r.compliant;
  comp.detail = comp.pass ? "v <= obstacle at every node" : "obstacle exceeded";
  rep.items.push_back(comp);
  return rep;
}

/// Final-gap tolerance by target kind: looser for targets with a jump.
inline double recovery_final_tol(const JumpSpec& target) { return target.jump_points.empty() ? 0.05 : 0.2; }

inline std::string recovery_csv(const std::vector<RecoveryRow>& rows) {
  using detail::num;
  std::ostringstream os;
  os << "eps,eta,n,energy,ms,gap,l2_v,l2_u,compliant,under_resolved,degenerate_cutoff,w2_modica_increase,w2_bound\n";
  for (const auto& r : rows) {
    os << num(r.eps) << ',' << num(r.eta) << ',' << r.n << ',' << num(r.energy) << ',' << num(r.ms) << ','
       << num(r.gap) << ',' << num(r.l2_v) << ',' << num(r.l2_u) << ',' << (r.compliant ? 1 : 0) << ','
       << (r.under_resolved ? 1 : 0) << ',' << (r.degenerate_cutoff ? 1 : 0) << ',' << num(r.w2_modica_increase)
       << ',' << num(r.w2_bound) << '\n';
  }
  return os.str();
}

/// Per step: boundary value, energy, minimum of v, whether v_t <= v_{t-1}
/// held exactly at every node.
struct ChainStepSummary {
  double boundary = 0.0;
  double energy = 0.0;
  double v_min = 1.0;
  bool converged = false;
  bool monotone = true;
};

inline std::vector<ChainStepSummary> summarize_chain(const ChainResult& chain) {
  std::vector<ChainStepSummary> out;
  for (std::size_t t = 0; t < chain.steps.size(); ++t) {
    const auto& s = chain.steps[t];
    ChainStepSummary c;
    c.boundary = s.params.boundary_value;
    c.energy = s.energy.total;
    c.v_min = *std::min_element(s.state.v.begin(), s.state.v.end());
    c.converged = s.converged;
    if (t > 0) {
      const auto& prev = chain.steps[t - 1].state.v;
      for (std::size_t i = 0; i < prev.size(); ++i) {
        if (s.state.v[i] > prev[i]) c.monotone = false;
      }
    }
    out.push_back(c);
  }
  return out;
}

}  // namespace atlab

#endif  // ATLAB_RUN_CONFIG_HPP
