#ifndef ATLAB_SWEEP_HPP
#define ATLAB_SWEEP_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <future>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "atlab/critical.hpp"
#include "atlab/diagnostics.hpp"
#include "atlab/errors.hpp"
#include "atlab/schedule.hpp"

namespace atlab {

inline constexpr int sweep_schema_version = 1;

/// Raised for malformed or inconsistent configuration files.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Init choice as it appears in a config; `from_time0` continues from the
/// time-0 state of the same eps.
struct InitChoice {
  enum class Kind { uniform_one, notch, from_time0 };
  Kind kind = Kind::from_time0;
  InitStrategy::Notch notch{};

  InitStrategy resolve(const CriticalPointReport* time0) const {
    switch (kind) {
      case Kind::uniform_one: return InitStrategy::uniform_one();
      case Kind::notch: return InitStrategy::notch(notch.center, notch.width, notch.depth);
      case Kind::from_time0:
        if (time0 == nullptr) throw ConfigError("init from_time0 has no time-0 state to continue from");
        return InitStrategy::from_state(time0->state);
    }
    return InitStrategy::uniform_one();
  }
};

struct SweepConfig {
  int schema_version = sweep_schema_version;
  std::string name = "sweep";
  double length = 1.0;
  double a0 = 0.5;
  double a1 = 0.6;
  std::vector<double> eps_list{0.1, 0.05, 0.025, 0.0125};
  EtaRule eta = EtaRule::eps_squared();
  CellRule cells = CellRule::proportional();
  InitChoice init0{InitChoice::Kind::uniform_one, {}};
  InitChoice init{InitChoice::Kind::from_time0, {}};
  double delta = 0.1;  ///< outside-mass radius; 0.1 L when left at the default
  double tol = 1e-10;
  int max_iters = 5000;
  std::string out_dir = ".";
  std::vector<std::string> formats{"csv"};
  bool profiles = false;
  int parallel = 1;

  void validate() const {
    if (schema_version != sweep_schema_version) {
      throw ConfigError("unsupported schema_version " + std::to_string(schema_version));
    }
    if (!(length > 0.0)) throw ConfigError("L must be positive");
    if (eps_list.empty()) throw ConfigError("eps_list is empty");
    for (std::size_t k = 0; k < eps_list.size(); ++k) {
      if (!(eps_list[k] > 0.0)) throw ConfigError("eps values must be positive");
      if (k > 0 && !(eps_list[k] < eps_list[k - 1])) throw ConfigError("eps_list must be strictly decreasing");
      const double eta_k = eta(eps_list[k]);
      if (!(eta_k > 0.0 && eta_k < eps_list[k])) throw ConfigError("eta rule gives eta outside (0, eps)");
    }
    if (!(delta > 0.0 && delta < 0.25 * length)) throw ConfigError("delta must lie in (0, L/4)");
    if (!(tol > 0.0) || max_iters < 1) throw ConfigError("solver tolerance and budget must be positive");
    if (parallel < 1) throw ConfigError("parallel must be at least 1");
    for (const auto& f : formats) {
      if (f != "csv" && f != "json" && f != "svg") throw ConfigError("unknown output format '" + f + "'");
    }
  }

  SolveOptions solve_options() const {
    SolveOptions o;
    o.tol = tol;
    o.max_iters = max_iters;
    return o;
  }
};

// ---------------------------------------------------------------- config I/O

namespace detail {

inline InitChoice init_from_json(const nlohmann::json& j) {
  InitChoice c;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "uniform_one") {
    c.kind = InitChoice::Kind::uniform_one;
  } else if (kind == "notch") {
    c.kind = InitChoice::Kind::notch;
    c.notch.center = j.value("center", c.notch.center);
    c.notch.width = j.value("width", c.notch.width);
    c.notch.depth = j.value("depth", c.notch.depth);
  } else if (kind == "from_time0" || kind == "from_state") {
    c.kind = InitChoice::Kind::from_time0;
  } else {
    throw ConfigError("unknown init kind '" + kind + "'");
  }
  return c;
}

inline nlohmann::json init_to_json(const InitChoice& c) {
  switch (c.kind) {
    case InitChoice::Kind::uniform_one: return {{"kind", "uniform_one"}};
    case InitChoice::Kind::notch:
      return {{"kind", "notch"}, {"center", c.notch.center}, {"width", c.notch.width}, {"depth", c.notch.depth}};
    case InitChoice::Kind::from_time0: return {{"kind", "from_time0"}};
  }
  return {};
}

inline EtaRule eta_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "eps_squared") return EtaRule::eps_squared();
    throw ConfigError("unknown eta_rule '" + j.get<std::string>() + "'");
  }
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "eps_squared") return EtaRule::eps_squared();
  if (kind == "eps_pow") return EtaRule::eps_pow(j.at("p").get<double>());
  if (kind == "fixed") return EtaRule::fixed(j.at("value").get<double>());
  throw ConfigError("unknown eta_rule kind '" + kind + "'");
}

inline nlohmann::json eta_to_json(const EtaRule& r) {
  switch (r.kind) {
    case EtaRule::Kind::eps_squared: return {{"kind", "eps_squared"}};
    case EtaRule::Kind::eps_pow: return {{"kind", "eps_pow"}, {"p", r.value}};
    case EtaRule::Kind::fixed: return {{"kind", "fixed"}, {"value", r.value}};
  }
  return {};
}

inline CellRule cells_from_json(const nlohmann::json& j) {
  if (j.is_number_integer()) {
    const auto n = j.get<long long>();
    if (n < 2) throw ConfigError("n_cells must be at least 2");
    return CellRule::fixed_count(static_cast<std::size_t>(n));
  }
  if (j.is_object()) {
    const std::string rule = j.value("rule", std::string("proportional"));
    if (rule != "proportional") throw ConfigError("unknown n_cells rule '" + rule + "'");
    const auto min_cells = j.value("min", 2048LL);
    if (min_cells < 2) throw ConfigError("n_cells.min must be at least 2");
    return CellRule::proportional(static_cast<std::size_t>(min_cells), j.value("per_eps", 32.0));
  }
  throw ConfigError("n_cells must be an integer or a rule object");
}

inline nlohmann::json cells_to_json(const CellRule& r) {
  if (r.fixed > 0) return r.fixed;
  return {{"rule", "proportional"}, {"min", r.min_cells}, {"per_eps", r.per_eps}};
}

}  // namespace detail

inline SweepConfig sweep_config_from_json(const nlohmann::json& j) {
  SweepConfig c;
  try {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    if (!j.contains("schema_version")) throw ConfigError("missing schema_version");
    c.schema_version = j.at("schema_version").get<int>();
    c.name = j.value("name", c.name);
    c.length = j.value("L", c.length);
    c.a0 = j.value("a0", c.a0);
    c.a1 = j.value("a1", c.a1);
    if (j.contains("eps_list")) c.eps_list = j.at("eps_list").get<std::vector<double>>();
    if (j.contains("eta_rule")) c.eta = detail::eta_from_json(j.at("eta_rule"));
    if (j.contains("n_cells")) c.cells = detail::cells_from_json(j.at("n_cells"));
    if (j.contains("init0")) c.init0 = detail::init_from_json(j.at("init0"));
    if (j.contains("init")) c.init = detail::init_from_json(j.at("init"));
    c.delta = j.value("delta", 0.1 * c.length);
    if (j.contains("solver")) {
      c.tol = j.at("solver").value("tol", c.tol);
      c.max_iters = j.at("solver").value("max_iters", c.max_iters);
    }
    if (j.contains("output")) {
      const auto& o = j.at("output");
      c.out_dir = o.value("dir", c.out_dir);
      if (o.contains("formats")) c.formats = o.at("formats").get<std::vector<std::string>>();
      c.profiles = o.value("profiles", c.profiles);
    }
    c.parallel = j.value("parallel", c.parallel);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  if (c.init0.kind == InitChoice::Kind::from_time0) throw ConfigError("init0 cannot continue from time 0");
  c.validate();
  return c;
}

inline nlohmann::json to_json(const SweepConfig& c) {
  return {{"schema_version", c.schema_version},
          {"name", c.name},
          {"L", c.length},
          {"a0", c.a0},
          {"a1", c.a1},
          {"eps_list", c.eps_list},
          {"eta_rule", detail::eta_to_json(c.eta)},
          {"n_cells", detail::cells_to_json(c.cells)},
          {"init0", detail::init_to_json(c.init0)},
          {"init", detail::init_to_json(c.init)},
          {"delta", c.delta},
          {"solver", {{"tol", c.tol}, {"max_iters", c.max_iters}}},
          {"output", {{"dir", c.out_dir}, {"formats", c.formats}, {"profiles", c.profiles}}},
          {"parallel", c.parallel}};
}

inline SweepConfig load_sweep_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return sweep_config_from_json(j);
}

// ------------------------------------------------------------------- records

/// One CSV row.
struct SweepRecord {
  double eps = 0.0;
  double eta = 0.0;
  std::size_t n = 0;
  double c0_eps = 0.0;
  double c_eps = 0.0;
  double x_eps = 0.0;
  double v_min = 0.0;
  double alpha_est = 0.0;
  double equi_defect = 0.0;
  double mass_total = 0.0;
  double mass_outside = 0.0;
  std::string branch = "affine";
  double contact_fraction = 0.0;
  int iters = 0;
  double residual = 0.0;
  double energy_total = 0.0;

  bool operator==(const SweepRecord&) const = default;
};

inline constexpr const char* csv_header =
    "eps,eta,n,c0_eps,c_eps,x_eps,v_min,alpha_est,equi_defect,mass_total,mass_outside,branch,contact_fraction,iters,"
    "residual,energy_total";

/// Everything measured for one eps beyond the CSV columns.
struct SweepRow {
  SweepRecord record;
  std::string status = "ok";  ///< ok | not_converged | solver_failure
  bool converged = false;
  bool energy_flag = false;  ///< total energy above twice the first row's
  bool energy_monotone = true;
  double flux_residual = 0.0;
  LcpResidual lcp{};
  double time0_residual = 0.0;
  bool shape_ok = false;
  double discrepancy_sign_violation = 0.0;
  double discrepancy_spread = 0.0;  ///< relative to max |d|
  double discrepancy_max = 0.0;
  double mu_max = 0.0;
  double mu_error = 0.0;          ///< interior contact nodes
  double mu_error_all = 0.0;      ///< every contact node
  double mu_forms_gap = 0.0;      ///< relative, interior contact nodes
  double panel_error = 0.0;       ///< elastic density vs the branch limit
  double telescoping_alpha = 0.0;
  SupNormRates rates{};
  bool slope_bound_ok = true;     ///< |c| <= c0 + 1e-10 when contact is nonempty
  bool expect_jump = false;
  double max_obstacle_violation = 0.0;
  double min_v = 0.0;
  double h = 0.0;
  std::optional<State> state;
  std::optional<NodalField> discrepancy_profile;
  std::optional<NodalField> mu_profile;
};

namespace detail {

inline SweepRow run_row(const SweepConfig& cfg, double eps) {
  SweepRow row;
  SweepRecord& r = row.record;
  r.eps = eps;
  r.eta = cfg.eta(eps);
  r.n = cfg.cells(eps, cfg.length);
  const Grid1D g = make_grid(cfg.length, r.n);
  row.h = g.spacing();
  const ATParams p0{eps, r.eta, cfg.length, cfg.a0};
  const ATParams p1 = p0.with_boundary(cfg.a1);
  const SolveOptions opts = cfg.solve_options();
  try {
    const CriticalPointReport r0 = solve_time0(p0, cfg.init0.resolve(nullptr), g, opts);
    r.c0_eps = r0.flux.c_eps;
    row.time0_residual = r0.stationarity_residual;
    if (!r0.converged) {
      row.status = "not_converged";
      return row;
    }
    const CriticalPointReport r1 = solve_time1(p1, r0, cfg.init.resolve(&r0), g, opts);
    row.converged = r1.converged;
    row.status = r1.converged ? "ok" : "not_converged";
    row.energy_monotone = r1.energy_monotone;
    r.c_eps = r1.flux.c_eps;
    r.iters = r1.iterations;
    r.residual = r1.stationarity_residual;
    r.energy_total = r1.energy.total;
    r.contact_fraction = r1.active.contact_fraction(g);
    row.flux_residual = r1.flux_residual;
    row.lcp = r1.lcp;
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      row.max_obstacle_violation = std::max(row.max_obstacle_violation, r1.state.v[i] - r0.state.v[i]);
    }
    row.min_v = *std::min_element(r1.state.v.begin(), r1.state.v.end());

    const ConcentrationReport conc = concentration(r1.state, p1, g, cfg.delta);
    r.x_eps = conc.x_eps;
    r.v_min = conc.v_min;
    r.alpha_est = conc.alpha_est;
    r.mass_total = conc.mass_total;
    r.mass_outside = conc.mass_outside;
    r.equi_defect = equipartition_defect(r1.state, p1, g);
    row.telescoping_alpha = telescoping_weight(r1.state.v, g);
    row.shape_ok = shape_check(r1.state.v, g, 1e-9).ok;

    if (r1.converged) {
      const Classification cl = classify(r1, p1, cfg.a0);
      r.branch = to_string(cl.branch);
      row.expect_jump = cl.expect_jump;
      row.rates = sup_norm_rates(r1, p1, g);
      const JumpSpec limit = cl.branch == Branch::affine ? JumpSpec::affine(cfg.length, cfg.a1)
                                                         : JumpSpec::step(cfg.length, cfg.a1, conc.x_eps);
      row.panel_error = panel_error(pair_with_panel(elastic_density(r1.state, p1, g), g), limit_elastic_pairings(limit));
    } else {
      r.branch = r.v_min <= jump_threshold ? "jump" : "affine";
    }
    if (!r1.active.empty()) row.slope_bound_ok = std::abs(r.c_eps) <= std::abs(r.c0_eps) + 1e-10;

    const CellField dc = discrepancy_cells(r1.state, p1, g);
    for (double x : dc) row.discrepancy_max = std::max(row.discrepancy_max, std::abs(x));
    row.discrepancy_sign_violation = discrepancy_sign_violation(dc, g);
    row.discrepancy_spread = row.discrepancy_max > 0.0 ? discrepancy_spread(dc) / row.discrepancy_max : 0.0;

    const MuExplicit mx = mu_explicit_forms(r1.state, r0, r1.flux, r1.active, p1, g);
    for (std::size_t i = 0; i < g.node_count(); ++i) row.mu_max = std::max(row.mu_max, std::abs(r1.multiplier.mu[i]));
    for (std::size_t i : r1.active.contact_indices) {
      row.mu_error_all = std::max(row.mu_error_all, std::abs(r1.multiplier.mu[i] - mx.load_form[i]));
    }
    for (std::size_t i : interior_contact_nodes(r1.active, g)) {
      row.mu_error = std::max(row.mu_error, std::abs(r1.multiplier.mu[i] - mx.load_form[i]));
      const double scale = std::max(std::abs(mx.load_form[i]), std::abs(mx.flux_form[i]));
      if (scale > 0.0) row.mu_forms_gap = std::max(row.mu_forms_gap, std::abs(mx.load_form[i] - mx.flux_form[i]) / scale);
    }
    if (cfg.profiles) {
      row.state = r1.state;
      row.discrepancy_profile = discrepancy(r1.state, p1, g);
      row.mu_profile = r1.multiplier.mu;
    }
  } catch (const SolverFailure& e) {
    row.status = std::string("solver_failure: ") + e.what();
    row.converged = false;
    row.record.residual = e.residual();
  }
  return row;
}

}  // namespace detail

/// Time-0 and time-1 solves plus diagnostics for every eps, in eps order.
/// Rows are independent; `parallel` > 1 computes them on worker threads.
inline std::vector<SweepRow> run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  std::vector<SweepRow> rows(cfg.eps_list.size());
  if (cfg.parallel <= 1) {
    for (std::size_t k = 0; k < rows.size(); ++k) rows[k] = detail::run_row(cfg, cfg.eps_list[k]);
  } else {
    for (std::size_t start = 0; start < rows.size(); start += static_cast<std::size_t>(cfg.parallel)) {
      std::vector<std::future<SweepRow>> jobs;
      const std::size_t stop = std::min(rows.size(), start + static_cast<std::size_t>(cfg.parallel));
      for (std::size_t k = start; k < stop; ++k) {
        jobs.push_back(std::async(std::launch::async, detail::run_row, std::cref(cfg), cfg.eps_list[k]));
      }
      for (std::size_t k = start; k < stop; ++k) rows[k] = jobs[k - start].get();
    }
  }
  if (!rows.empty()) {
    const double first = rows.front().record.energy_total;
    for (auto& r : rows) r.energy_flag = r.record.energy_total > 2.0 * first;
  }
  return rows;
}

inline std::vector<SweepRecord> records_of(const std::vector<SweepRow>& rows) {
  std::vector<SweepRecord> out;
  for (const auto& r : rows) out.push_back(r.record);
  return out;
}

// --------------------------------------------------------------------- check

struct CheckItem {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct CheckReport {
  std::vector<CheckItem> items;
  bool pass() const {
    return std::all_of(items.begin(), items.end(), [](const CheckItem& i) { return i.pass; });
  }
};

/// Thresholds for the record-level checks.
struct CheckCriteria {
  double length = 1.0;
  double a0 = 0.5;
  double a1 = 0.6;
  std::string expected_branch;  ///< "affine", "jump" or empty (no expectation)
  double residual_tol = 1e-11;
  double defect_ratio = 0.25;
  double slope_tol = 0.05;      ///< times |a1|/L
  double alpha_jump_lo = 1.9;
  double alpha_jump_hi = 2.0;
  double alpha_affine_hi = 0.1;
  double mass_rate_min = 0.9;
  std::size_t mass_rate_points = 4;  ///< fit over the last this-many rows
};

namespace detail {

inline std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

}  // namespace detail

/// Record-level criteria: residuals, equipartition trend, slope selection,
/// concentration weight and position, outside-mass rate.
inline CheckReport check(const std::vector<SweepRecord>& recs, const CheckCriteria& cr) {
  if (recs.size() < 3) throw std::invalid_argument("check: need at least three records");
  using detail::fmt;
  CheckReport rep;
  const double h_of = cr.length;  // h per row is L / n
  {
    CheckItem it{"residuals", true, ""};
    double worst = 0.0;
    for (const auto& r : recs) {
      worst = std::max(worst, r.residual);
      if (!(r.residual <= cr.residual_tol)) it.pass = false;
    }
    it.detail = "max residual " + fmt(worst) + " (tol " + fmt(cr.residual_tol) + ")";
    rep.items.push_back(it);
  }
  {
    CheckItem it{"equipartition", true, ""};
    for (std::size_t k = 1; k < recs.size(); ++k) {
      if (!(recs[k].equi_defect < recs[k - 1].equi_defect)) it.pass = false;
    }
    const double ratio = recs.back().equi_defect / recs.front().equi_defect;
    if (!(ratio <= cr.defect_ratio)) it.pass = false;
    it.detail = "defect " + fmt(recs.front().equi_defect) + " -> " + fmt(recs.back().equi_defect) + ", ratio " +
                fmt(ratio) + (it.pass ? "" : " (needs strict decrease and ratio <= " + fmt(cr.defect_ratio) + ")");
    rep.items.push_back(it);
  }
  {
    CheckItem it{"slope_selection", true, ""};
    const auto& last = recs.back();
    const double target = cr.a1 / cr.length;
    const double d0 = std::abs(last.c_eps), d1 = std::abs(last.c_eps - target);
    const double dist = std::min(d0, d1);
    it.pass = dist <= cr.slope_tol * std::abs(cr.a1) / cr.length;
    const double nearer = d0 <= d1 ? 0.0 : target;
    if (last.contact_fraction > 0.0 && std::abs(cr.a1) > std::abs(cr.a0) && nearer != 0.0) it.pass = false;
    it.detail = "c_eps " + fmt(last.c_eps) + ", distance " + fmt(dist) + " to " + fmt(nearer);
    rep.items.push_back(it);
  }
  {
    CheckItem it{"concentration", true, ""};
    const auto& last = recs.back();
    std::string branch = cr.expected_branch.empty() ? last.branch : cr.expected_branch;
    if (branch == "jump") {
      it.pass = last.alpha_est >= cr.alpha_jump_lo && last.alpha_est <= cr.alpha_jump_hi;
    } else {
      it.pass = last.alpha_est <= cr.alpha_affine_hi;
    }
    for (const auto& r : recs) {
      const double h = h_of / static_cast<double>(r.n);
      if (r.x_eps < 0.25 * cr.length - h || r.x_eps > 0.75 * cr.length + h) it.pass = false;
    }
    it.detail = branch + " branch, alpha_est " + fmt(last.alpha_est);
    rep.items.push_back(it);
  }
  {
    CheckItem it{"mass_outside_rate", false, ""};
    const std::size_t m = std::min(cr.mass_rate_points, recs.size());
    std::vector<double> x, y;
    for (std::size_t k = recs.size() - m; k < recs.size(); ++k) {
      x.push_back(recs[k].eps);
      y.push_back(recs[k].mass_outside);
    }
    try {
      const double slope = loglog_slope(x, y);
      it.pass = m >= 3 && slope >= cr.mass_rate_min;
      it.detail = "slope " + fmt(slope) + " over " + std::to_string(m) + " points";
    } catch (const std::invalid_argument& e) {
      it.detail = e.what();
    }
    rep.items.push_back(it);
  }
  if (!cr.expected_branch.empty()) {
    CheckItem it{"branch", true, ""};
    for (const auto& r : recs) {
      if (r.branch != cr.expected_branch) it.pass = false;
    }
    it.detail = "expected " + cr.expected_branch;
    rep.items.push_back(it);
  }
  return rep;
}

/// Row-level tolerances on top of the record checks.
struct RowCriteria {
  double kkt_tol = 1e-11;
  double bound_tol = 1e-12;
  double mu_abs = 1e-8;
  double mu_rel = 1e-6;
  double sign_rel = 1e-8;
  double spread_per_h = 1.0;  ///< relative spread allowed per unit h/L when mu = 0
  double shape_tol = 1e-9;
  double panel_final = 0.05;
};

/// Record checks plus the KKT, multiplier, discrepancy, shape and elastic
/// panel checks that need the full rows.
inline CheckReport check_rows(const std::vector<SweepRow>& rows, const CheckCriteria& cr, const RowCriteria& rc = {}) {
  using detail::fmt;
  CheckReport rep = check(records_of(rows), cr);
  {
    CheckItem it{"solved", true, ""};
    std::size_t bad = 0;
    for (const auto& r : rows) bad += r.converged ? 0 : 1;
    it.pass = bad == 0;
    it.detail = std::to_string(rows.size() - bad) + "/" + std::to_string(rows.size()) + " rows converged";
    rep.items.push_back(it);
  }
  {
    CheckItem it{"kkt", true, ""};
    double flux = 0.0, lcp = 0.0, bound = 0.0;
    for (const auto& r : rows) {
      if (!r.converged) continue;
      flux = std::max(flux, r.flux_residual);
      lcp = std::max(lcp, r.lcp.max());
      bound = std::max({bound, -r.min_v, r.max_obstacle_violation});
    }
    it.pass = flux <= rc.kkt_tol && lcp <= rc.kkt_tol && bound <= rc.bound_tol;
    it.detail = "flux " + fmt(flux) + ", lcp " + fmt(lcp) + ", bounds " + fmt(bound);
    rep.items.push_back(it);
  }
  {
    CheckItem it{"multiplier", true, ""};
    double worst = 0.0;
    for (const auto& r : rows) {
      if (!r.converged || r.record.contact_fraction == 0.0) continue;
      const double allowed = std::max(rc.mu_abs, rc.mu_rel * r.mu_max);
      worst = std::max(worst, r.mu_error / allowed);
      if (!(r.mu_error <= allowed)) it.pass = false;
    }
    it.detail = "worst error / allowance " + fmt(worst) + " (interior contact nodes)";
    rep.items.push_back(it);
  }
  {
    CheckItem it{"discrepancy", true, ""};
    double sign = 0.0, spread = 0.0;
    for (const auto& r : rows) {
      if (!r.converged) continue;
      sign = std::max(sign, r.discrepancy_sign_violation);
      if (!(r.discrepancy_sign_violation <= rc.sign_rel)) it.pass = false;
      if (r.mu_max == 0.0) {
        spread = std::max(spread, r.discrepancy_spread);
        if (!(r.discrepancy_spread <= rc.spread_per_h * r.h / cr.length)) it.pass = false;
      }
    }
    it.detail = "sign violation " + fmt(sign) + " (tol " + fmt(rc.sign_rel) + "), spread with mu = 0 " + fmt(spread);
    rep.items.push_back(it);
  }
  {
    CheckItem it{"shape", true, ""};
    for (const auto& r : rows) {
      if (r.converged && !r.shape_ok) it.pass = false;
    }
    it.detail = it.pass ? "every converged state" : "shape violated";
    rep.items.push_back(it);
  }
  {
    CheckItem it{"elastic_panel", true, ""};
    for (std::size_t k = 1; k < rows.size(); ++k) {
      if (!(rows[k].panel_error < rows[k - 1].panel_error)) it.pass = false;
    }
    if (!(rows.back().panel_error <= rc.panel_final)) it.pass = false;
    it.detail = "error " + fmt(rows.front().panel_error) + " -> " + fmt(rows.back().panel_error);
    rep.items.push_back(it);
  }
  return rep;
}

// ---------------------------------------------------------------------- emit

namespace detail {

inline std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace detail

inline std::string to_csv(const std::vector<SweepRecord>& recs) {
  using detail::num;
  std::ostringstream os;
  os << csv_header << '\n';
  for (const auto& r : recs) {
    os << num(r.eps) << ',' << num(r.eta) << ',' << r.n << ',' << num(r.c0_eps) << ',' << num(r.c_eps) << ','
       << num(r.x_eps) << ',' << num(r.v_min) << ',' << num(r.alpha_est) << ',' << num(r.equi_defect) << ','
       << num(r.mass_total) << ',' << num(r.mass_outside) << ',' << r.branch << ',' << num(r.contact_fraction) << ','
       << r.iters << ',' << num(r.residual) << ',' << num(r.energy_total) << '\n';
  }
  return os.str();
}

inline nlohmann::json to_json(const SweepRecord& r) {
  return {{"eps", r.eps},
          {"eta", r.eta},
          {"n", r.n},
          {"c0_eps", r.c0_eps},
          {"c_eps", r.c_eps},
          {"x_eps", r.x_eps},
          {"v_min", r.v_min},
          {"alpha_est", r.alpha_est},
          {"equi_defect", r.equi_defect},
          {"mass_total", r.mass_total},
          {"mass_outside", r.mass_outside},
          {"branch", r.branch},
          {"contact_fraction", r.contact_fraction},
          {"iters", r.iters},
          {"residual", r.residual},
          {"energy_total", r.energy_total}};
}

inline SweepRecord record_from_json(const nlohmann::json& j) {
  SweepRecord r;
  r.eps = j.at("eps").get<double>();
  r.eta = j.at("eta").get<double>();
  r.n = j.at("n").get<std::size_t>();
  r.c0_eps = j.at("c0_eps").get<double>();
  r.c_eps = j.at("c_eps").get<double>();
  r.x_eps = j.at("x_eps").get<double>();
  r.v_min = j.at("v_min").get<double>();
  r.alpha_est = j.at("alpha_est").get<double>();
  r.equi_defect = j.at("equi_defect").get<double>();
  r.mass_total = j.at("mass_total").get<double>();
  r.mass_outside = j.at("mass_outside").get<double>();
  r.branch = j.at("branch").get<std::string>();
  r.contact_fraction = j.at("contact_fraction").get<double>();
  r.iters = j.at("iters").get<int>();
  r.residual = j.at("residual").get<double>();
  r.energy_total = j.at("energy_total").get<double>();
  return r;
}

inline nlohmann::json to_json(const SweepRow& row) {
  nlohmann::json j = to_json(row.record);
  j["status"] = row.status;
  j["converged"] = row.converged;
  j["energy_flag"] = row.energy_flag;
  j["energy_monotone"] = row.energy_monotone;
  j["flux_residual"] = row.flux_residual;
  j["lcp"] = {{"stationarity", row.lcp.stationarity},
              {"sign", row.lcp.sign},
              {"feasibility", row.lcp.feasibility},
              {"complementarity", row.lcp.complementarity}};
  j["time0_residual"] = row.time0_residual;
  j["shape_ok"] = row.shape_ok;
  j["discrepancy"] = {{"max", row.discrepancy_max},
                      {"sign_violation", row.discrepancy_sign_violation},
                      {"spread", row.discrepancy_spread}};
  j["multiplier"] = {{"max", row.mu_max},
                     {"error_interior", row.mu_error},
                     {"error_all", row.mu_error_all},
                     {"forms_gap", row.mu_forms_gap}};
  j["panel_error"] = row.panel_error;
  j["telescoping_alpha"] = row.telescoping_alpha;
  j["rates"] = {{"eps_vprime", row.rates.eps_vprime},
                {"eps_uprime", row.rates.eps_uprime},
                {"inf_v_over_sqrt_eps", row.rates.inf_v_over_sqrt_eps}};
  j["slope_bound_ok"] = row.slope_bound_ok;
  j["expect_jump"] = row.expect_jump;
  if (row.state) {
    j["profiles"] = {{"u", row.state->u.values}, {"v", row.state->v.values}};
    if (row.discrepancy_profile) j["profiles"]["d"] = row.discrepancy_profile->values;
    if (row.mu_profile) j["profiles"]["mu"] = row.mu_profile->values;
  }
  return j;
}

/// Polyline plot. With `loglog`, both axes are logarithmic.
struct SvgSeries {
  std::string label;
  std::vector<double> x, y;
};

inline std::string svg_plot(const std::string& title, const std::vector<SvgSeries>& series, bool loglog = false) {
  constexpr double W = 640, H = 400, M = 50;
  static const std::array<const char*, 4> colours{"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  auto tx = [&](double v) { return loglog ? std::log10(v) : v; };
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      if (loglog && (s.x[k] <= 0 || s.y[k] <= 0)) continue;
      x0 = std::min(x0, tx(s.x[k]));
      x1 = std::max(x1, tx(s.x[k]));
      y0 = std::min(y0, tx(s.y[k]));
      y1 = std::max(y1, tx(s.y[k]));
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
     << ' ' << H << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n"
     << "<rect x=\"" << M << "\" y=\"" << M << "\" width=\"" << W - 2 * M << "\" height=\"" << H - 2 * M
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << M << "\" y=\"" << H - M + 15 << "\" font-size=\"10\">" << detail::fmt(x0) << "</text>\n"
     << "<text x=\"" << W - M << "\" y=\"" << H - M + 15 << "\" font-size=\"10\" text-anchor=\"end\">"
     << detail::fmt(x1) << "</text>\n"
     << "<text x=\"" << M - 4 << "\" y=\"" << H - M << "\" font-size=\"10\" text-anchor=\"end\">" << detail::fmt(y0)
     << "</text>\n"
     << "<text x=\"" << M - 4 << "\" y=\"" << M + 10 << "\" font-size=\"10\" text-anchor=\"end\">" << detail::fmt(y1)
     << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    os << "<polyline fill=\"none\" stroke=\"" << colours[k % colours.size()] << "\" stroke-width=\"1.2\" points=\"";
    // Thin long profiles to at most ~2000 vertices.
    const std::size_t stride = std::max<std::size_t>(1, s.x.size() / 2000);
    for (std::size_t i = 0; i < s.x.size(); i += stride) {
      if (loglog && (s.x[i] <= 0 || s.y[i] <= 0)) continue;
      const double px = M + (tx(s.x[i]) - x0) / (x1 - x0) * (W - 2 * M);
      const double py = H - M - (tx(s.y[i]) - y0) / (y1 - y0) * (H - 2 * M);
      os << detail::fmt(px) << ',' << detail::fmt(py) << ' ';
    }
    os << "\"/>\n";
    os << "<text x=\"" << W - M - 4 << "\" y=\"" << M + 14 + 14 * static_cast<double>(k) << "\" font-size=\"11\" "
       << "text-anchor=\"end\" fill=\"" << colours[k % colours.size()] << "\">" << s.label << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

namespace detail {

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace detail

/// Writes <dir>/<name>.csv, <name>.json and SVG plots as requested. Returns
/// the paths written.
inline std::vector<std::string> emit(const std::vector<SweepRow>& rows, const std::string& dir,
                                     const std::string& name, const std::vector<std::string>& formats) {
  std::vector<std::string> written;
  const std::string base = dir + "/" + name;
  for (const auto& f : formats) {
    if (f == "csv") {
      detail::write_file(base + ".csv", to_csv(records_of(rows)));
      written.push_back(base + ".csv");
    } else if (f == "json") {
      nlohmann::json j = nlohmann::json::array();
      for (const auto& r : rows) j.push_back(to_json(r));
      detail::write_file(base + ".json", j.dump(2) + "\n");
      written.push_back(base + ".json");
    } else if (f == "svg") {
      SvgSeries mass{"mass_outside", {}, {}}, total{"mass_total", {}, {}};
      for (const auto& r : rows) {
        mass.x.push_back(r.record.eps);
        mass.y.push_back(r.record.mass_outside);
        total.x.push_back(r.record.eps);
        total.y.push_back(r.record.mass_total);
      }
      detail::write_file(base + "_mass.svg", svg_plot(name + ": Modica mass vs eps", {mass, total}, true));
      written.push_back(base + "_mass.svg");
      for (const auto& r : rows) {
        if (!r.state) continue;
        const std::size_t n = r.state->v.size();
        std::vector<double> x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<double>(i) / static_cast<double>(n - 1);
        const std::string tag = base + "_eps" + detail::fmt(r.record.eps);
        detail::write_file(tag + "_uv.svg", svg_plot(name + " eps=" + detail::fmt(r.record.eps) + ": u, v",
                                                     {{"v", x, r.state->v.values}, {"u", x, r.state->u.values}}));
        written.push_back(tag + "_uv.svg");
        if (r.discrepancy_profile && r.mu_profile) {
          detail::write_file(tag + "_d.svg", svg_plot("discrepancy", {{"d", x, r.discrepancy_profile->values}}));
          detail::write_file(tag + "_mu.svg", svg_plot("multiplier", {{"mu", x, r.mu_profile->values}}));
          written.push_back(tag + "_d.svg");
          written.push_back(tag + "_mu.svg");
        }
      }
    } else {
      throw ConfigError("unknown output format '" + f + "'");
    }
  }
  return written;
}

}  // namespace atlab

#endif  // ATLAB_SWEEP_HPP
