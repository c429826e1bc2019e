// Command-line front end: solve, sweep, recovery, evolve, check.
//
// Exit codes: 0 success, 1 check failure, 2 solver or I/O failure,
// 3 configuration error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "atlab/run_config.hpp"

namespace {

enum Exit { ok = 0, check_failed = 1, solver_failed = 2, config_error = 3 };

struct Common {
  std::string config;
  std::string out;
  std::vector<std::string> formats;
  int parallel = 0;
  bool verbose = false;
};

void add_common(CLI::App* cmd, Common& c, bool with_output) {
  cmd->add_option("--config", c.config, "JSON config file")->required();
  if (with_output) {
    cmd->add_option("--out", c.out, "output directory (overrides the config)");
    cmd->add_option("--format", c.formats, "csv | json | svg, repeatable")
        ->check(CLI::IsMember({"csv", "json", "svg"}));
  }
  cmd->add_option("--parallel", c.parallel, "rows computed concurrently")->check(CLI::PositiveNumber);
  cmd->add_flag("--verbose", c.verbose, "progress on stderr");
}

void apply_overrides(atlab::SweepConfig& cfg, const Common& c) {
  if (!c.out.empty()) cfg.out_dir = c.out;
  if (!c.formats.empty()) cfg.formats = c.formats;
  if (c.parallel > 0) cfg.parallel = c.parallel;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());
}

void print_items(const atlab::CheckReport& rep) {
  for (const auto& it : rep.items) {
    std::printf("%-18s %s  %s\n", it.name.c_str(), it.pass ? "PASS" : "FAIL", it.detail.c_str());
  }
}

void print_rows(const std::vector<atlab::SweepRow>& rows) {
  std::printf("%-10s %-10s %7s %12s %12s %9s %10s %9s %11s %7s  %s\n", "eps", "eta", "n", "c_eps", "x_eps", "v_min",
              "alpha_est", "defect", "mass_out", "branch", "status");
  for (const auto& r : rows) {
    const auto& x = r.record;
    std::printf("%-10.4g %-10.4g %7zu %12.6g %12.6g %9.3g %10.6g %9.3g %11.4g %7s  %s\n", x.eps, x.eta, x.n, x.c_eps,
                x.x_eps, x.v_min, x.alpha_est, x.equi_defect, x.mass_outside, x.branch.c_str(), r.status.c_str());
  }
}

bool all_converged(const std::vector<atlab::SweepRow>& rows) {
  for (const auto& r : rows) {
    if (!r.converged) return false;
  }
  return true;
}

int run_solve(const Common& c, double eps) {
  atlab::SweepConfig cfg = atlab::load_sweep_config(c.config);
  apply_overrides(cfg, c);
  if (eps <= 0.0) eps = cfg.eps_list.back();
  cfg.eps_list = {eps};
  cfg.validate();
  if (c.verbose) std::fprintf(stderr, "solving eps=%g\n", eps);
  const atlab::SweepRow row = atlab::detail::run_row(cfg, eps);
  if (c.formats.empty()) {
    print_rows({row});
    std::printf("c0_eps %.10g  iters %d  residual %.3g  flux %.3g  lcp %.3g  contact %.4g  energy %.10g\n",
                row.record.c0_eps, row.record.iters, row.record.residual, row.flux_residual, row.lcp.max(),
                row.record.contact_fraction, row.record.energy_total);
  } else {
    ensure_dir(cfg.out_dir);
    for (const auto& f : atlab::emit({row}, cfg.out_dir, cfg.name, cfg.formats)) std::printf("wrote %s\n", f.c_str());
  }
  return row.converged ? ok : solver_failed;
}

int run_sweep_cmd(const Common& c) {
  atlab::SweepConfig cfg = atlab::load_sweep_config(c.config);
  apply_overrides(cfg, c);
  cfg.validate();
  if (c.verbose) std::fprintf(stderr, "sweep '%s': %zu eps values\n", cfg.name.c_str(), cfg.eps_list.size());
  const auto rows = atlab::run_sweep(cfg);
  print_rows(rows);
  ensure_dir(cfg.out_dir);
  for (const auto& f : atlab::emit(rows, cfg.out_dir, cfg.name, cfg.formats)) std::printf("wrote %s\n", f.c_str());
  return all_converged(rows) ? ok : solver_failed;
}

int run_check_cmd(const Common& c) {
  auto [cfg, criteria] = atlab::load_check_config(c.config);
  apply_overrides(cfg, c);
  cfg.validate();
  if (c.verbose) std::fprintf(stderr, "check '%s': %zu eps values\n", cfg.name.c_str(), cfg.eps_list.size());
  const auto rows = atlab::run_sweep(cfg);
  if (c.verbose) print_rows(rows);
  const atlab::CheckReport rep = atlab::check_rows(rows, criteria);
  print_items(rep);
  if (!c.out.empty() || !c.formats.empty()) {
    ensure_dir(cfg.out_dir);
    atlab::emit(rows, cfg.out_dir, cfg.name, cfg.formats);
  }
  std::printf("%s\n", rep.pass() ? "PASS" : "FAIL");
  return rep.pass() ? ok : check_failed;
}

int run_recovery_cmd(const Common& c) {
  atlab::RecoveryRunConfig cfg = atlab::load_recovery_config(c.config);
  if (!c.out.empty()) cfg.out_dir = c.out;
  if (c.verbose) std::fprintf(stderr, "recovery '%s': %zu eps values\n", cfg.name.c_str(), cfg.eps_list.size());
  const auto rows = atlab::gamma_limsup_table(cfg.target, cfg.eps_list, cfg.recovery);
  std::printf("%-10s %-10s %7s %12s %12s %12s %9s\n", "eps", "eta", "n", "energy", "ms", "gap", "compliant");
  for (const auto& r : rows) {
    std::printf("%-10.4g %-10.4g %7zu %12.6g %12.6g %12.6g %9s%s\n", r.eps, r.eta, r.n, r.energy, r.ms, r.gap,
                r.compliant ? "yes" : "no", r.under_resolved ? "  (jump layer under-resolved)" : "");
  }
  const atlab::CheckReport rep = atlab::check_recovery(rows, atlab::recovery_final_tol(cfg.target));
  print_items(rep);
  const std::vector<std::string> formats = c.formats.empty() ? std::vector<std::string>{"csv"} : c.formats;
  for (const auto& f : formats) {
    if (f != "csv") throw atlab::ConfigError("recovery tables are written as csv only");
  }
  ensure_dir(cfg.out_dir);
  const std::string path = cfg.out_dir + "/" + cfg.name + ".csv";
  atlab::detail::write_file(path, atlab::recovery_csv(rows));
  std::printf("wrote %s\n", path.c_str());
  return ok;
}

int run_evolve_cmd(const Common& c) {
  atlab::EvolveRunConfig cfg = atlab::load_evolve_config(c.config);
  if (c.verbose) std::fprintf(stderr, "evolve '%s': %zu steps\n", cfg.name.c_str(), cfg.schedule.size());
  const atlab::ChainResult chain = atlab::run_evolve(cfg);
  const auto steps = atlab::summarize_chain(chain);
  bool monotone = true;
  std::printf("%-6s %12s %14s %10s %9s %9s\n", "step", "u(L)", "energy", "v_min", "converged", "monotone");
  for (std::size_t t = 0; t < steps.size(); ++t) {
    const auto& s = steps[t];
    monotone = monotone && s.monotone;
    std::printf("%-6zu %12.6g %14.8g %10.4g %9s %9s\n", t, s.boundary, s.energy, s.v_min, s.converged ? "yes" : "no",
                s.monotone ? "yes" : "no");
  }
  if (chain.truncated) std::printf("chain truncated after a non-converged step\n");
  if (!monotone) std::printf("FAIL: damage decreased somewhere\n");
  if (chain.truncated) return solver_failed;
  return monotone ? ok : check_failed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase-field fracture lab: 1D critical points, sweeps and diagnostics"};
  app.require_subcommand(1);
  Common common;
  double eps = 0.0;

  auto* solve = app.add_subcommand("solve", "time-0 and time-1 solves at one eps, with diagnostics");
  add_common(solve, common, true);
  solve->add_option("--eps", eps, "eps value (default: the smallest in the config)")->check(CLI::PositiveNumber);
  auto* sweep = app.add_subcommand("sweep", "run every eps of a sweep config and emit the results");
  add_common(sweep, common, true);
  auto* recovery = app.add_subcommand("recovery", "energy gap table of recovery sequences");
  add_common(recovery, common, true);
  auto* evolve = app.add_subcommand("evolve", "quasi-static chain over a load schedule");
  add_common(evolve, common, false);
  auto* chk = app.add_subcommand("check", "run a sweep and evaluate the acceptance checks");
  add_common(chk, common, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : config_error;
  }

  try {
    if (solve->parsed()) return run_solve(common, eps);
    if (sweep->parsed()) return run_sweep_cmd(common);
    if (recovery->parsed()) return run_recovery_cmd(common);
    if (evolve->parsed()) return run_evolve_cmd(common);
    if (chk->parsed()) return run_check_cmd(common);
  } catch (const atlab::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return config_error;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return config_error;
  } catch (const atlab::SolverFailure& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return solver_failed;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return solver_failed;
  }
  return ok;
}
