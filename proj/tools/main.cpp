// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: adaptive grid generation, single pipeline runs,
// benchmark table reproduction and a quick self-check suite.

#include <cstdio>
#include <exception>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "podloc/ocp.hpp"
#include "podloc/pipeline.hpp"
#include "podloc/report.hpp"

namespace {

using namespace podloc;

struct CommonFlags {
  int test = 1;
  int dof = 21;
  double dt = 0.0;  // > 0 selects a uniform grid with this step
  int ell = 1;
  double dx = 0.2;
  double h = 0.01;
  int nrefine = 0;
  std::string grid = "adaptive";
  std::string ip = "l2";
  std::string snapshots = "zero";
  std::string out;
  std::string format = "csv";
  std::string config_file;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->set_help_flag("--help", "print this help message");  // frees --h
  cmd->add_option("--config", f.config_file,
                  "configuration file (key=value lines)");
  cmd->add_option("--test", f.test, "problem id (1|2|3)")
      ->check(CLI::IsMember({1, 2, 3}));
  cmd->add_option("--dof", f.dof, "time-grid degrees of freedom");
  cmd->add_option("--dt", f.dt, "uniform time step (overrides --dof)");
  cmd->add_option("--ell", f.ell, "POD basis rank");
  cmd->add_option("--dx", f.dx, "coarse spatial resolution");
  cmd->add_option("--h", f.h, "fine spatial resolution");
  cmd->add_option("--nrefine", f.nrefine, "post-processing bisections");
  cmd->add_option("--grid", f.grid, "time grid mode")
      ->check(CLI::IsMember({"uniform", "adaptive"}));
  cmd->add_option("--ip", f.ip, "POD inner product")
      ->check(CLI::IsMember({"l2", "h1"}));
  cmd->add_option("--snapshots", f.snapshots, "snapshot control")
      ->check(CLI::IsMember({"zero", "forecast"}));
  cmd->add_option("--out", f.out, "output file (default: stdout)");
  cmd->add_option("--format", f.format, "output format")
      ->check(CLI::IsMember({"csv", "tsv"}));
}

// key=value defaults; command-line flags win. Unknown keys are usage errors.
void apply_config(CLI::App* cmd, CommonFlags& f) {
  if (f.config_file.empty()) return;
  std::ifstream in(f.config_file);
  if (!in)
    throw CLI::ValidationError("config",
                               "cannot open config file " + f.config_file);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw CLI::ValidationError(
          "config", "expected key=value at line " + std::to_string(lineno));
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (cmd->count("--" + key) > 0) continue;  // flag overrides file
    try {
      if (key == "test") f.test = std::stoi(value);
      else if (key == "dof") f.dof = std::stoi(value);
      else if (key == "dt") f.dt = std::stod(value);
      else if (key == "ell") f.ell = std::stoi(value);
      else if (key == "dx") f.dx = std::stod(value);
      else if (key == "h") f.h = std::stod(value);
      else if (key == "nrefine") f.nrefine = std::stoi(value);
      else if (key == "grid") f.grid = value;
      else if (key == "ip") f.ip = value;
      else if (key == "snapshots") f.snapshots = value;
      else if (key == "out") f.out = value;
      else if (key == "format") f.format = value;
      else
        throw CLI::ValidationError("config", "unknown key " + key);
    } catch (const std::invalid_argument&) {
      throw CLI::ValidationError(
          "config", "bad value for " + key + " at line " +
                        std::to_string(lineno));
    }
  }
}

PipelineConfig to_config(const CommonFlags& f) {
  PipelineConfig cfg;
  cfg.problem_id = f.test;
  cfg.grid_mode = f.grid == "uniform" ? GridMode::uniform : GridMode::adaptive;
  cfg.dof = f.dt > 0.0 ? static_cast<int>(std::lround(1.0 / f.dt)) + 1 : f.dof;
  cfg.dx = f.dx;
  cfg.h = f.h;
  cfg.ell = f.ell;
  cfg.n_refine = f.nrefine;
  cfg.ip = f.ip == "h1" ? InnerProduct::H1 : InnerProduct::L2;
  cfg.snapshots_from_forecast = f.snapshots == "forecast";
  return cfg;
}

ReportFormat to_format(const std::string& f) {
  return f == "tsv" ? ReportFormat::tsv : ReportFormat::csv;
}

void write_rows(const std::vector<ReportRow>& rows, const CommonFlags& f) {
  if (f.out.empty()) {
    // reuse the file writer through a temporary buffer-free path: print
    const char sep = f.format == "tsv" ? '\t' : ',';
    std::cout << "grid";
    if (!rows.empty())
      for (const auto& [name, v] : rows.front().fields) std::cout << sep << name;
    std::cout << '\n';
    for (const auto& r : rows) {
      std::cout << r.grid_desc;
      for (const auto& [name, v] : r.fields)
        std::cout << sep << format_number(v, to_format(f.format));
      std::cout << '\n';
    }
  } else {
    write_report(rows, f.out, to_format(f.format));
  }
}

ReportRow error_row(const std::string& desc, const PipelineResult& r) {
  ReportRow row;
  row.grid_desc = desc;
  row.add("eps_y", r.errors ? r.errors->eps_y : 0.0);
  row.add("eps_u", r.errors ? r.errors->eps_u : 0.0);
  row.add("eps_p", r.errors ? r.errors->eps_p : 0.0);
  row.add("J", r.cost);
  return row;
}

int run_adapt(const CommonFlags& f) {
  const ProblemSpec spec = problem_by_id(f.test);
  const int nx = static_cast<int>(std::lround(1.0 / f.dx));
  const AdaptResult res = adapt(spec, SpatialGrid::unit(nx), f.dof);
  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!f.out.empty()) {
    file.open(f.out, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open " + f.out);
    os = &file;
  }
  for (double t : res.grid.nodes())
    *os << format_number(t, ReportFormat::tsv) << '\n';
  if (res.budget_warning)
    std::cerr << "warning: budget does not exceed the initial grid\n";
  return 0;
}

int run_single(const CommonFlags& f, const std::string& plot_prefix) {
  const PipelineResult r = run(to_config(f));
  const std::string desc = f.grid == "uniform"
                               ? "1/" + std::to_string(r.grid_Tnew.intervals())
                               : std::to_string(r.grid_Tnew.dof());
  ReportRow row = error_row(desc, r);
  if (r.estimators.eta_interior) {
    row.add("eta_i", *r.estimators.eta_interior);
    row.add("eta_b", *r.estimators.eta_boundary);
  }
  if (r.estimators.zeta_k && r.estimators.zeta_kl)
    row.add("zeta_sum", *r.estimators.zeta_k + *r.estimators.zeta_kl);
  row.add("lambda_tail", r.estimators.lambda_tail);
  write_rows({row}, f);
  if (!plot_prefix.empty()) emit_plotdata(r, plot_prefix);
  return 0;
}

int run_bench(const CommonFlags& flags, int table) {
  const bool test_ok = (table >= 1 && table <= 4 && flags.test == 1) ||
                       (table >= 5 && table <= 7 && flags.test == 2) ||
                       (table == 8 && flags.test == 3);
  if (!test_ok)
    throw CLI::ValidationError("bench",
                               "table " + std::to_string(table) +
                                   " does not belong to test " +
                                   std::to_string(flags.test));

  const std::vector<int> uniform_t1 = {20, 42, 61, 114};
  const std::vector<int> adaptive_t1 = {21, 43, 62, 115};
  const std::vector<int> uniform_t2 = {20, 40, 68, 134};
  const std::vector<int> adaptive_t2 = {21, 41, 69, 135};

  const int ell = (flags.test == 1) ? 1 : (table == 7 ? 1 : 4);
  const auto& uniform_n = flags.test == 1 ? uniform_t1 : uniform_t2;
  const auto& adaptive_dof = flags.test == 1 ? adaptive_t1 : adaptive_t2;

  std::vector<ReportRow> rows;
  auto run_one = [&](GridMode mode, int dof_or_n, int nrefine) {
    CommonFlags f = flags;
    f.ell = ell;
    f.nrefine = nrefine;
    f.grid = mode == GridMode::uniform ? "uniform" : "adaptive";
    f.dof = mode == GridMode::uniform ? dof_or_n + 1 : dof_or_n;
    f.dt = 0.0;
    return run(to_config(f));
  };

  if (table == 2) {
    for (int dof : adaptive_dof) {
      const PipelineResult r = run_one(GridMode::adaptive, dof, 0);
      ReportRow row;
      row.grid_desc = std::to_string(dof);
      row.add("eps_p", r.errors->eps_p);
      row.add("eta_i", *r.estimators.eta_interior);
      row.add("eta_b", *r.estimators.eta_boundary);
      row.add("zeta_sum", *r.estimators.zeta_k + *r.estimators.zeta_kl);
      row.add("lambda_tail", r.estimators.lambda_tail);
      rows.push_back(std::move(row));
    }
  } else if (table == 4) {
    for (int nrefine : {0, 5, 10, 20, 30}) {
      const PipelineResult r = run_one(GridMode::adaptive, 43, nrefine);
      ReportRow row = error_row(std::to_string(nrefine), r);
      row.grid_desc = std::to_string(nrefine);
      rows.push_back(std::move(row));
    }
  } else if (table == 3 || table == 6) {
    for (int n : uniform_n) {
      const PipelineResult r = run_one(GridMode::uniform, n, 0);
      ReportRow row;
      row.grid_desc = "1/" + std::to_string(n);
      row.add("J", r.cost);
      rows.push_back(std::move(row));
    }
    for (int dof : adaptive_dof) {
      const PipelineResult r = run_one(GridMode::adaptive, dof, 0);
      ReportRow row;
      row.grid_desc = std::to_string(dof);
      row.add("J", r.cost);
      rows.push_back(std::move(row));
    }
  } else {  // error tables 1, 5, 7, 8
    for (int n : uniform_n)
      rows.push_back(
          error_row("1/" + std::to_string(n), run_one(GridMode::uniform, n, 0)));
    for (int dof : adaptive_dof)
      rows.push_back(error_row(std::to_string(dof),
                               run_one(GridMode::adaptive, dof, 0)));
  }
  write_rows(rows, flags);
  return 0;
}

bool report_check(const char* name, bool ok) {
  std::cout << (ok ? "[ok]   " : "[FAIL] ") << name << '\n';
  return ok;
}

int run_check() {
  bool all = true;
  {
    const TimeGrid g(std::vector<double>{0.0, 0.1, 0.35, 0.7, 1.0});
    double s = 0.0;
    for (double w : g.weights()) s += w;
    all &= report_check("trapezoidal weights sum to T", std::abs(s - 1.0) < 1e-12);
  }
  {
    bool ok = true;
    for (int nx : {2, 8, 64, 512}) {
      ok &= assemble_mass(SpatialGrid::unit(nx)).positive_definite();
      ok &= assemble_stiffness(SpatialGrid::unit(nx)).positive_definite();
    }
    all &= report_check("mass/stiffness positive definite", ok);
  }
  {
    // POD projection-error identity on pseudo-random snapshots
    std::mt19937 gen(7);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    const SpatialGrid sg = SpatialGrid::unit(24);
    const TimeGrid tg = TimeGrid::uniform(1.0, 5);
    auto randtraj = [&] {
      std::vector<dvec> v(tg.dof(), dvec(sg.interior()));
      for (auto& col : v)
        for (auto& x : col) x = dist(gen);
      return Trajectory(tg, v);
    };
    SnapshotSet snaps{sg, randtraj(), randtraj(), randtraj(),
                      dvec(sg.interior(), 0.5)};
    const PODBasis basis = compute_basis(snaps, InnerProduct::L2,
                                         BasisSize::rank(3));
    const double err = projection_error(snaps, basis);
    const double tail = basis.eigenvalue_tail();
    all &= report_check("err-POD identity",
                        std::abs(err - tail) <= 1e-8 * std::max(1.0, tail));
  }
  {
    // smooth tracking problem keeps the cost at order one, so the central
    // difference below is cancellation-free
    ProblemSpec spec;
    spec.T = 1.0;
    spec.alpha = 0.5;
    spec.m = 1;
    spec.chi = {[](double x) { return x * (x - 1.0); }};
    spec.f = [](double, double) { return 0.0; };
    spec.y_d = [](double x, double t) { return x * (1.0 - x) * (1.0 + t); };
    spec.y_d_t = [](double x, double) { return x * (1.0 - x); };
    spec.y_d_xx = [](double, double t) { return -2.0 * (1.0 + t); };
    spec.y0 = [](double) { return 0.0; };
    spec.u_lower = {unbounded()};
    spec.u_upper = {unbounded()};
    const SpatialGrid sg = SpatialGrid::unit(20);
    const TimeGrid tg = TimeGrid::uniform(1.0, 12);
    const FullOcpModel model(spec, sg, tg);
    ControlTrajectory u = ControlTrajectory::zero(tg, 1);
    for (int j = 0; j < tg.dof(); ++j) u.values[j][0] = std::sin(2.1 * j);
    const ControlTrajectory g = model.gradient(u);
    ControlTrajectory du = ControlTrajectory::zero(tg, 1);
    for (int j = 0; j < tg.dof(); ++j) du.values[j][0] = std::cos(1.3 * j);
    const double eps = 1e-5;
    ControlTrajectory up = u, um = u;
    for (int j = 0; j < tg.dof(); ++j) {
      up.values[j][0] += eps * du.values[j][0];
      um.values[j][0] -= eps * du.values[j][0];
    }
    const double fd = (model.cost(up) - model.cost(um)) / (2.0 * eps);
    double gd = 0.0;
    for (int j = 0; j < tg.dof(); ++j)
      gd += tg.weight(j) * g.values[j][0] * du.values[j][0];
    all &= report_check("gradient matches finite differences",
                        std::abs(fd - gd) <= 1e-6 * std::abs(fd));
  }
  {
    // implicit Euler energy decay with f = u = 0
    ProblemSpec spec = test1();
    spec.f = [](double, double) { return 0.0; };
    spec.y0 = [](double x) { return std::sin(M_PI * x); };
    const SpatialGrid sg = SpatialGrid::unit(30);
    const TimeGrid tg = TimeGrid::uniform(1.0, 25);
    const auto mass = assemble_mass(sg);
    const Trajectory y =
        solve_state(spec, sg, tg, ControlTrajectory::zero(tg, 1));
    bool ok = true;
    double prev = std::sqrt(mass.quad(y.values[0], y.values[0]));
    for (int j = 1; j < tg.dof(); ++j) {
      const double cur = std::sqrt(mass.quad(y.values[j], y.values[j]));
      ok &= cur <= prev + 1e-14;
      prev = cur;
    }
    all &= report_check("implicit Euler energy decay", ok);
  }
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"POD model reduction for parabolic optimal control with "
               "a-posteriori snapshot location"};
  app.set_config("--config", "", "configuration file (key=value lines)");
  app.require_subcommand(1);

  CommonFlags adapt_flags, run_flags, bench_flags;
  std::string plot_prefix;
  int table = 1;

  CLI::App* cmd_adapt =
      app.add_subcommand("adapt", "emit the adaptive time grid nodes");
  add_common(cmd_adapt, adapt_flags);

  CLI::App* cmd_run = app.add_subcommand("run", "single pipeline run");
  add_common(cmd_run, run_flags);
  cmd_run->add_option("--plot", plot_prefix, "plot-data file prefix");

  CLI::App* cmd_bench =
      app.add_subcommand("bench", "reproduce a benchmark table");
  add_common(cmd_bench, bench_flags);
  cmd_bench->add_option("--table", table, "table number (1..8)")
      ->required()
      ->check(CLI::Range(1, 8));

  CLI::App* cmd_check = app.add_subcommand("check", "quick property suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (cmd_adapt->parsed()) {
      apply_config(cmd_adapt, adapt_flags);
      return run_adapt(adapt_flags);
    }
    if (cmd_run->parsed()) {
      apply_config(cmd_run, run_flags);
      return run_single(run_flags, plot_prefix);
    }
    if (cmd_bench->parsed()) {
      apply_config(cmd_bench, bench_flags);
      return run_bench(bench_flags, table);
    }
    if (cmd_check->parsed()) return run_check();
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
