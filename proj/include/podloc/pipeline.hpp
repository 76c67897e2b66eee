// SPDX-License-Identifier: Apache-2.0

#ifndef PODLOC_PIPELINE_HPP
#define PODLOC_PIPELINE_HPP

#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "podloc/estimators.hpp"
#include "podloc/ocp.hpp"
#include "podloc/parabolic.hpp"
#include "podloc/pod.hpp"
#include "podloc/problem.hpp"
#include "podloc/spacetime.hpp"

namespace podloc {

enum class GridMode { adaptive, uniform };

struct PipelineConfig {
  int problem_id = 1;
  GridMode grid_mode = GridMode::adaptive;
  int dof = 21;            // time nodes (adaptive budget / uniform n+1)
  double dx = 0.2;         // coarse spatial resolution for the grid search
  double h = 0.01;         // fine spatial resolution for snapshots and ROM
  int ell = 1;             // POD rank; <= 0 switches to energy_tol
  double energy_tol = 1e-12;
  int n_refine = 0;        // post-processing bisections for the state
  InnerProduct ip = InnerProduct::L2;
  bool snapshots_from_forecast = false;  // use u_dx instead of u = 0
  double tau_rel = 1e-3;
  double tau_abs = 1e-10;
  int initial_intervals = 5;
  unsigned seed = 0;  // reserved; the pipeline is deterministic
};

struct EstimatorBundle {
  std::optional<double> eta_interior;
  std::optional<double> eta_boundary;
  std::optional<double> zeta_k;
  std::optional<double> zeta_kl;
  double lambda_tail = 0.0;
  double state_diff = 0.0;
  std::optional<int> fixed_point_iterations;
};

struct PipelineResult {
  PipelineConfig config;
  TimeGrid grid_T;
  TimeGrid grid_Tnew;
  std::optional<ControlTrajectory> u_forecast;
  PODBasis basis;
  SolveReport solve;
  std::optional<ErrorReport> errors;
  double cost = 0.0;
  EstimatorBundle estimators;

  PipelineResult(TimeGrid a, TimeGrid b, SolveReport s)
      : grid_T(std::move(a)), grid_Tnew(std::move(b)), solve(std::move(s)) {}
};

namespace pipeline_detail {

inline int resolution_to_elements(double spacing, const char* what) {
  const double inv = 1.0 / spacing;
  const int n = static_cast<int>(std::lround(inv));
  if (n < 2 || std::abs(n * spacing - 1.0) > 1e-10)
    throw std::invalid_argument(std::string(what) +
                                ": spacing must divide the unit interval");
  return n;
}

template <class Fn>
auto stage(const char* label, Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("pipeline stage ") + label + ": " +
                             e.what());
  }
}

}  // namespace pipeline_detail

/// Full offline/online chain: adaptive grid from the space-time system,
/// control forecast, optional state-driven post-refinement, fine snapshots,
/// POD basis, reduced optimal control solve and a-posteriori components.
inline PipelineResult run(const PipelineConfig& cfg) {
  using pipeline_detail::stage;
  const ProblemSpec spec = problem_by_id(cfg.problem_id);
  const SpatialGrid fine = SpatialGrid::unit(
      pipeline_detail::resolution_to_elements(cfg.h, "fine grid"));

  std::optional<AdaptResult> adapted;
  std::optional<ControlTrajectory> u_dx;
  TimeGrid grid_T = TimeGrid::uniform(spec.T, std::max(1, cfg.dof - 1));
  TimeGrid grid_Tnew = grid_T;

  if (cfg.grid_mode == GridMode::adaptive) {
    const SpatialGrid coarse = SpatialGrid::unit(
        pipeline_detail::resolution_to_elements(cfg.dx, "coarse grid"));
    AdaptOptions aopts;
    aopts.initial_intervals = cfg.initial_intervals;
    adapted = stage("1 (adapt)",
                    [&] { return adapt(spec, coarse, cfg.dof, aopts); });
    grid_T = adapted->grid;
    u_dx = stage("2 (control forecast)",
                 [&] { return extract_control(adapted->solution, spec); });
    const Trajectory y_coarse = stage("3 (coarse state)", [&] {
      return solve_state(spec, coarse, grid_T, *u_dx);
    });
    grid_Tnew = cfg.n_refine > 0
                    ? stage("4 (post refinement)",
                            [&] {
                              return eta_pod_refine(spec, coarse, grid_T,
                                                    y_coarse, cfg.n_refine);
                            })
                    : grid_T;
  }

  ControlTrajectory u_snap =
      (cfg.snapshots_from_forecast && u_dx)
          ? u_dx->interpolate(grid_Tnew)
          : ControlTrajectory::zero(grid_Tnew, spec.m);

  const SnapshotSet snaps = stage("5 (snapshots)", [&] {
    return generate_snapshots(spec, fine, grid_Tnew, u_snap);
  });
  PODBasis basis = stage("6 (pod basis)", [&] {
    return compute_basis(snaps, cfg.ip,
                         cfg.ell > 0 ? BasisSize::rank(cfg.ell)
                                     : BasisSize::tolerance(cfg.energy_tol));
  });
  const ReducedModel rom = assemble_reduced(basis, spec, fine);
  const ReducedOcpModel model(spec, rom, fine, grid_Tnew);

  OptimizerOptions oopts;
  oopts.tau_rel = cfg.tau_rel;
  oopts.tau_abs = cfg.tau_abs;
  // feasible start: the snapshot control clamped to the admissible set
  ControlTrajectory u_init = u_snap;
  for (int j = 0; j < grid_Tnew.dof(); ++j)
    for (int i = 0; i < spec.m; ++i)
      u_init.values[j][i] =
          spec.clamp(i, grid_Tnew.node(j), u_init.values[j][i]);
  SolveReport rep = stage("7 (reduced solve)", [&] {
    return projected_gradient(model, u_init, oopts);
  });

  PipelineResult out(grid_T, grid_Tnew, std::move(rep));
  out.config = cfg;
  out.u_forecast = u_dx;
  out.basis = std::move(basis);
  out.cost = out.solve.cost;
  if (spec.analytic)
    out.errors =
        error_norms(spec, fine, out.solve.state, out.solve.control,
                    out.solve.adjoint);

  // certification components (full-order solves at resolution h)
  EstimatorBundle est;
  est.lambda_tail = out.basis.eigenvalue_tail();
  if (adapted) {
    const EtaReport eta = eta_indicator(adapted->solution, spec);
    est.eta_interior = eta.eta_interior();
    est.eta_boundary = eta.eta_boundary();
    est.fixed_point_iterations = adapted->solution.iterations;
    const ControlTrajectory u_k = u_dx->interpolate(grid_Tnew);
    const Trajectory y_k = solve_state(spec, fine, grid_Tnew, u_k);
    const Trajectory p_k = solve_adjoint(spec, fine, grid_Tnew, y_k);
    est.zeta_k = zeta(spec, fine, u_k, p_k).norm_U;
  }
  {
    const Trajectory y_kl =
        solve_state(spec, fine, grid_Tnew, out.solve.control);
    const Trajectory p_kl = solve_adjoint(spec, fine, grid_Tnew, y_kl);
    est.zeta_kl = zeta(spec, fine, out.solve.control, p_kl).norm_U;
    est.state_diff =
        space_time_l2_diff(assemble_mass(fine), y_kl, out.solve.state);
  }
  out.estimators = est;
  return out;
}

/// Run a list of configurations; results in input order.
inline std::vector<PipelineResult> sweep(std::span<const PipelineConfig> cfgs) {
  std::vector<PipelineResult> out;
  out.reserve(cfgs.size());
  for (const PipelineConfig& c : cfgs) out.push_back(run(c));
  return out;
}

}  // namespace podloc

#endif  // PODLOC_PIPELINE_HPP
