// SPDX-License-Identifier: Apache-2.0

#ifndef PODLOC_PARABOLIC_HPP
#define PODLOC_PARABOLIC_HPP

#include <cmath>
#include <vector>

#include "podloc/pod.hpp"
#include "podloc/problem.hpp"
#include "podloc/trajectory.hpp"

namespace podloc {

/// Implicit Euler for M y' + A y = f + B u, y(0) = nodal interpolant of y0.
/// Data and control are taken at the new time level.
inline Trajectory solve_state(const ProblemSpec& spec, const SpatialGrid& sg,
                              const TimeGrid& tg, const ControlTrajectory& u) {
  const auto M = assemble_mass(sg);
  const auto A = assemble_stiffness(sg);
  std::vector<dvec> loads(spec.m);
  for (int i = 0; i < spec.m; ++i) loads[i] = control_load(sg, spec.chi[i]);

  std::vector<dvec> y;
  y.reserve(tg.dof());
  y.push_back(sample_interior(sg, spec.y0));
  for (int j = 1; j < tg.dof(); ++j) {
    const double dt = tg.dt(j);
    const double t = tg.node(j);
    dvec rhs = M.apply(y.back());
    dvec fj = load_vector(sg, [&](double x) { return spec.f(x, t); });
    axpy(dt, fj, rhs);
    for (int i = 0; i < spec.m; ++i)
      axpy(dt * u.values[j][i], loads[i], rhs);
    y.push_back(tridiag_solve(M, 1.0, A, dt, rhs));
  }
  return Trajectory(tg, std::move(y));
}

/// Backward implicit Euler for -M p' + A p = M (y - y_d), p(T) = 0.
inline Trajectory solve_adjoint(const ProblemSpec& spec, const SpatialGrid& sg,
                                const TimeGrid& tg, const Trajectory& y) {
  const auto M = assemble_mass(sg);
  const auto A = assemble_stiffness(sg);
  const int n = tg.intervals();
  std::vector<dvec> p(tg.dof(), dvec(sg.interior(), 0.0));
  for (int j = n; j >= 1; --j) {
    const double dt = tg.dt(j);
    const double t = tg.node(j - 1);
    dvec misfit = y.values[j - 1];
    axpy(-1.0, sample_interior(sg, [&](double x) { return spec.y_d(x, t); }),
         misfit);
    dvec rhs = M.apply(p[j]);
    axpy(dt, M.apply(misfit), rhs);
    p[j - 1] = tridiag_solve(M, 1.0, A, dt, rhs);
  }
  return Trajectory(tg, std::move(p));
}

/// Finite-difference time derivative: three-point nonuniform centered
/// differences at interior nodes, one-sided at the endpoints.
inline Trajectory time_derivative(const Trajectory& traj) {
  const TimeGrid& g = traj.grid;
  const int n = g.intervals();
  const int m = traj.interior();
  std::vector<dvec> d(g.dof(), dvec(m, 0.0));
  // endpoints
  for (int i = 0; i < m; ++i) {
    d[0][i] = (traj.values[1][i] - traj.values[0][i]) / g.dt(1);
    d[n][i] = (traj.values[n][i] - traj.values[n - 1][i]) / g.dt(n);
  }
  for (int j = 1; j < n; ++j) {
    const double d1 = g.dt(j), d2 = g.dt(j + 1);
    const double cl = -d2 / (d1 * (d1 + d2));
    const double cc = (d2 - d1) / (d1 * d2);
    const double cr = d1 / (d2 * (d1 + d2));
    for (int i = 0; i < m; ++i)
      d[j][i] = cl * traj.values[j - 1][i] + cc * traj.values[j][i] +
                cr * traj.values[j + 1][i];
  }
  return Trajectory(g, std::move(d));
}

/// State, adjoint and adjoint-derivative snapshots for the input control,
/// plus the initial condition column.
inline SnapshotSet generate_snapshots(const ProblemSpec& spec,
                                      const SpatialGrid& sg,
                                      const TimeGrid& tg,
                                      const ControlTrajectory& u0) {
  Trajectory y = solve_state(spec, sg, tg, u0);
  Trajectory p = solve_adjoint(spec, sg, tg, y);
  Trajectory pdot = time_derivative(p);
  dvec initial = sample_interior(sg, spec.y0);
  return SnapshotSet{sg, std::move(y), std::move(p), std::move(pdot),
                     std::move(initial)};
}

}  // namespace podloc

#endif  // PODLOC_PARABOLIC_HPP
