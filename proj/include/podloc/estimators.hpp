// SPDX-License-Identifier: Apache-2.0

#ifndef PODLOC_ESTIMATORS_HPP
#define PODLOC_ESTIMATORS_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "podloc/parabolic.hpp"
#include "podloc/pod.hpp"
#include "podloc/problem.hpp"

namespace podloc {

/// Perturbation field for the control-error bound ||u - u_p|| <= ||zeta||/alpha.
/// Constructed so the perturbed variational inequality holds pointwise.
struct ZetaReport {
  ControlTrajectory zeta;
  double norm_U = 0.0;
  double bound = 0.0;  // norm_U / alpha
};

/// Sign-case construction from a precomputed gradient field g = alpha u + B*p:
/// zeta = max(0,-g) on lower-active nodes, -max(0,g) on upper-active ones
/// and -g elsewhere, making <g + zeta, v - u_p> >= 0 for all admissible v.
inline ZetaReport zeta_from_gradient(const ProblemSpec& spec,
                                     const ControlTrajectory& u_p,
                                     const ControlTrajectory& g) {
  const double tol = 1e-12;
  std::vector<dvec> z(u_p.grid.dof(), dvec(spec.m, 0.0));
  for (int j = 0; j < u_p.grid.dof(); ++j) {
    const double t = u_p.grid.node(j);
    for (int i = 0; i < spec.m; ++i) {
      const double ui = u_p.values[j][i];
      const auto lo = spec.u_lower[i](t);
      const auto hi = spec.u_upper[i](t);
      if ((lo && ui < *lo - tol) || (hi && ui > *hi + tol))
        throw std::invalid_argument("zeta: control violates its bounds");
      const double gi = g.values[j][i];
      double zi;
      if (lo && ui <= *lo + tol)
        zi = std::max(0.0, -gi);
      else if (hi && ui >= *hi - tol)
        zi = -std::max(0.0, gi);
      else
        zi = -gi;
      z[j][i] = zi;
    }
  }
  ZetaReport rep{ControlTrajectory(u_p.grid, std::move(z))};
  rep.norm_U = rep.zeta.norm_U();
  rep.bound = rep.norm_U / spec.alpha;
  return rep;
}

inline ZetaReport zeta(const ProblemSpec& spec, const SpatialGrid& sg,
                       const ControlTrajectory& u_p, const Trajectory& p) {
  std::vector<dvec> loads(spec.m);
  for (int i = 0; i < spec.m; ++i) loads[i] = control_load(sg, spec.chi[i]);
  std::vector<dvec> g(u_p.grid.dof(), dvec(spec.m, 0.0));
  for (int j = 0; j < u_p.grid.dof(); ++j)
    for (int i = 0; i < spec.m; ++i)
      g[j][i] =
          spec.alpha * u_p.values[j][i] + dot(loads[i], p.values[j]);
  return zeta_from_gradient(spec, u_p,
                            ControlTrajectory(u_p.grid, std::move(g)));
}

/// Terms of the POD state error estimate: time-derivative residuals (a),
/// eigenvalue/initial-data tail (b) and the lambda / dt^2 part (c).
/// All unknown constants use the value-1 convention.
struct StateErrorReport {
  std::vector<double> term_a_per_interval;
  double term_a = 0.0;
  double term_b = 0.0;
  double term_c = 0.0;
  double total() const { return term_a + term_b + term_c; }
};

namespace estimator_detail {

// Nodal profile ||y_tt||_H^2 + c ||y_t||_V^2 from time finite differences.
inline dvec derivative_profile(const SpatialGrid& sg, const Trajectory& y,
                               double weight_tt, double weight_t) {
  const auto mass = assemble_mass(sg);
  const auto stiff = assemble_stiffness(sg);
  const Trajectory yt = time_derivative(y);
  const Trajectory ytt = time_derivative(yt);
  dvec nodal(y.grid.dof());
  for (int j = 0; j < y.grid.dof(); ++j)
    nodal[j] = weight_tt * mass.quad(ytt.values[j], ytt.values[j]) +
               weight_t * stiff.quad(yt.values[j], yt.values[j]);
  return nodal;
}

// Exact integral of the piecewise-linear profile (base grid) over [a, b].
inline double profile_integral(const TimeGrid& base, const dvec& phi,
                               double a, double b) {
  auto value = [&](double t) {
    const int j = base.locate(t);
    const double s = (t - base.node(j - 1)) / base.dt(j);
    return (1.0 - s) * phi[j - 1] + s * phi[j];
  };
  double acc = 0.0;
  double left = a;
  int j = base.locate(a);
  while (left < b) {
    const double right = std::min(b, base.node(j));
    if (right > left)
      acc += 0.5 * (right - left) * (value(left) + value(right));
    left = right;
    ++j;
    if (j > base.intervals() && left < b) {
      acc += 0.5 * (b - left) * (value(left) + value(b));
      break;
    }
  }
  return acc;
}

// dt_j^2 int_Ij phi for every interval of `grid`, phi fixed on `base`.
inline std::vector<double> eta_pod_per_interval(const TimeGrid& grid,
                                                const TimeGrid& base,
                                                const dvec& phi) {
  std::vector<double> out(grid.intervals());
  for (int j = 1; j <= grid.intervals(); ++j) {
    const double dt = grid.dt(j);
    out[j - 1] =
        dt * dt * profile_integral(base, phi, grid.node(j - 1), grid.node(j));
  }
  return out;
}

}  // namespace estimator_detail

/// KV02-style state estimate terms for the trajectory y and the given
/// basis; (a) uses squared norms throughout.
inline StateErrorReport state_estimate(const ProblemSpec& spec,
                                       const SpatialGrid& sg,
                                       const TimeGrid& tg, const Trajectory& y,
                                       const PODBasis& basis) {
  StateErrorReport rep;
  constexpr double C_y = 1.0, c_p = 1.0;
  const dvec phi = estimator_detail::derivative_profile(
      sg, y, C_y * (1.0 + c_p * c_p), C_y);
  rep.term_a_per_interval =
      estimator_detail::eta_pod_per_interval(y.grid, y.grid, phi);
  for (double v : rep.term_a_per_interval) rep.term_a += v;

  const dvec y0n = sample_interior(sg, spec.y0);
  const int d = static_cast<int>(basis.eigenvalues.size());
  double tail_b = 0.0;
  for (int i = basis.ell; i < d; ++i) tail_b += basis.eigenvalues[i];
  // Tail projection of y0: the initial condition is part of the snapshot
  // span, so sum_{i>ell} <psi_i,y0>^2 = ||y0||^2 - sum_{i<=ell} <psi_i,y0>^2.
  const auto ipop = basis.ip_operator();
  double y0_tail = ipop.quad(y0n, y0n);
  for (int i = 0; i < basis.ell; ++i) {
    const double c = ipop.quad(basis.modes[i], y0n);
    y0_tail -= c * c;
  }
  y0_tail = std::max(0.0, y0_tail);
  const int n = tg.intervals();
  rep.term_b = n * C_y * (tail_b + y0_tail);
  double c_sum = 0.0;
  for (int j = 1; j <= n; ++j) {
    const double dt2 = tg.dt(j) * tg.dt(j);
    c_sum += C_y * tail_b / dt2;
  }
  rep.term_c = c_sum;
  return rep;
}

/// Post-processing refinement: bisect the interval with the largest
/// eta_POD_j = dt_j^2 int_Ij (||y_tt||_H^2 + ||y_t||_V^2), repeated
/// n_refine times. The derivative profile is held fixed (interpolated
/// from the given trajectory, no re-solve); ties break to the lowest
/// interval index, so each step strictly decreases the maximal indicator.
inline TimeGrid eta_pod_refine(const ProblemSpec& spec, const SpatialGrid& sg,
                               const TimeGrid& tg, const Trajectory& y,
                               int n_refine) {
  (void)spec;
  if (n_refine < 0)
    throw std::invalid_argument("eta_pod_refine: n_refine must be >= 0");
  const dvec phi = estimator_detail::derivative_profile(sg, y, 1.0, 1.0);
  TimeGrid grid = tg;
  for (int k = 0; k < n_refine; ++k) {
    const auto ind = estimator_detail::eta_pod_per_interval(grid, tg, phi);
    int argmax = 0;
    for (int j = 1; j < static_cast<int>(ind.size()); ++j)
      if (ind[j] > ind[argmax]) argmax = j;
    grid = grid.bisect({argmax + 1});
  }
  return grid;
}

/// Summands of the combined adjoint error estimate (constants = 1):
/// eta + (1/alpha)(zeta sums) + sqrt(tail + state difference^2).
struct CombinedBound {
  double eta = 0.0;
  double zeta_sum = 0.0;      // ||zeta_k|| + ||zeta_k^ell||
  double lambda_tail = 0.0;
  double state_diff = 0.0;    // ||y_k - y_k^ell||_{L2(0,T;H)}
  double alpha = 1.0;
  double total() const {
    return eta + zeta_sum / alpha +
           std::sqrt(lambda_tail + state_diff * state_diff);
  }
};

inline CombinedBound combined_bound(double eta, double zeta_k,
                                    double zeta_kl, const PODBasis& basis,
                                    double state_diff, double alpha) {
  CombinedBound b;
  b.eta = eta;
  b.zeta_sum = zeta_k + zeta_kl;
  b.lambda_tail = basis.eigenvalue_tail();
  b.state_diff = state_diff;
  b.alpha = alpha;
  return b;
}

}  // namespace podloc

#endif  // PODLOC_ESTIMATORS_HPP
