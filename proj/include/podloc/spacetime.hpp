// SPDX-License-Identifier: Apache-2.0

#ifndef PODLOC_SPACETIME_HPP
#define PODLOC_SPACETIME_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "podloc/linalg.hpp"
#include "podloc/problem.hpp"
#include "podloc/trajectory.hpp"

namespace podloc {

/// Solution of the space-time reformulation of the optimality system:
/// piecewise linear in time, finite differences on a coarse spatial grid,
/// terminal condition p(.,T) = 0 built in.
struct SpaceTimeSolution {
  SpatialGrid sgrid;
  TimeGrid tgrid;
  Trajectory p;
  int iterations = 1;  // fixed-point count (1 for unconstrained problems)
};

struct SpaceTimeOptions {
  int max_fixed_point = 50;
  double fixed_point_tol = 1e-10;
  double damping = 1.0;  // plain iteration by default
};

namespace spacetime_detail {

// Dense second-difference operator on the interior nodes (Dirichlet rows
// eliminated); approximates the Laplacian.
inline DenseMatrix second_difference(const SpatialGrid& g) {
  const int m = g.interior();
  const double c = 1.0 / (g.h * g.h);
  DenseMatrix D(m, m);
  for (int i = 0; i < m; ++i) {
    D(i, i) = -2.0 * c;
    if (i > 0) D(i, i - 1) = c;
    if (i + 1 < m) D(i, i + 1) = c;
  }
  return D;
}

inline DenseMatrix matmul(const DenseMatrix& A, const DenseMatrix& B) {
  DenseMatrix C(A.rows, B.cols);
  for (int i = 0; i < A.rows; ++i)
    for (int k = 0; k < A.cols; ++k) {
      const double aik = A(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < B.cols; ++j) C(i, j) += aik * B(k, j);
    }
  return C;
}

// Spatial operator shared by every time block:
//   W = dx * D^2 + (1/alpha) sum_i b_i b_i^T.
// The control coupling uses lumped pointwise loads b_i = dx * chi_i(x_j),
// the quadrature consistent with the finite-difference operator: a load
// whose shape deviates from the nodal chi would leak a persistent spurious
// component into the adjoint and pollute the boundary estimator.
struct SpatialPart {
  DenseMatrix D;       // second difference
  DenseMatrix W;       // dx*D^2 + control coupling
  DenseMatrix A0;      // coarse stiffness (for the t=0 gradient term)
  std::vector<dvec> loads;      // lumped control loads dx*chi_i
  std::vector<dvec> chi_nodal;  // chi_i at interior nodes
  double dx = 0.0;

  SpatialPart(const ProblemSpec& spec, const SpatialGrid& g) {
    dx = g.h;
    const int m = g.interior();
    D = second_difference(g);
    W = matmul(D, D);
    for (double& v : W.a) v *= dx;
    loads.resize(spec.m);
    chi_nodal.resize(spec.m);
    for (int i = 0; i < spec.m; ++i) {
      chi_nodal[i] = sample_interior(g, spec.chi[i]);
      loads[i] = chi_nodal[i];
      scale(loads[i], dx);
      for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c)
          W(r, c) += loads[i][r] * loads[i][c] / spec.alpha;
    }
    A0 = DenseMatrix(m, m);
    const double c = 1.0 / dx;
    for (int i = 0; i < m; ++i) {
      A0(i, i) = 2.0 * c;
      if (i > 0) A0(i, i - 1) = -c;
      if (i + 1 < m) A0(i, i + 1) = -c;
    }
  }
};

// Block-tridiagonal symmetric positive definite solver (block Thomas with
// dense Cholesky pivot blocks).
struct BlockTridiagonalSPD {
  int n = 0, b = 0;
  std::vector<DenseMatrix> off;        // off[a]: coupling of nodes a-1, a
  std::vector<Cholesky> pivots;

  BlockTridiagonalSPD(std::vector<DenseMatrix> diag,
                      std::vector<DenseMatrix> off_blocks)
      : n(static_cast<int>(diag.size())),
        b(diag.empty() ? 0 : diag.front().rows),
        off(std::move(off_blocks)) {
    pivots.reserve(n);
    DenseMatrix phi = std::move(diag[0]);
    pivots.emplace_back(std::move(phi));
    for (int a = 1; a < n; ++a) {
      // phi_a = diag_a - off_a * phi_{a-1}^{-1} * off_a
      DenseMatrix correction(b, b);
      for (int c = 0; c < b; ++c) {
        dvec col(b);
        for (int r = 0; r < b; ++r) col[r] = off[a](r, c);
        col = pivots[a - 1].solve(std::move(col));
        for (int r = 0; r < b; ++r) {
          double s = 0.0;
          for (int k = 0; k < b; ++k) s += off[a](r, k) * col[k];
          correction(r, c) = s;
        }
      }
      DenseMatrix next = std::move(diag[a]);
      for (int r = 0; r < b; ++r)
        for (int c = 0; c < b; ++c) next(r, c) -= correction(r, c);
      pivots.emplace_back(std::move(next));
    }
  }

  // rhs laid out block-wise; solves in place.
  std::vector<dvec> solve(std::vector<dvec> rhs) const {
    for (int a = 1; a < n; ++a) {
      dvec prev = pivots[a - 1].solve(rhs[a - 1]);
      for (int r = 0; r < b; ++r) {
        double s = 0.0;
        for (int k = 0; k < b; ++k) s += off[a](r, k) * prev[k];
        rhs[a][r] -= s;
      }
    }
    rhs[n - 1] = pivots[n - 1].solve(std::move(rhs[n - 1]));
    for (int a = n - 2; a >= 0; --a) {
      dvec x = std::move(rhs[a]);
      for (int r = 0; r < b; ++r) {
        double s = 0.0;
        for (int k = 0; k < b; ++k) s += off[a + 1](r, k) * rhs[a + 1][k];
        x[r] -= s;
      }
      rhs[a] = pivots[a].solve(std::move(x));
    }
    return rhs;
  }
};

// Two-point Gauss nodes of [t0, t1].
inline std::array<double, 2> gauss_points(double t0, double t1) {
  const double mid = 0.5 * (t0 + t1), half = 0.5 * (t1 - t0);
  const double r = 0.57735026918962576451;  // 1/sqrt(3)
  return {mid - half * r, mid + half * r};
}

// Adaptive Simpson for vector-valued integrands. The benchmark data carry
// interior layers of width ~1e-4 that fixed quadrature on coarse intervals
// misses entirely, which would leave the time grids unpinned.
template <class F>
void adaptive_simpson_step(const F& f, double a, double b, const dvec& fa,
                           const dvec& fm, const dvec& fb, const dvec& whole,
                           double tol, int depth, dvec& out) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const dvec flm = f(lm), frm = f(rm);
  const std::size_t n = fa.size();
  dvec left(n), right(n);
  double err = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    left[i] = (m - a) / 6.0 * (fa[i] + 4.0 * flm[i] + fm[i]);
    right[i] = (b - m) / 6.0 * (fm[i] + 4.0 * frm[i] + fb[i]);
    err = std::max(err, std::abs(left[i] + right[i] - whole[i]));
  }
  if (depth <= 0 || err <= 15.0 * tol) {
    for (std::size_t i = 0; i < n; ++i)
      out[i] += left[i] + right[i] + (left[i] + right[i] - whole[i]) / 15.0;
    return;
  }
  adaptive_simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, out);
  adaptive_simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1,
                        out);
}

template <class F>
dvec adaptive_simpson(const F& f, double a, double b, double tol,
                      int depth = 48) {
  const dvec fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const std::size_t n = fa.size();
  dvec whole(n);
  for (std::size_t i = 0; i < n; ++i)
    whole[i] = (b - a) / 6.0 * (fa[i] + 4.0 * fm[i] + fb[i]);
  dvec out(n, 0.0);
  adaptive_simpson_step(f, a, b, fa, fm, fb, whole, tol, depth, out);
  return out;
}

// Interior data term dx * G_i(t) of the right-hand side, including the
// boundary lift from the ghost elimination of Delta p = y_d.
inline dvec scaled_data(const ProblemSpec& spec, const SpatialPart& sp,
                        const SpatialGrid& g, double t) {
  const int m = g.interior();
  dvec r(m);
  for (int i = 0; i < m; ++i) {
    const double x = (i + 1) * g.h;
    r[i] = spec.f(x, t) - spec.y_d_t(x, t) + spec.y_d_xx(x, t);
  }
  const double inv2 = 1.0 / (g.h * g.h);
  r[0] -= spec.y_d(0.0, t) * inv2;
  r[m - 1] -= spec.y_d(1.0, t) * inv2;
  for (double& v : r) v *= sp.dx;
  return r;
}

}  // namespace spacetime_detail

/// Assembled Galerkin(P1-in-time) x FD(space) system for the space-time
/// formulation; kept around so the constrained fixed point can reuse the
/// factorization.
class SpaceTimeSystem {
 public:
  SpaceTimeSystem(const ProblemSpec& spec, const SpatialGrid& sgrid,
                  const TimeGrid& tgrid)
      : spec_(&spec), sgrid_(sgrid), tgrid_(tgrid), sp_(spec, sgrid) {
    build();
  }

  /// Dense time blocks (for diagnostics and property tests).
  std::vector<DenseMatrix> diagonal_blocks() const { return diag_; }
  std::vector<DenseMatrix> offdiagonal_blocks() const { return off_; }

  /// Solve with the clamp correction frozen at `previous` (pass nullptr for
  /// the unconstrained problem). Returns nodal vectors for nodes 0..n-1.
  std::vector<dvec> solve(const Trajectory* previous) const {
    std::vector<dvec> rhs = base_rhs_;
    if (previous) add_clamp_correction(*previous, rhs);
    return solver_->solve(std::move(rhs));
  }

  Trajectory to_trajectory(std::vector<dvec> x) const {
    x.push_back(dvec(sgrid_.interior(), 0.0));  // p(T) = 0
    return Trajectory(tgrid_, std::move(x));
  }

  const spacetime_detail::SpatialPart& spatial() const { return sp_; }

 private:
  void build() {
    using namespace spacetime_detail;
    const int n = tgrid_.intervals();
    const int b = sgrid_.interior();
    const double dx = sgrid_.h;

    std::vector<DenseMatrix> diag(n, DenseMatrix(b, b));
    std::vector<DenseMatrix> off(n, DenseMatrix(b, b));  // off[0] unused
    auto add_scaled = [b](DenseMatrix& dst, double mass_c, double stiff_c,
                          const DenseMatrix& W, double dx_) {
      for (int r = 0; r < b; ++r) {
        dst(r, r) += stiff_c * dx_;
        for (int c = 0; c < b; ++c) dst(r, c) += mass_c * W(r, c);
      }
    };
    for (int a = 0; a < n; ++a) {
      double stiff = 0.0, mass = 0.0;
      if (a >= 1) {  // left interval a
        stiff += 1.0 / tgrid_.dt(a);
        mass += tgrid_.dt(a) / 3.0;
      }
      stiff += 1.0 / tgrid_.dt(a + 1);  // right interval a+1
      mass += tgrid_.dt(a + 1) / 3.0;
      add_scaled(diag[a], mass, stiff, sp_.W, dx);
      if (a >= 1)
        add_scaled(off[a], tgrid_.dt(a) / 6.0, -1.0 / tgrid_.dt(a), sp_.W, dx);
    }
    // t = 0 term: grad p(0) . grad v(0) via the coarse stiffness
    for (int r = 0; r < b; ++r)
      for (int c = 0; c < b; ++c) diag[0](r, c) += sp_.A0(r, c);

    // base right-hand side: hat-weighted data integrals, adaptive in time
    // so that boundary/interior layers in the data are captured
    base_rhs_.assign(n, dvec(b, 0.0));
    for (int j = 1; j <= n; ++j) {
      const double t0 = tgrid_.node(j - 1), t1 = tgrid_.node(j);
      auto weighted = [&](double t) {
        const dvec data = scaled_data(*spec_, sp_, sgrid_, t);
        const double s = (t - t0) / (t1 - t0);
        dvec both(2 * b);
        for (int i = 0; i < b; ++i) {
          both[i] = (1.0 - s) * data[i];
          both[b + i] = s * data[i];
        }
        return both;
      };
      const dvec probe = weighted(0.5 * (t0 + t1));
      double scale0 = 1.0;
      for (double v : weighted(t0)) scale0 = std::max(scale0, std::abs(v));
      for (double v : weighted(t1)) scale0 = std::max(scale0, std::abs(v));
      for (double v : probe) scale0 = std::max(scale0, std::abs(v));
      const dvec integral =
          adaptive_simpson(weighted, t0, t1, 1e-9 * scale0 * (t1 - t0));
      for (int i = 0; i < b; ++i) {
        base_rhs_[j - 1][i] += integral[i];
        if (j < n) base_rhs_[j][i] += integral[b + i];
      }
    }
    // initial term -int (y_d(0) - y0) v(0)
    for (int i = 0; i < b; ++i) {
      const double x = (i + 1) * dx;
      base_rhs_[0][i] -= dx * (spec_->y_d(x, 0.0) - spec_->y0(x));
    }

    diag_ = diag;
    off_ = off;
    solver_.emplace(std::move(diag), std::move(off));
  }

  // B (P(xi) - xi) with xi = -(1/alpha) B* p_prev, integrated against the
  // time hats; vanishes wherever no bound is active. The clamp kinks make
  // the integrand only piecewise smooth, hence adaptive quadrature again.
  void add_clamp_correction(const Trajectory& prev,
                            std::vector<dvec>& rhs) const {
    using namespace spacetime_detail;
    const int n = tgrid_.intervals();
    const int m = spec_->m;
    for (int j = 1; j <= n; ++j) {
      const double t0 = tgrid_.node(j - 1), t1 = tgrid_.node(j);
      auto corr_fn = [&](double t) {
        const double s = (t - t0) / (t1 - t0);
        dvec pv = prev.values[j - 1];
        scale(pv, 1.0 - s);
        axpy(s, prev.values[j], pv);
        dvec both(2 * m);
        for (int i = 0; i < m; ++i) {
          const double xi = -dot(sp_.loads[i], pv) / spec_->alpha;
          const double corr = spec_->clamp(i, t, xi) - xi;
          both[i] = (1.0 - s) * corr;
          both[m + i] = s * corr;
        }
        return both;
      };
      const dvec integral =
          adaptive_simpson(corr_fn, t0, t1, 1e-12 * (t1 - t0));
      for (int i = 0; i < m; ++i) {
        axpy(integral[i], sp_.loads[i], rhs[j - 1]);
        if (j < n) axpy(integral[m + i], sp_.loads[i], rhs[j]);
      }
    }
  }

  const ProblemSpec* spec_;
  SpatialGrid sgrid_;
  TimeGrid tgrid_;
  spacetime_detail::SpatialPart sp_;
  std::vector<DenseMatrix> diag_, off_;
  std::vector<dvec> base_rhs_;
  std::optional<spacetime_detail::BlockTridiagonalSPD> solver_;
};

inline bool has_finite_bounds(const ProblemSpec& spec) {
  for (int i = 0; i < spec.m; ++i) {
    // constant-in-t sentinel check at a few sample times
    for (double t : {0.0, 0.5 * spec.T, spec.T})
      if (spec.u_lower[i](t) || spec.u_upper[i](t)) return true;
  }
  return false;
}

/// Solve the space-time system. Unconstrained problems need one linear
/// solve; constrained ones run the fixed point with the clamp correction
/// frozen at the previous iterate, initialized with the unconstrained
/// solution.
inline SpaceTimeSolution assemble_and_solve(
    const ProblemSpec& spec, const SpatialGrid& sgrid, const TimeGrid& tgrid,
    const SpaceTimeOptions& opts = {}) {
  SpaceTimeSystem sys(spec, sgrid, tgrid);
  Trajectory p = sys.to_trajectory(sys.solve(nullptr));
  if (!has_finite_bounds(spec))
    return SpaceTimeSolution{sgrid, tgrid, std::move(p), 1};

  const double vol = tgrid.T() * 1.0;
  for (int it = 1; it <= opts.max_fixed_point; ++it) {
    Trajectory next = sys.to_trajectory(sys.solve(&p));
    if (opts.damping != 1.0) {
      for (int j = 0; j < tgrid.dof(); ++j) {
        scale(next.values[j], opts.damping);
        axpy(1.0 - opts.damping, p.values[j], next.values[j]);
      }
    }
    double diff = 0.0;
    for (int j = 0; j < tgrid.dof(); ++j) {
      dvec e = next.values[j];
      axpy(-1.0, p.values[j], e);
      diff += tgrid.weight(j) * sgrid.h * dot(e, e);
    }
    diff = std::sqrt(diff / vol);
    p = std::move(next);
    if (diff < opts.fixed_point_tol)
      return SpaceTimeSolution{sgrid, tgrid, std::move(p), it};
  }
  throw std::runtime_error(
      "spacetime fixed point: no convergence after " +
      std::to_string(opts.max_fixed_point) + " iterations");
}

/// Per-interval split of the residual estimator: interior part
/// dt_j^2 int_{I_j} ||interior residual||^2 and the boundary mismatch of
/// Delta p = y_d measured with one-sided second differences.
struct EtaReport {
  std::vector<double> interior_sq;  // per interval, 1-based shifted to 0
  std::vector<double> boundary_sq;

  double eta_interior() const {
    return std::sqrt(std::accumulate(interior_sq.begin(), interior_sq.end(), 0.0));
  }
  double eta_boundary() const {
    return std::sqrt(std::accumulate(boundary_sq.begin(), boundary_sq.end(), 0.0));
  }
  double eta_total() const {
    return std::sqrt(eta_interior() * eta_interior() +
                     eta_boundary() * eta_boundary());
  }
  double interval_eta(int j) const {  // j = 1..n
    return std::sqrt(interior_sq[j - 1] + boundary_sq[j - 1]);
  }
};

inline EtaReport eta_indicator(const SpaceTimeSolution& sol,
                               const ProblemSpec& spec) {
  using namespace spacetime_detail;
  const SpatialGrid& g = sol.sgrid;
  const TimeGrid& tg = sol.tgrid;
  const SpatialPart sp(spec, g);
  const int n = tg.intervals();
  const int m = g.interior();
  const double inv2 = 1.0 / (g.h * g.h);

  EtaReport rep;
  rep.interior_sq.assign(n, 0.0);
  rep.boundary_sq.assign(n, 0.0);

  for (int j = 1; j <= n; ++j) {
    const double t0 = tg.node(j - 1), t1 = tg.node(j);
    const double dt = tg.dt(j);
    // [ ||interior residual||^2 , boundary mismatch^2 ] at time t.
    // p_tt vanishes for the P1 reconstruction. Rows adjacent to the
    // boundary are excluded from the interior part: there the discrete
    // bilaplacian carries the Delta p = y_d coupling at a 1/dx^2 scale,
    // which the boundary part measures at O(1).
    auto point_terms = [&](double t) {
      const double s = (t - t0) / (t1 - t0);
      dvec pv = sol.p.values[j - 1];
      scale(pv, 1.0 - s);
      axpy(s, sol.p.values[j], pv);

      dvec r(m);
      for (int i = 0; i < m; ++i) {
        const double x = (i + 1) * g.h;
        r[i] = spec.f(x, t) - spec.y_d_t(x, t) + spec.y_d_xx(x, t);
      }
      for (int i = 0; i < spec.m; ++i) {
        const double xi = -dot(sp.loads[i], pv) / spec.alpha;
        const double u = spec.clamp(i, t, xi);
        axpy(u, sp.chi_nodal[i], r);
      }
      const dvec d2p = sp.D.apply(sp.D.apply(pv));
      axpy(-1.0, d2p, r);
      double rsq = 0.0;
      for (int i = 1; i + 1 < m; ++i) rsq += g.h * r[i] * r[i];

      const double lap0 = (-2.0 * pv[0] + (m > 1 ? pv[1] : 0.0)) * inv2;
      const double lap1 =
          (-2.0 * pv[m - 1] + (m > 1 ? pv[m - 2] : 0.0)) * inv2;
      const double b0 = spec.y_d(0.0, t) - lap0;
      const double b1 = spec.y_d(1.0, t) - lap1;
      return dvec{rsq, b0 * b0 + b1 * b1};
    };
    double scale0 = 1.0;
    for (double t : {t0, 0.5 * (t0 + t1), t1})
      for (double v : point_terms(t)) scale0 = std::max(scale0, v);
    const dvec integral =
        adaptive_simpson(point_terms, t0, t1, 1e-9 * scale0 * dt);
    rep.interior_sq[j - 1] = dt * dt * integral[0];
    rep.boundary_sq[j - 1] = integral[1];
  }
  return rep;
}

/// Snapshot-location control forecast u = P(-(1/alpha) B* p) on the coarse
/// grid, evaluated at the time nodes.
inline ControlTrajectory extract_control(const SpaceTimeSolution& sol,
                                         const ProblemSpec& spec) {
  std::vector<dvec> loads(spec.m);
  for (int i = 0; i < spec.m; ++i)
    loads[i] = control_load(sol.sgrid, spec.chi[i]);
  std::vector<dvec> u(sol.tgrid.dof(), dvec(spec.m, 0.0));
  for (int j = 0; j < sol.tgrid.dof(); ++j) {
    const double t = sol.tgrid.node(j);
    for (int i = 0; i < spec.m; ++i) {
      const double xi = -dot(loads[i], sol.p.values[j]) / spec.alpha;
      u[j][i] = spec.clamp(i, t, xi);
    }
  }
  return ControlTrajectory(sol.tgrid, std::move(u));
}

struct AdaptResult {
  TimeGrid grid;
  SpaceTimeSolution solution;
  bool budget_warning = false;
  int rounds = 0;
};

struct AdaptOptions {
  double theta = 0.5;        // max-marking fraction
  int initial_intervals = 5;
  SpaceTimeOptions solver;
};

/// Adaptive time-grid loop: solve -> estimate -> mark (eta_j >= theta max)
/// -> bisect, until the dof budget is met exactly. Marked sets are trimmed
/// by decreasing indicator so the final grid lands on the budget.
inline AdaptResult adapt(const ProblemSpec& spec, const SpatialGrid& sgrid,
                         int dof_budget, const AdaptOptions& opts = {}) {
  TimeGrid grid = TimeGrid::uniform(spec.T, opts.initial_intervals);
  AdaptResult out{grid, SpaceTimeSolution{sgrid, grid,
                                          Trajectory::zero(grid, sgrid.interior()), 0},
                  false, 0};
  if (dof_budget <= grid.dof()) {
    out.budget_warning = true;
    out.solution = assemble_and_solve(spec, sgrid, grid, opts.solver);
    return out;
  }
  while (grid.dof() < dof_budget) {
    SpaceTimeSolution sol = assemble_and_solve(spec, sgrid, grid, opts.solver);
    EtaReport eta = eta_indicator(sol, spec);
    double max_eta = 0.0;
    for (int j = 1; j <= grid.intervals(); ++j)
      max_eta = std::max(max_eta, eta.interval_eta(j));
    if (max_eta <= 0.0) break;  // nothing to refine (zero data)
    std::vector<int> marked;
    for (int j = 1; j <= grid.intervals(); ++j)
      if (eta.interval_eta(j) >= opts.theta * max_eta) marked.push_back(j);
    std::stable_sort(marked.begin(), marked.end(), [&](int a, int b2) {
      return eta.interval_eta(a) > eta.interval_eta(b2);
    });
    const int allowed = dof_budget - grid.dof();
    if (static_cast<int>(marked.size()) > allowed) marked.resize(allowed);
    grid = grid.bisect(marked);
    ++out.rounds;
  }
  out.grid = grid;
  out.solution = assemble_and_solve(spec, sgrid, grid, opts.solver);
  return out;
}

}  // namespace podloc

#endif  // PODLOC_SPACETIME_HPP
