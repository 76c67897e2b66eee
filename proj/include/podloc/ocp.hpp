// SPDX-License-Identifier: Apache-2.0

#ifndef PODLOC_OCP_HPP
#define PODLOC_OCP_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

#include "podloc/parabolic.hpp"
#include "podloc/pod.hpp"
#include "podloc/problem.hpp"

namespace podloc {

/// Tracking cost J(y,u) = 1/2 ||y - y_d||^2 + alpha/2 ||u||_U^2 by
/// trapezoidal-in-time, mass-in-space quadrature.
inline double cost(const ProblemSpec& spec, const SpatialGrid& sg,
                   const TimeGrid& tg, const Trajectory& y,
                   const ControlTrajectory& u) {
  const auto mass = assemble_mass(sg);
  double s = 0.0;
  for (int j = 0; j < tg.dof(); ++j) {
    const double t = tg.node(j);
    dvec e = y.values[j];
    axpy(-1.0, sample_interior(sg, [&](double x) { return spec.y_d(x, t); }),
         e);
    s += 0.5 * tg.weight(j) * mass.quad(e, e);
    s += 0.5 * spec.alpha * tg.weight(j) * dot(u.values[j], u.values[j]);
  }
  return s;
}

/// Self-consistent optimal triple reported by the solver: the control is
/// stored exactly as the clamped projection of the adjoint (variational
/// discretization), the state is re-solved at that control.
struct FinalizedSolution {
  Trajectory state;
  Trajectory adjoint;
  ControlTrajectory control;
  double cost = 0.0;
};

/// Full-order model: implicit Euler state / adjoint solves on the fine
/// spatial grid. The gradient is the exact transpose of the discrete
/// scheme with respect to the trapezoidal cost.
class FullOcpModel {
 public:
  FullOcpModel(const ProblemSpec& spec, const SpatialGrid& sg,
               const TimeGrid& tg)
      : spec_(&spec), sg_(sg), tg_(tg), mass_(assemble_mass(sg)),
        stiff_(assemble_stiffness(sg)) {
    loads_.resize(spec.m);
    for (int i = 0; i < spec.m; ++i)
      loads_[i] = control_load(sg, spec.chi[i]);
    f_loads_.reserve(tg.dof());
    yd_nodal_.reserve(tg.dof());
    for (int j = 0; j < tg.dof(); ++j) {
      const double t = tg.node(j);
      f_loads_.push_back(
          load_vector(sg, [&](double x) { return spec.f(x, t); }));
      yd_nodal_.push_back(
          sample_interior(sg, [&](double x) { return spec.y_d(x, t); }));
    }
    y0_ = sample_interior(sg, spec.y0);
  }

  const TimeGrid& tgrid() const { return tg_; }
  int intensities() const { return spec_->m; }
  double alpha() const { return spec_->alpha; }
  double clamp(int i, double t, double v) const { return spec_->clamp(i, t, v); }

  std::vector<dvec> solve_state_vectors(const ControlTrajectory& u) const {
    std::vector<dvec> y;
    y.reserve(tg_.dof());
    y.push_back(y0_);
    for (int j = 1; j < tg_.dof(); ++j) {
      const double dt = tg_.dt(j);
      dvec rhs = mass_.apply(y.back());
      axpy(dt, f_loads_[j], rhs);
      for (int i = 0; i < spec_->m; ++i)
        axpy(dt * u.values[j][i], loads_[i], rhs);
      y.push_back(tridiag_solve(mass_, 1.0, stiff_, dt, rhs));
    }
    return y;
  }

  double cost(const ControlTrajectory& u) const {
    return cost_of(solve_state_vectors(u), u);
  }

  ControlTrajectory gradient(const ControlTrajectory& u) const {
    const auto y = solve_state_vectors(u);
    const int n = tg_.intervals();
    std::vector<dvec> g(tg_.dof(), dvec(spec_->m, 0.0));
    dvec lam(sg_.interior(), 0.0);
    for (int j = n; j >= 1; --j) {
      dvec misfit = y[j];
      axpy(-1.0, yd_nodal_[j], misfit);
      dvec rhs = mass_.apply(lam);
      axpy(tg_.weight(j), mass_.apply(misfit), rhs);
      lam = tridiag_solve(mass_, 1.0, stiff_, tg_.dt(j), rhs);
      const double c = tg_.dt(j) / tg_.weight(j);
      for (int i = 0; i < spec_->m; ++i)
        g[j][i] = spec_->alpha * u.values[j][i] + c * dot(loads_[i], lam);
    }
    for (int i = 0; i < spec_->m; ++i)
      g[0][i] = spec_->alpha * u.values[0][i];
    return ControlTrajectory(tg_, std::move(g));
  }

  FinalizedSolution finalize(const ControlTrajectory& u) const {
    Trajectory y(tg_, solve_state_vectors(u));
    Trajectory q = solve_adjoint(*spec_, sg_, tg_, y);
    std::vector<dvec> uc(tg_.dof(), dvec(spec_->m, 0.0));
    for (int j = 0; j < tg_.dof(); ++j) {
      const double t = tg_.node(j);
      for (int i = 0; i < spec_->m; ++i)
        uc[j][i] = spec_->clamp(
            i, t, -dot(loads_[i], q.values[j]) / spec_->alpha);
    }
    ControlTrajectory ustar(tg_, std::move(uc));
    Trajectory y2(tg_, solve_state_vectors(ustar));
    const double J = cost_of(y2.values, ustar);
    return FinalizedSolution{std::move(y2), std::move(q), std::move(ustar), J};
  }

 private:
  double cost_of(const std::vector<dvec>& y, const ControlTrajectory& u) const {
    double s = 0.0;
    for (int j = 0; j < tg_.dof(); ++j) {
      dvec e = y[j];
      axpy(-1.0, yd_nodal_[j], e);
      s += 0.5 * tg_.weight(j) * mass_.quad(e, e);
      s += 0.5 * spec_->alpha * tg_.weight(j) *
           dot(u.values[j], u.values[j]);
    }
    return s;
  }

  const ProblemSpec* spec_;
  SpatialGrid sg_;
  TimeGrid tg_;
  TridiagonalOperator mass_, stiff_;
  std::vector<dvec> loads_;
  std::vector<dvec> f_loads_;
  std::vector<dvec> yd_nodal_;
  dvec y0_;
};

/// Galerkin-reduced model on a POD basis; mirrors the full-order schemes in
/// the ell-dimensional coefficient space.
class ReducedOcpModel {
 public:
  ReducedOcpModel(const ProblemSpec& spec, const ReducedModel& rom,
                  const SpatialGrid& sg, const TimeGrid& tg)
      : spec_(&spec), rom_(&rom), sg_(sg), tg_(tg) {
    const auto mass = assemble_mass(sg);
    fl_.reserve(tg.dof());
    ydl_.reserve(tg.dof());
    yd_sq_.reserve(tg.dof());
    for (int j = 0; j < tg.dof(); ++j) {
      const double t = tg.node(j);
      fl_.push_back(rom.f(t));
      ydl_.push_back(rom.y_d(t));
      const dvec ydn =
          sample_interior(sg, [&](double x) { return spec.y_d(x, t); });
      yd_sq_.push_back(mass.quad(ydn, ydn));
    }
  }

  const TimeGrid& tgrid() const { return tg_; }
  int intensities() const { return spec_->m; }
  double alpha() const { return spec_->alpha; }
  double clamp(int i, double t, double v) const { return spec_->clamp(i, t, v); }
  int ell() const { return rom_->ell(); }

  std::vector<dvec> solve_state_coeffs(const ControlTrajectory& u) const {
    const int l = ell();
    std::vector<dvec> w;
    w.reserve(tg_.dof());
    w.push_back(Cholesky(rom_->M).solve(rom_->y0));
    for (int j = 1; j < tg_.dof(); ++j) {
      const double dt = tg_.dt(j);
      dvec rhs = rom_->M.apply(w.back());
      axpy(dt, fl_[j], rhs);
      for (int i = 0; i < spec_->m; ++i)
        for (int k = 0; k < l; ++k)
          rhs[k] += dt * u.values[j][i] * rom_->B(k, i);
      w.push_back(step_solver(dt).solve(std::move(rhs)));
    }
    return w;
  }

  std::vector<dvec> solve_adjoint_coeffs(const std::vector<dvec>& w) const {
    const int n = tg_.intervals();
    std::vector<dvec> q(tg_.dof(), dvec(ell(), 0.0));
    for (int j = n; j >= 1; --j) {
      const double dt = tg_.dt(j);
      dvec misfit = rom_->M.apply(w[j - 1]);
      axpy(-1.0, ydl_[j - 1], misfit);
      dvec rhs = rom_->M.apply(q[j]);
      axpy(dt, misfit, rhs);
      q[j - 1] = step_solver(dt).solve(std::move(rhs));
    }
    return q;
  }

  double cost(const ControlTrajectory& u) const {
    return cost_of(solve_state_coeffs(u), u);
  }

  ControlTrajectory gradient(const ControlTrajectory& u) const {
    const auto w = solve_state_coeffs(u);
    const int n = tg_.intervals();
    std::vector<dvec> g(tg_.dof(), dvec(spec_->m, 0.0));
    dvec lam(ell(), 0.0);
    for (int j = n; j >= 1; --j) {
      dvec misfit = rom_->M.apply(w[j]);
      axpy(-1.0, ydl_[j], misfit);
      dvec rhs = rom_->M.apply(lam);
      axpy(tg_.weight(j), misfit, rhs);
      lam = step_solver(tg_.dt(j)).solve(std::move(rhs));
      const double c = tg_.dt(j) / tg_.weight(j);
      for (int i = 0; i < spec_->m; ++i) {
        double bl = 0.0;
        for (int k = 0; k < ell(); ++k) bl += rom_->B(k, i) * lam[k];
        g[j][i] = spec_->alpha * u.values[j][i] + c * bl;
      }
    }
    for (int i = 0; i < spec_->m; ++i)
      g[0][i] = spec_->alpha * u.values[0][i];
    return ControlTrajectory(tg_, std::move(g));
  }

  Trajectory lift(const std::vector<dvec>& coeffs) const {
    std::vector<dvec> v;
    v.reserve(coeffs.size());
    for (const dvec& c : coeffs) v.push_back(reconstruct(rom_->basis, c));
    return Trajectory(tg_, std::move(v));
  }

  FinalizedSolution finalize(const ControlTrajectory& u) const {
    const auto w = solve_state_coeffs(u);
    const auto q = solve_adjoint_coeffs(w);
    std::vector<dvec> uc(tg_.dof(), dvec(spec_->m, 0.0));
    for (int j = 0; j < tg_.dof(); ++j) {
      const double t = tg_.node(j);
      for (int i = 0; i < spec_->m; ++i) {
        double bq = 0.0;
        for (int k = 0; k < ell(); ++k) bq += rom_->B(k, i) * q[j][k];
        uc[j][i] = spec_->clamp(i, t, -bq / spec_->alpha);
      }
    }
    ControlTrajectory ustar(tg_, std::move(uc));
    const auto w2 = solve_state_coeffs(ustar);
    const double J = cost_of(w2, ustar);
    return FinalizedSolution{lift(w2), lift(q), std::move(ustar), J};
  }

 private:
  Cholesky step_solver(double dt) const {
    DenseMatrix C = rom_->M;
    for (int i = 0; i < C.rows; ++i)
      for (int j = 0; j < C.cols; ++j) C(i, j) += dt * rom_->A(i, j);
    return Cholesky(std::move(C));
  }

  double cost_of(const std::vector<dvec>& w, const ControlTrajectory& u) const {
    double s = 0.0;
    for (int j = 0; j < tg_.dof(); ++j) {
      const dvec Mw = rom_->M.apply(w[j]);
      const double misfit =
          dot(w[j], Mw) - 2.0 * dot(w[j], ydl_[j]) + yd_sq_[j];
      s += 0.5 * tg_.weight(j) * misfit;
      s += 0.5 * spec_->alpha * tg_.weight(j) *
           dot(u.values[j], u.values[j]);
    }
    return s;
  }

  const ProblemSpec* spec_;
  const ReducedModel* rom_;
  SpatialGrid sg_;
  TimeGrid tg_;
  std::vector<dvec> fl_, ydl_;
  dvec yd_sq_;
};

struct OptimizerOptions {
  double tau_rel = 1e-3;
  double tau_abs = 1e-10;
  int max_iterations = 500;
  double armijo_c = 1e-4;
  int max_backtracks = 40;
};

enum class SolveStatus { converged, max_iterations, line_search_failure };

struct SolveReport {
  ControlTrajectory control;        // finalized (projection of the adjoint)
  ControlTrajectory iterate_control;  // raw optimizer fixed point
  Trajectory state;
  Trajectory adjoint;
  double cost = 0.0;
  dvec cost_history;
  dvec residual_history;
  int iterations = 0;
  SolveStatus status = SolveStatus::converged;
  double initial_residual = 0.0;
  double final_residual = 0.0;
};

namespace ocp_detail {

template <class Model>
ControlTrajectory clamped_step(const Model& model, const ControlTrajectory& u,
                               const ControlTrajectory& g, double s) {
  std::vector<dvec> v(u.values);
  for (int j = 0; j < u.grid.dof(); ++j) {
    const double t = u.grid.node(j);
    for (int i = 0; i < model.intensities(); ++i)
      v[j][i] = model.clamp(i, t, u.values[j][i] - s * g.values[j][i]);
  }
  return ControlTrajectory(u.grid, std::move(v));
}

inline double inner_U(const ControlTrajectory& a, const ControlTrajectory& b) {
  double s = 0.0;
  for (int j = 0; j < a.grid.dof(); ++j)
    s += a.grid.weight(j) * dot(a.values[j], b.values[j]);
  return s;
}

inline double diff_norm_U(const ControlTrajectory& a,
                          const ControlTrajectory& b) {
  double s = 0.0;
  for (int j = 0; j < a.grid.dof(); ++j) {
    dvec e = a.values[j];
    axpy(-1.0, b.values[j], e);
    s += a.grid.weight(j) * dot(e, e);
  }
  return std::sqrt(s);
}

}  // namespace ocp_detail

/// Projected gradient with Armijo backtracking. The returned triple is
/// finalized through the projection formula so control and adjoint satisfy
/// u = P(-(1/alpha) B* p) exactly at the time nodes.
template <class Model>
SolveReport projected_gradient(const Model& model, ControlTrajectory u,
                               const OptimizerOptions& opts = {}) {
  using namespace ocp_detail;
  ControlTrajectory g = model.gradient(u);
  double residual = diff_norm_U(u, clamped_step(model, u, g, 1.0));
  const double r0 = residual;
  double J = model.cost(u);

  dvec cost_history{J};
  dvec residual_history{residual};
  SolveStatus status = SolveStatus::max_iterations;

  int it = 0;
  while (it < opts.max_iterations) {
    if (residual <= opts.tau_rel * r0 + opts.tau_abs) {
      status = SolveStatus::converged;
      break;
    }
    double s = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < opts.max_backtracks; ++bt) {
      ControlTrajectory trial = clamped_step(model, u, g, s);
      ControlTrajectory step = trial;
      for (int j = 0; j < step.grid.dof(); ++j)
        axpy(-1.0, u.values[j], step.values[j]);
      const double slope = inner_U(g, step);
      const double Jt = model.cost(trial);
      if (Jt <= J + opts.armijo_c * slope) {
        u = std::move(trial);
        J = Jt;
        accepted = true;
        break;
      }
      s *= 0.5;
    }
    if (!accepted) {
      status = SolveStatus::line_search_failure;
      break;
    }
    ++it;
    g = model.gradient(u);
    residual = diff_norm_U(u, clamped_step(model, u, g, 1.0));
    cost_history.push_back(J);
    residual_history.push_back(residual);
  }

  FinalizedSolution fin = model.finalize(u);
  SolveReport rep{std::move(fin.control), std::move(u),
                  std::move(fin.state),  std::move(fin.adjoint),
                  fin.cost,              std::move(cost_history),
                  std::move(residual_history)};
  rep.iterations = it;
  rep.status = status;
  rep.initial_residual = r0;
  rep.final_residual = residual;
  return rep;
}

}  // namespace podloc

#endif  // PODLOC_OCP_HPP
