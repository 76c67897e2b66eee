// SPDX-License-Identifier: Apache-2.0

#ifndef PODLOC_PROBLEM_HPP
#define PODLOC_PROBLEM_HPP

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "podloc/operators.hpp"
#include "podloc/trajectory.hpp"

namespace podloc {

/// Box bound as a function of time; nullopt means unbounded on that side.
using BoundFn = std::function<std::optional<double>(double)>;

inline BoundFn unbounded() {
  return [](double) { return std::nullopt; };
}

inline BoundFn constant_bound(double v) {
  return [v](double) { return std::optional<double>(v); };
}

inline double clamp_value(double v, const std::optional<double>& lo,
                          const std::optional<double>& hi) {
  if (lo && v < *lo) return *lo;
  if (hi && v > *hi) return *hi;
  return v;
}

/// Exact optimal triple, available for the benchmark problems.
struct AnalyticSolution {
  FieldFn y;
  FieldFn p;
  std::vector<ScalarFn> u;
  std::optional<double> J_opt;
};

/// Full definition of one linear-parabolic optimal control problem on
/// Omega = (0,1): tracking cost, m control intensities with fixed spatial
/// shapes, optional box constraints.
struct ProblemSpec {
  int id = 0;
  double T = 1.0;
  double alpha = 1.0;
  int m = 1;
  std::vector<ScalarFn> chi;
  FieldFn f;
  FieldFn y_d;
  FieldFn y_d_t;   // analytic d(y_d)/dt, used by the space-time residuals
  FieldFn y_d_xx;  // analytic Laplacian of y_d
  ScalarFn y0;
  std::vector<BoundFn> u_lower, u_upper;
  std::optional<AnalyticSolution> analytic;

  double clamp(int i, double t, double v) const {
    return clamp_value(v, u_lower[i](t), u_upper[i](t));
  }
};

namespace detail {

inline double simpson(const ScalarFn& g, double a, double b, int panels) {
  const double h = (b - a) / panels;
  double s = g(a) + g(b);
  for (int k = 1; k < panels; ++k) s += (k % 2 ? 4.0 : 2.0) * g(a + k * h);
  return s * h / 3.0;
}

// Verify u_i(t) == clamp(-(1/alpha) <chi_i, p(.,t)>) at sampled times.
inline void check_analytic_consistency(const ProblemSpec& spec) {
  const auto& sol = *spec.analytic;
  for (int i = 0; i < spec.m; ++i) {
    for (int k = 0; k <= 16; ++k) {
      const double t = spec.T * k / 16.0;
      const double inner = simpson(
          [&](double x) { return spec.chi[i](x) * sol.p(x, t); }, 0.0, 1.0,
          1024);
      const double u = spec.clamp(i, t, -inner / spec.alpha);
      if (std::abs(u - sol.u[i](t)) > 1e-8)
        throw std::logic_error("AnalyticSolution: projection formula violated");
    }
  }
}

}  // namespace detail

/// Steep layer in the adjoint towards t = 1; exact solution known.
inline ProblemSpec test1() {
  constexpr double eps = 1e-4;
  const double denom = 1.0 - std::exp(-1.0 / eps);
  auto E = [=](double t) {
    return (std::exp((t - 1.0) / eps) - std::exp(-1.0 / eps)) / denom;
  };
  auto Ep = [=](double t) { return std::exp((t - 1.0) / eps) / (eps * denom); };
  auto Epp = [=](double t) {
    return std::exp((t - 1.0) / eps) / (eps * eps * denom);
  };
  auto chi = [](double x) { return x * (x - 1.0); };
  const double pi = M_PI;

  ProblemSpec s;
  s.id = 1;
  s.T = 1.0;
  s.alpha = 1.0 / 30.0;
  s.m = 1;
  s.chi = {chi};
  s.f = [=](double x, double t) {
    return pi * std::sin(pi * x) * (std::cos(pi * t) + pi * std::sin(pi * t)) +
           chi(x) * (t - E(t));
  };
  s.y_d = [=](double x, double t) {
    return std::sin(pi * x) * std::sin(pi * t) + chi(x) * (1.0 - Ep(t)) +
           2.0 * (t - E(t));
  };
  s.y_d_t = [=](double x, double t) {
    return pi * std::sin(pi * x) * std::cos(pi * t) - chi(x) * Epp(t) +
           2.0 * (1.0 - Ep(t));
  };
  s.y_d_xx = [=](double x, double t) {
    return -pi * pi * std::sin(pi * x) * std::sin(pi * t) + 2.0 * (1.0 - Ep(t));
  };
  s.y0 = [](double) { return 0.0; };
  s.u_lower = {unbounded()};
  s.u_upper = {unbounded()};

  AnalyticSolution sol;
  sol.y = [=](double x, double t) {
    return std::sin(pi * x) * std::sin(pi * t);
  };
  sol.p = [=](double x, double t) { return chi(x) * (t - E(t)); };
  sol.u = {[=](double t) { return -t + E(t); }};
  sol.J_opt = 8.3988e+01;
  s.analytic = std::move(sol);
  detail::check_analytic_consistency(s);
  return s;
}

namespace detail {

// Shared data for tests 2 and 3 (interior layer at t = 1/2, two bump
// controls). Test 3 clamps the controls and adjusts the forcing term so the
// optimality system still holds exactly.
inline ProblemSpec make_test2(bool constrained) {
  constexpr double eps = 1e-4;
  const double pi = M_PI;
  const double cfac = 32.0 / (pi * pi * pi) - 8.0 / (pi * pi);
  auto at = [=](double t) { return std::atan((t - 0.5) / eps); };
  auto atp = [=](double t) {
    const double ss = (t - 0.5) / eps;
    return (1.0 / eps) / (1.0 + ss * ss);
  };
  auto atpp = [=](double t) {
    const double ss = (t - 0.5) / eps;
    const double q = 1.0 + ss * ss;
    return -2.0 * ss / (eps * eps * q * q);
  };
  auto chi1 = [](double x) {
    return std::max(0.0, 1.0 - 16.0 * (x - 0.25) * (x - 0.25));
  };
  auto chi2 = [](double x) {
    return std::max(0.0, 1.0 - 16.0 * (x - 0.75) * (x - 0.75));
  };
  auto ubar = [=](double t) { return -at(t) * (t - 1.0) * cfac; };

  ProblemSpec s;
  s.id = constrained ? 3 : 2;
  s.T = 1.0;
  s.alpha = 1.0;
  s.m = 2;
  s.chi = {chi1, chi2};
  if (constrained) {
    s.u_lower = {constant_bound(-100.0), constant_bound(-0.2)};
    s.u_upper = {constant_bound(0.1), constant_bound(0.0)};
  } else {
    s.u_lower = {unbounded(), unbounded()};
    s.u_upper = {unbounded(), unbounded()};
  }
  // capture bounds by value for the stored closures
  auto lo1 = s.u_lower[0], hi1 = s.u_upper[0];
  auto lo2 = s.u_lower[1], hi2 = s.u_upper[1];
  auto uc1 = [=](double t) { return clamp_value(ubar(t), lo1(t), hi1(t)); };
  auto uc2 = [=](double t) { return clamp_value(ubar(t), lo2(t), hi2(t)); };

  // f = y_t - Lap y - B u, with the (possibly clamped) optimal control.
  s.f = [=](double x, double t) {
    const double x3 = x * x * x;
    return x3 * (x - 1.0) - (12.0 * x * x - 6.0 * x) * t -
           (chi1(x) * uc1(t) + chi2(x) * uc2(t));
  };
  // y_d = y + p_t + Lap p
  s.y_d = [=](double x, double t) {
    const double x3 = x * x * x;
    const double g = atp(t) * (t - 1.0) + at(t) - pi * pi * at(t) * (t - 1.0);
    return x3 * (x - 1.0) * t + std::sin(pi * x) * g;
  };
  s.y_d_t = [=](double x, double t) {
    const double x3 = x * x * x;
    const double g = atpp(t) * (t - 1.0) + 2.0 * atp(t) -
                     pi * pi * (atp(t) * (t - 1.0) + at(t));
    return x3 * (x - 1.0) + std::sin(pi * x) * g;
  };
  s.y_d_xx = [=](double x, double t) {
    const double g = atp(t) * (t - 1.0) + at(t) - pi * pi * at(t) * (t - 1.0);
    return (12.0 * x * x - 6.0 * x) * t - pi * pi * std::sin(pi * x) * g;
  };
  s.y0 = [](double) { return 0.0; };

  AnalyticSolution sol;
  sol.y = [](double x, double t) { return x * x * x * (x - 1.0) * t; };
  sol.p = [=](double x, double t) {
    return std::sin(pi * x) * at(t) * (t - 1.0);
  };
  sol.u = {uc1, uc2};
  if (!constrained) sol.J_opt = 1.0085e+03;
  s.analytic = std::move(sol);
  check_analytic_consistency(s);
  return s;
}

}  // namespace detail

/// Interior layer at t = 1/2, two bump-shaped control actions.
inline ProblemSpec test2() { return detail::make_test2(false); }

/// Test 2 with box constraints u_1 in [-100, 0.1], u_2 in [-0.2, 0].
inline ProblemSpec test3() { return detail::make_test2(true); }

inline ProblemSpec problem_by_id(int id) {
  switch (id) {
    case 1: return test1();
    case 2: return test2();
    case 3: return test3();
    default: throw std::invalid_argument("problem id must be 1, 2 or 3");
  }
}

struct ErrorReport {
  double eps_y = 0.0, eps_u = 0.0, eps_p = 0.0;
};

/// Space-time L2 errors against the analytic optimal triple, sampled on the
/// solver's grids. The control error uses the U-norm.
inline ErrorReport error_norms(const ProblemSpec& spec, const SpatialGrid& sg,
                               const Trajectory& y, const ControlTrajectory& u,
                               const Trajectory& p) {
  if (!spec.analytic)
    throw std::runtime_error("error_norms: problem has no analytic solution");
  const auto& sol = *spec.analytic;
  const auto mass = assemble_mass(sg);
  ErrorReport r;
  r.eps_y = space_time_l2_diff(mass, y, sample_field(sg, y.grid, sol.y));
  r.eps_p = space_time_l2_diff(mass, p, sample_field(sg, p.grid, sol.p));
  double su = 0.0;
  for (int j = 0; j < u.grid.dof(); ++j) {
    const double t = u.grid.node(j);
    for (int i = 0; i < spec.m; ++i) {
      const double d = u.values[j][i] - sol.u[i](t);
      su += u.grid.weight(j) * d * d;
    }
  }
  r.eps_u = std::sqrt(su);
  return r;
}

}  // namespace podloc

#endif  // PODLOC_PROBLEM_HPP
