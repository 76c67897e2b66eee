// SPDX-License-Identifier: Apache-2.0

#ifndef PODLOC_TESTS_HELPERS_HPP
#define PODLOC_TESTS_HELPERS_HPP

#include <cmath>

#include "podloc/problem.hpp"

namespace podloc_tests {

// Manufactured optimal control problem with smooth data (no layer):
//   y = sin(pi x) sin(pi t),  p = sin(pi x) t (1 - t),  chi = x(x-1),
// forcing and desired state derived from the optimality system.
inline podloc::ProblemSpec smooth_problem(double alpha = 0.5) {
  using podloc::ProblemSpec;
  const double pi = M_PI;
  auto chi = [](double x) { return x * (x - 1.0); };
  const double chi_sin = -4.0 / (pi * pi * pi);  // <chi, sin(pi .)>
  auto ubar = [=](double t) { return -chi_sin / alpha * t * (1.0 - t); };

  ProblemSpec s;
  s.id = 0;
  s.T = 1.0;
  s.alpha = alpha;
  s.m = 1;
  s.chi = {chi};
  s.f = [=](double x, double t) {
    return pi * std::sin(pi * x) *
               (std::cos(pi * t) + pi * std::sin(pi * t)) -
           chi(x) * ubar(t);
  };
  s.y_d = [=](double x, double t) {
    const double g = (1.0 - 2.0 * t) - pi * pi * t * (1.0 - t);
    return std::sin(pi * x) * (std::sin(pi * t) + g);
  };
  s.y_d_t = [=](double x, double t) {
    const double gp = -2.0 - pi * pi * (1.0 - 2.0 * t);
    return std::sin(pi * x) * (pi * std::cos(pi * t) + gp);
  };
  s.y_d_xx = [=](double x, double t) {
    const double g = (1.0 - 2.0 * t) - pi * pi * t * (1.0 - t);
    return -pi * pi * std::sin(pi * x) * (std::sin(pi * t) + g);
  };
  s.y0 = [](double) { return 0.0; };
  s.u_lower = {podloc::unbounded()};
  s.u_upper = {podloc::unbounded()};

  podloc::AnalyticSolution sol;
  sol.y = [=](double x, double t) {
    return std::sin(pi * x) * std::sin(pi * t);
  };
  sol.p = [=](double x, double t) {
    return std::sin(pi * x) * t * (1.0 - t);
  };
  sol.u = {ubar};
  s.analytic = std::move(sol);
  podloc::detail::check_analytic_consistency(s);
  return s;
}

}  // namespace podloc_tests

#endif  // PODLOC_TESTS_HELPERS_HPP
