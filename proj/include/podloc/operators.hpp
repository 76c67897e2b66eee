// SPDX-License-Identifier: Apache-2.0

#ifndef PODLOC_OPERATORS_HPP
#define PODLOC_OPERATORS_HPP

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "podloc/grid.hpp"

namespace podloc {

using ScalarFn = std::function<double(double)>;

/// Symmetric tridiagonal operator over the interior nodes of a SpatialGrid.
struct TridiagonalOperator {
  dvec sub, diag, super;

  int size() const { return static_cast<int>(diag.size()); }

  dvec apply(const dvec& v) const {
    const int m = size();
    dvec r(m, 0.0);
    for (int i = 0; i < m; ++i) {
      double s = diag[i] * v[i];
      if (i > 0) s += sub[i - 1] * v[i - 1];
      if (i + 1 < m) s += super[i] * v[i + 1];
      r[i] = s;
    }
    return r;
  }

  /// Bilinear form v^T Op w.
  double quad(const dvec& v, const dvec& w) const {
    const int m = size();
    double s = 0.0;
    for (int i = 0; i < m; ++i) {
      double row = diag[i] * w[i];
      if (i > 0) row += sub[i - 1] * w[i - 1];
      if (i + 1 < m) row += super[i] * w[i + 1];
      s += v[i] * row;
    }
    return s;
  }

  /// True when the LDL^T factorization succeeds with positive pivots.
  bool positive_definite() const {
    const int m = size();
    double d = diag[0];
    if (!(d > 0.0)) return false;
    for (int i = 1; i < m; ++i) {
      const double l = sub[i - 1] / d;
      d = diag[i] - l * sub[i - 1];
      if (!(d > 0.0)) return false;
    }
    return true;
  }
};

/// Solve (a*P + b*Q) x = rhs by the Thomas algorithm. P and Q must share
/// the interior layout; the combination is assumed nonsingular.
inline dvec tridiag_solve(const TridiagonalOperator& P, double a,
                          const TridiagonalOperator& Q, double b,
                          const dvec& rhs) {
  const int m = P.size();
  dvec c(m), d(m), x(rhs);
  // forward sweep
  double piv = a * P.diag[0] + b * Q.diag[0];
  if (piv == 0.0) throw std::runtime_error("tridiag_solve: zero pivot");
  c[0] = (m > 1) ? (a * P.super[0] + b * Q.super[0]) / piv : 0.0;
  x[0] /= piv;
  for (int i = 1; i < m; ++i) {
    const double lo = a * P.sub[i - 1] + b * Q.sub[i - 1];
    piv = a * P.diag[i] + b * Q.diag[i] - lo * c[i - 1];
    if (piv == 0.0) throw std::runtime_error("tridiag_solve: zero pivot");
    if (i + 1 < m) c[i] = (a * P.super[i] + b * Q.super[i]) / piv;
    x[i] = (x[i] - lo * x[i - 1]) / piv;
  }
  // back substitution
  for (int i = m - 2; i >= 0; --i) x[i] -= c[i] * x[i + 1];
  return x;
}

/// P1 mass matrix: diag 2h/3, off-diagonals h/6 (interior rows only).
inline TridiagonalOperator assemble_mass(const SpatialGrid& g) {
  if (g.n_x < 2) throw std::invalid_argument("assemble_mass: invalid grid");
  const int m = g.interior();
  TridiagonalOperator op;
  op.diag.assign(m, 2.0 * g.h / 3.0);
  op.sub.assign(m - 1, g.h / 6.0);
  op.super = op.sub;
  return op;
}

/// P1 stiffness matrix: diag 2/h, off-diagonals -1/h.
inline TridiagonalOperator assemble_stiffness(const SpatialGrid& g) {
  if (g.n_x < 2)
    throw std::invalid_argument("assemble_stiffness: invalid grid");
  const int m = g.interior();
  TridiagonalOperator op;
  op.diag.assign(m, 2.0 / g.h);
  op.sub.assign(m - 1, -1.0 / g.h);
  op.super = op.sub;
  return op;
}

namespace detail {
// Two-point Gauss abscissae on [0,1].
inline constexpr double kGaussA = 0.5 - 0.28867513459481288225;  // 1/(2*sqrt(3))
inline constexpr double kGaussB = 0.5 + 0.28867513459481288225;
}  // namespace detail

/// Load vector b_j = int g(x) phi_j(x) dx by two-point Gauss per element.
/// Doubles as the discrete action of the adjoint pairing: <g, v> = b^T v.
inline dvec load_vector(const SpatialGrid& grid, const ScalarFn& g) {
  const int m = grid.interior();
  dvec b(m, 0.0);
  const double h = grid.h;
  for (int e = 0; e < grid.n_x; ++e) {
    const double x0 = e * h;
    for (double s : {detail::kGaussA, detail::kGaussB}) {
      const double x = x0 + s * h;
      const double w = 0.5 * h;  // Gauss weight times element length
      const double val = g(x);
      // phi_e (left node) and phi_{e+1} (right node) on this element
      if (e >= 1) b[e - 1] += w * val * (1.0 - s);
      if (e + 1 <= m) b[e] += w * val * s;
    }
  }
  return b;
}

/// Control shape load: b_j = int chi(x) phi_j(x) dx.
inline dvec control_load(const SpatialGrid& grid, const ScalarFn& chi) {
  return load_vector(grid, chi);
}

/// Nodal samples of g at the interior nodes.
inline dvec sample_interior(const SpatialGrid& grid, const ScalarFn& g) {
  const int m = grid.interior();
  dvec v(m);
  for (int i = 0; i < m; ++i) v[i] = g((i + 1) * grid.h);
  return v;
}

// Small vector helpers shared across the library.
inline double dot(const dvec& a, const dvec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline void axpy(double a, const dvec& x, dvec& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

inline void scale(dvec& x, double a) {
  for (double& v : x) v *= a;
}

}  // namespace podloc

#endif  // PODLOC_OPERATORS_HPP
