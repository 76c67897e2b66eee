// SPDX-License-Identifier: Apache-2.0

#ifndef PODLOC_LINALG_HPP
#define PODLOC_LINALG_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "podloc/grid.hpp"

namespace podloc {

/// Minimal dense row-major matrix for the small systems in this library
/// (reduced models, Gram matrices, space-time blocks).
struct DenseMatrix {
  int rows = 0, cols = 0;
  dvec a;

  DenseMatrix() = default;
  DenseMatrix(int r, int c) : rows(r), cols(c), a(std::size_t(r) * c, 0.0) {}

  double& operator()(int i, int j) { return a[std::size_t(i) * cols + j]; }
  double operator()(int i, int j) const {
    return a[std::size_t(i) * cols + j];
  }

  static DenseMatrix identity(int n) {
    DenseMatrix I(n, n);
    for (int i = 0; i < n; ++i) I(i, i) = 1.0;
    return I;
  }

  dvec apply(const dvec& v) const {
    dvec r(rows, 0.0);
    for (int i = 0; i < rows; ++i) {
      double s = 0.0;
      for (int j = 0; j < cols; ++j) s += (*this)(i, j) * v[j];
      r[i] = s;
    }
    return r;
  }

  dvec apply_transposed(const dvec& v) const {
    dvec r(cols, 0.0);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) r[j] += (*this)(i, j) * v[i];
    return r;
  }

  double max_asymmetry() const {
    double s = 0.0;
    for (int i = 0; i < rows; ++i)
      for (int j = i + 1; j < cols; ++j)
        s = std::max(s, std::abs((*this)(i, j) - (*this)(j, i)));
    return s;
  }
};

/// In-place Cholesky factorization (lower triangle); throws if not SPD.
struct Cholesky {
  DenseMatrix L;

  explicit Cholesky(DenseMatrix m) : L(std::move(m)) {
    const int n = L.rows;
    for (int j = 0; j < n; ++j) {
      double d = L(j, j);
      for (int k = 0; k < j; ++k) d -= L(j, k) * L(j, k);
      if (!(d > 0.0))
        throw std::runtime_error("Cholesky: matrix not positive definite");
      const double lj = std::sqrt(d);
      L(j, j) = lj;
      for (int i = j + 1; i < n; ++i) {
        double s = L(i, j);
        for (int k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
        L(i, j) = s / lj;
      }
    }
  }

  dvec solve(dvec b) const {
    const int n = L.rows;
    for (int i = 0; i < n; ++i) {
      double s = b[i];
      for (int k = 0; k < i; ++k) s -= L(i, k) * b[k];
      b[i] = s / L(i, i);
    }
    for (int i = n - 1; i >= 0; --i) {
      double s = b[i];
      for (int k = i + 1; k < n; ++k) s -= L(k, i) * b[k];
      b[i] = s / L(i, i);
    }
    return b;
  }
};

struct SymmetricEigen {
  dvec values;         // descending
  DenseMatrix vectors; // column i is the eigenvector for values[i]
};

/// Cyclic Jacobi eigensolver for symmetric matrices. Deterministic sweep
/// order; eigenpairs sorted by descending eigenvalue.
inline SymmetricEigen jacobi_eigensymm(DenseMatrix K, double tol = 1e-13,
                                       int max_sweeps = 60) {
  const int n = K.rows;
  DenseMatrix V = DenseMatrix::identity(n);
  double norm = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) norm += K(i, j) * K(i, j);
  norm = std::sqrt(norm);
  const double stop = tol * std::max(norm, 1e-300);

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += 2.0 * K(i, j) * K(i, j);
    if (std::sqrt(off) <= stop) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = K(p, q);
        if (std::abs(apq) <= stop / n) continue;
        const double app = K(p, p), aqq = K(q, q);
        const double theta = 0.5 * (aqq - app) / apq;
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double kp = K(k, p), kq = K(k, q);
          K(k, p) = c * kp - s * kq;
          K(k, q) = s * kp + c * kq;
        }
        for (int k = 0; k < n; ++k) {
          const double pk = K(p, k), qk = K(q, k);
          K(p, k) = c * pk - s * qk;
          K(q, k) = s * pk + c * qk;
        }
        for (int k = 0; k < n; ++k) {
          const double vp = V(k, p), vq = V(k, q);
          V(k, p) = c * vp - s * vq;
          V(k, q) = s * vp + c * vq;
        }
      }
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return K(i, i) > K(j, j); });
  SymmetricEigen out;
  out.values.resize(n);
  out.vectors = DenseMatrix(n, n);
  for (int c = 0; c < n; ++c) {
    out.values[c] = K(order[c], order[c]);
    for (int r = 0; r < n; ++r) out.vectors(r, c) = V(r, order[c]);
  }
  return out;
}

}  // namespace podloc

#endif  // PODLOC_LINALG_HPP
