// SPDX-License-Identifier: Apache-2.0

#ifndef PODLOC_POD_HPP
#define PODLOC_POD_HPP

#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "podloc/linalg.hpp"
#include "podloc/problem.hpp"
#include "podloc/trajectory.hpp"

namespace podloc {

enum class InnerProduct { L2, H1 };

/// Snapshot ensemble: state, adjoint and adjoint time-derivative
/// trajectories on a common grid, plus the initial condition as an extra
/// column. Column weights are the trapezoidal beta_j (beta_0 for y0).
struct SnapshotSet {
  SpatialGrid sgrid;
  Trajectory state;
  Trajectory adjoint;
  Trajectory adjoint_dt;
  dvec initial;

  const TimeGrid& tgrid() const { return state.grid; }

  int columns() const { return 3 * state.grid.dof() + 1; }

  /// Column a and its quadrature weight, a = 0..columns()-1.
  std::pair<const dvec*, double> column(int a) const {
    const int d = state.grid.dof();
    if (a < d) return {&state.values[a], state.grid.weight(a)};
    if (a < 2 * d) return {&adjoint.values[a - d], state.grid.weight(a - d)};
    if (a < 3 * d)
      return {&adjoint_dt.values[a - 2 * d], state.grid.weight(a - 2 * d)};
    return {&initial, state.grid.weight(0)};
  }
};

/// Orthonormal POD modes with the full eigenvalue spectrum retained.
struct PODBasis {
  SpatialGrid sgrid;
  InnerProduct ip = InnerProduct::L2;
  std::vector<dvec> modes;  // ell modes
  dvec eigenvalues;         // all d, descending
  int ell = 0;
  bool truncated = false;  // requested rank exceeded the numerical rank

  double eigenvalue_tail() const {
    double s = 0.0;
    for (std::size_t i = ell; i < eigenvalues.size(); ++i)
      s += eigenvalues[i];
    return s;
  }

  TridiagonalOperator ip_operator() const {
    return ip == InnerProduct::L2 ? assemble_mass(sgrid)
                                  : assemble_stiffness(sgrid);
  }
};

/// Either a fixed rank or an energy tolerance on the neglected eigenvalues.
struct BasisSize {
  int ell = 0;          // > 0 picks a fixed rank
  double energy_tol = 0.0;

  static BasisSize rank(int l) { return {l, 0.0}; }
  static BasisSize tolerance(double tol) { return {0, tol}; }
};

/// Method of snapshots: weighted Gram matrix, symmetric eigendecomposition,
/// modes from the weighted snapshot combinations. A modified Gram-Schmidt
/// pass enforces orthonormality in the tagged inner product.
inline PODBasis compute_basis(const SnapshotSet& snaps, InnerProduct ip,
                              BasisSize size) {
  const auto W = ip == InnerProduct::L2 ? assemble_mass(snaps.sgrid)
                                        : assemble_stiffness(snaps.sgrid);
  const int nc = snaps.columns();

  DenseMatrix K(nc, nc);
  std::vector<dvec> wcol(nc);  // W * z_b, cached
  for (int b = 0; b < nc; ++b) wcol[b] = W.apply(*snaps.column(b).first);
  double kmax = 0.0;
  for (int a = 0; a < nc; ++a) {
    const auto [za, wa] = snaps.column(a);
    for (int b = a; b < nc; ++b) {
      const double wb = snaps.column(b).second;
      const double v = std::sqrt(wa * wb) * dot(*za, wcol[b]);
      K(a, b) = v;
      K(b, a) = v;
      kmax = std::max(kmax, std::abs(v));
    }
  }
  if (kmax == 0.0)
    throw std::runtime_error("compute_basis: all snapshots are zero");

  auto eig = jacobi_eigensymm(std::move(K));
  // clip roundoff negatives, reject anything genuinely negative
  const double neg_tol = 1e-12 * std::max(1.0, eig.values[0]);
  for (double& lam : eig.values) {
    if (lam < 0.0) {
      if (lam < -neg_tol)
        throw std::runtime_error("compute_basis: negative Gram eigenvalue");
      lam = 0.0;
    }
  }

  const double total = [&] {
    double s = 0.0;
    for (double lam : eig.values) s += lam;
    return s;
  }();
  int rank = 0;
  while (rank < nc && eig.values[rank] > 1e-13 * eig.values[0]) ++rank;

  int ell;
  bool truncated = false;
  if (size.ell > 0) {
    ell = size.ell;
    if (ell > rank) {
      ell = rank;
      truncated = true;
    }
  } else {
    ell = rank;
    double tail = total;
    for (int l = 0; l < rank; ++l) {
      tail -= eig.values[l];
      if (tail <= size.energy_tol * total) {
        ell = l + 1;
        break;
      }
    }
  }

  PODBasis basis;
  basis.sgrid = snaps.sgrid;
  basis.ip = ip;
  basis.eigenvalues = eig.values;
  basis.ell = ell;
  basis.truncated = truncated;
  basis.modes.reserve(ell);
  const int nx = snaps.sgrid.interior();
  for (int i = 0; i < ell; ++i) {
    dvec psi(nx, 0.0);
    const double inv = 1.0 / std::sqrt(eig.values[i]);
    for (int a = 0; a < nc; ++a) {
      const auto [za, wa] = snaps.column(a);
      axpy(inv * std::sqrt(wa) * eig.vectors(a, i), *za, psi);
    }
    basis.modes.push_back(std::move(psi));
  }

  // re-orthonormalize (Gram-Schmidt in the tagged inner product)
  for (int i = 0; i < ell; ++i) {
    dvec& psi = basis.modes[i];
    for (int k = 0; k < i; ++k) {
      const double c = W.quad(basis.modes[k], psi);
      axpy(-c, basis.modes[k], psi);
    }
    const double nrm = std::sqrt(W.quad(psi, psi));
    if (!(nrm > 0.0))
      throw std::runtime_error("compute_basis: rank collapse during MGS");
    scale(psi, 1.0 / nrm);
  }

  // deterministic sign: first significant component positive
  for (dvec& psi : basis.modes) {
    double amax = 0.0;
    for (double v : psi) amax = std::max(amax, std::abs(v));
    for (double v : psi) {
      if (std::abs(v) > 1e-12 * amax) {
        if (v < 0.0) scale(psi, -1.0);
        break;
      }
    }
  }
  return basis;
}

/// Projection coefficients <field, psi_i> in the tagged inner product.
inline dvec project(const PODBasis& basis, const dvec& field) {
  const auto W = basis.ip_operator();
  dvec c(basis.ell);
  for (int i = 0; i < basis.ell; ++i) c[i] = W.quad(basis.modes[i], field);
  return c;
}

inline dvec reconstruct(const PODBasis& basis, const dvec& coeffs) {
  dvec out(basis.sgrid.interior(), 0.0);
  for (int i = 0; i < basis.ell; ++i) axpy(coeffs[i], basis.modes[i], out);
  return out;
}

/// Weighted projection error of the whole ensemble; equals the eigenvalue
/// tail sum up to roundoff.
inline double projection_error(const SnapshotSet& snaps,
                               const PODBasis& basis) {
  const auto W = basis.ip_operator();
  double s = 0.0;
  for (int a = 0; a < snaps.columns(); ++a) {
    const auto [z, w] = snaps.column(a);
    dvec res = *z;
    for (int i = 0; i < basis.ell; ++i)
      axpy(-W.quad(basis.modes[i], *z), basis.modes[i], res);
    s += w * W.quad(res, res);
  }
  return s;
}

/// Galerkin-reduced operators and data projections.
struct ReducedModel {
  DenseMatrix M, A;  // ell x ell
  DenseMatrix B;     // ell x m (B(j,i) = <chi_i, psi_j>)
  dvec y0;
  std::function<dvec(double)> f;    // reduced source at time t
  std::function<dvec(double)> y_d;  // reduced desired state at time t
  PODBasis basis;
  int m = 0;

  int ell() const { return basis.ell; }
};

inline ReducedModel assemble_reduced(const PODBasis& basis,
                                     const ProblemSpec& spec,
                                     const SpatialGrid& sg) {
  const auto mass = assemble_mass(sg);
  const auto stiff = assemble_stiffness(sg);
  const int l = basis.ell;

  ReducedModel rom;
  rom.basis = basis;
  rom.m = spec.m;
  rom.M = DenseMatrix(l, l);
  rom.A = DenseMatrix(l, l);
  for (int i = 0; i < l; ++i)
    for (int j = 0; j < l; ++j) {
      rom.M(i, j) = mass.quad(basis.modes[j], basis.modes[i]);
      rom.A(i, j) = stiff.quad(basis.modes[j], basis.modes[i]);
    }
  rom.B = DenseMatrix(l, spec.m);
  for (int i = 0; i < spec.m; ++i) {
    const dvec b = control_load(sg, spec.chi[i]);
    for (int j = 0; j < l; ++j) rom.B(j, i) = dot(b, basis.modes[j]);
  }
  rom.y0 = [&] {
    const dvec y0n = sample_interior(sg, spec.y0);
    dvec r(l);
    for (int j = 0; j < l; ++j) r[j] = mass.quad(basis.modes[j], y0n);
    return r;
  }();

  auto project_samples = [mass, modes = basis.modes, sg,
                          l](const FieldFn& g, double t) {
    const dvec gn = sample_interior(sg, [&](double x) { return g(x, t); });
    dvec r(l);
    for (int j = 0; j < l; ++j) r[j] = mass.quad(modes[j], gn);
    return r;
  };
  rom.f = [=, f = spec.f](double t) { return project_samples(f, t); };
  rom.y_d = [=, yd = spec.y_d](double t) { return project_samples(yd, t); };
  return rom;
}

}  // namespace podloc

#endif  // PODLOC_POD_HPP
