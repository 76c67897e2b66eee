// SPDX-License-Identifier: Apache-2.0

#ifndef PODLOC_TRAJECTORY_HPP
#define PODLOC_TRAJECTORY_HPP

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "podloc/grid.hpp"
#include "podloc/operators.hpp"

namespace podloc {

using FieldFn = std::function<double(double, double)>;  // (x, t)

/// A space-time field: one interior coefficient vector per time node.
struct Trajectory {
  TimeGrid grid;
  std::vector<dvec> values;  // size dof, each of length n_x - 1

  Trajectory(TimeGrid g, std::vector<dvec> v)
      : grid(std::move(g)), values(std::move(v)) {
    if (static_cast<int>(values.size()) != grid.dof())
      throw std::invalid_argument("Trajectory: value count != grid dof");
  }

  static Trajectory zero(const TimeGrid& g, int interior) {
    return Trajectory(g, std::vector<dvec>(g.dof(), dvec(interior, 0.0)));
  }

  int interior() const {
    return values.empty() ? 0 : static_cast<int>(values.front().size());
  }

  /// Piecewise-linear evaluation in time.
  dvec at_time(double t) const {
    const int j = grid.locate(t);
    const double t0 = grid.node(j - 1), t1 = grid.node(j);
    const double s = (t - t0) / (t1 - t0);
    dvec out(values[j - 1]);
    scale(out, 1.0 - s);
    axpy(s, values[j], out);
    return out;
  }

  /// Resample onto a refined grid (new nodes interpolated linearly).
  Trajectory interpolate(const TimeGrid& fine) const {
    std::vector<dvec> v;
    v.reserve(fine.dof());
    for (int j = 0; j < fine.dof(); ++j) v.push_back(at_time(fine.node(j)));
    return Trajectory(fine, std::move(v));
  }
};

/// m control intensities per time node.
struct ControlTrajectory {
  TimeGrid grid;
  std::vector<dvec> values;  // size dof, each of length m

  ControlTrajectory(TimeGrid g, std::vector<dvec> v)
      : grid(std::move(g)), values(std::move(v)) {
    if (static_cast<int>(values.size()) != grid.dof())
      throw std::invalid_argument("ControlTrajectory: value count != dof");
  }

  static ControlTrajectory zero(const TimeGrid& g, int m) {
    return ControlTrajectory(g, std::vector<dvec>(g.dof(), dvec(m, 0.0)));
  }

  int intensities() const {
    return values.empty() ? 0 : static_cast<int>(values.front().size());
  }

  dvec at_time(double t) const {
    const int j = grid.locate(t);
    const double t0 = grid.node(j - 1), t1 = grid.node(j);
    const double s = (t - t0) / (t1 - t0);
    dvec out(values[j - 1]);
    scale(out, 1.0 - s);
    axpy(s, values[j], out);
    return out;
  }

  ControlTrajectory interpolate(const TimeGrid& fine) const {
    std::vector<dvec> v;
    v.reserve(fine.dof());
    for (int j = 0; j < fine.dof(); ++j) v.push_back(at_time(fine.node(j)));
    return ControlTrajectory(fine, std::move(v));
  }

  /// U-norm: sum over intensities of the trapezoidal L2(0,T) norm.
  double norm_U() const {
    double s = 0.0;
    for (int j = 0; j < grid.dof(); ++j)
      s += grid.weight(j) * dot(values[j], values[j]);
    return std::sqrt(s);
  }
};

inline Trajectory sample_field(const SpatialGrid& sg, const TimeGrid& tg,
                               const FieldFn& f) {
  std::vector<dvec> v;
  v.reserve(tg.dof());
  for (int j = 0; j < tg.dof(); ++j) {
    const double t = tg.node(j);
    v.push_back(sample_interior(sg, [&](double x) { return f(x, t); }));
  }
  return Trajectory(tg, std::move(v));
}

/// Space-time L2 norm via trapezoid in time and the mass form in space.
inline double space_time_l2(const TridiagonalOperator& mass,
                            const Trajectory& a) {
  double s = 0.0;
  for (int j = 0; j < a.grid.dof(); ++j)
    s += a.grid.weight(j) * mass.quad(a.values[j], a.values[j]);
  return std::sqrt(s);
}

inline double space_time_l2_diff(const TridiagonalOperator& mass,
                                 const Trajectory& a, const Trajectory& b) {
  double s = 0.0;
  for (int j = 0; j < a.grid.dof(); ++j) {
    dvec e = a.values[j];
    axpy(-1.0, b.values[j], e);
    s += a.grid.weight(j) * mass.quad(e, e);
  }
  return std::sqrt(s);
}

}  // namespace podloc

#endif  // PODLOC_TRAJECTORY_HPP
