// SPDX-License-Identifier: Apache-2.0

#ifndef PODLOC_GRID_HPP
#define PODLOC_GRID_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace podloc {

using dvec = std::vector<double>;

/// Uniform partition of the unit interval (0,1) into n_x elements.
/// Homogeneous Dirichlet conditions are assumed throughout, so all
/// assembled operators act on the n_x-1 interior nodes only.
struct SpatialGrid {
  int n_x = 0;
  double h = 0.0;

  static SpatialGrid unit(int n_x) {
    if (n_x < 2)
      throw std::invalid_argument("SpatialGrid: need at least 2 elements");
    SpatialGrid g;
    g.n_x = n_x;
    g.h = 1.0 / n_x;
    return g;
  }

  int interior() const { return n_x - 1; }
  double node(int j) const { return j * h; }  // j = 0..n_x
};

/// Nonuniform time partition 0 = t_0 < ... < t_n = T with trapezoidal
/// quadrature weights beta_j.
class TimeGrid {
 public:
  static TimeGrid uniform(double T, int n) {
    std::vector<double> t(n + 1);
    for (int j = 0; j <= n; ++j) t[j] = T * j / n;
    t[n] = T;
    return TimeGrid(std::move(t));
  }

  explicit TimeGrid(std::vector<double> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.size() < 2)
      throw std::invalid_argument("TimeGrid: need at least 2 nodes");
    for (std::size_t j = 1; j < nodes_.size(); ++j)
      if (!(nodes_[j] > nodes_[j - 1]))
        throw std::invalid_argument("TimeGrid: nodes must strictly increase");
    recompute_weights();
  }

  int intervals() const { return static_cast<int>(nodes_.size()) - 1; }
  int dof() const { return static_cast<int>(nodes_.size()); }
  double T() const { return nodes_.back(); }
  double node(int j) const { return nodes_[j]; }
  const std::vector<double>& nodes() const { return nodes_; }

  /// Interval length dt_j = t_j - t_{j-1}, j = 1..n.
  double dt(int j) const { return nodes_[j] - nodes_[j - 1]; }

  double weight(int j) const { return weights_[j]; }
  const std::vector<double>& weights() const { return weights_; }

  /// Replace every marked interval (1-based index) by its two halves.
  TimeGrid bisect(const std::vector<int>& marked) const {
    std::vector<char> is_marked(intervals() + 1, 0);
    for (int j : marked) {
      if (j < 1 || j > intervals())
        throw std::invalid_argument("TimeGrid::bisect: interval out of range");
      is_marked[j] = 1;
    }
    std::vector<double> out;
    out.reserve(nodes_.size() + marked.size());
    out.push_back(nodes_[0]);
    for (int j = 1; j <= intervals(); ++j) {
      if (is_marked[j]) out.push_back(0.5 * (nodes_[j - 1] + nodes_[j]));
      out.push_back(nodes_[j]);
    }
    return TimeGrid(std::move(out));
  }

  /// Index j in 1..n of the interval containing t (right-closed).
  int locate(double t) const {
    if (t <= nodes_.front()) return 1;
    if (t >= nodes_.back()) return intervals();
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
    int j = static_cast<int>(it - nodes_.begin());
    return std::min(std::max(j, 1), intervals());
  }

 private:
  void recompute_weights() {
    const int n = intervals();
    weights_.assign(n + 1, 0.0);
    weights_[0] = 0.5 * dt(1);
    weights_[n] = 0.5 * dt(n);
    for (int j = 1; j < n; ++j) weights_[j] = 0.5 * (dt(j) + dt(j + 1));
  }

  std::vector<double> nodes_;
  std::vector<double> weights_;
};

/// Trapezoidal rule over the grid: sum_j beta_j values[j].
inline double time_quadrature(const TimeGrid& g, const dvec& values) {
  double s = 0.0;
  for (int j = 0; j < g.dof(); ++j) s += g.weight(j) * values[j];
  return s;
}

}  // namespace podloc

#endif  // PODLOC_GRID_HPP
