#pragma once

#include <Eigen/Dense>
#include <vector>

namespace smim::estimator {

// Equal-mass product bins over label coordinates. Interior edges are per-
// coordinate quantiles of the calibration labels; duplicate edges (label
// atoms) collapse, so bins are never structurally empty on the calibration
// set. Lookup: coordinate bin = number of edges <= value, combined in mixed
// radix.
struct Binning {
  std::vector<std::vector<double>> edges;  // per coordinate, sorted interior edges

  int arity() const { return static_cast<int>(edges.size()); }
  int coord_bins(int c) const { return static_cast<int>(edges[c].size()) + 1; }
  int total_bins() const;
  int bin_of(const double* y) const;

  // labels: arity x n. Per-coordinate bin count is reduced until the total
  // stays within max_total.
  static Binning equal_mass(const Eigen::MatrixXd& labels, int bins_per_coord, int max_total = 4096);
};

}  // namespace smim::estimator
