#include "core/binning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace smim::estimator {

int Binning::total_bins() const {
  int total = 1;
  for (int c = 0; c < arity(); ++c) total *= coord_bins(c);
  return total;
}

int Binning::bin_of(const double* y) const {
  int idx = 0;
  for (int c = 0; c < arity(); ++c) {
    const auto& e = edges[c];
    const int k = static_cast<int>(std::upper_bound(e.begin(), e.end(), y[c]) - e.begin());
    idx = idx * coord_bins(c) + k;
  }
  return idx;
}

Binning Binning::equal_mass(const Eigen::MatrixXd& labels, int bins_per_coord, int max_total) {
  const int arity = static_cast<int>(labels.rows());
  const int n = static_cast<int>(labels.cols());
  if (n < 2) throw std::invalid_argument("binning: need at least 2 samples");
  int per = std::max(1, bins_per_coord);
  while (arity > 0 && std::pow(double(per), arity) > max_total && per > 1) --per;

  Binning b;
  b.edges.resize(arity);
  std::vector<double> sorted(n);
  for (int c = 0; c < arity; ++c) {
    for (int i = 0; i < n; ++i) sorted[i] = labels(c, i);
    std::sort(sorted.begin(), sorted.end());
    std::vector<double>& e = b.edges[c];
    for (int k = 1; k < per; ++k) {
      const double q = sorted[static_cast<std::size_t>(k) * n / per];
      if (e.empty() || q > e.back()) e.push_back(q);
    }
  }
  return b;
}

}  // namespace smim::estimator
