#pragma once

#include <Eigen/Dense>

#include "core/harmonic.hpp"
#include "core/kernel.hpp"
#include "core/models.hpp"

namespace smim::estimator {

struct UnfoldConfig {
  int ell = 2;
  int a = 1, b = 1;      // unfolding split, a + b = ell
  int t = -1;            // unfolding rank; -1 = adaptive
  int s0 = -1;           // signal rank; -1 = adaptive
  double tol = 1e-6;     // power-iteration projector tolerance
  int max_iter = -1;     // -1 = 50 * ceil(log d)
  int oversample = 2;    // extra power-iteration block columns
  double gamma = 0.0;    // spectral-gap diagnostic (reported, not enforced)

  static UnfoldConfig for_degree(int ell) {
    UnfoldConfig c;
    c.ell = ell;
    if (ell == 1) {
      c.a = 1;
      c.b = 0;
    } else {
      c.a = ell / 2;
      c.b = ell - ell / 2;
    }
    return c;
  }
};

// Implicit kernel-weighted second moment of unfolded harmonic tensors,
//   Mhat = (1 + delta_{a!=b}/(n-1)) sum_r [ S_r S_r^T - delta_{a!=b} D_r ],
//   S_r  = (1/n) sum_i T_r(y_i) Mat_{a,b}(H(z_i)),
//   D_r  = (1/n^2) sum_i T_r(y_i)^2 Mat_{a,b}(H(z_i)) Mat_{a,b}(H(z_i))^T.
// Products never materialize the d^a x d^b unfoldings; one matvec costs
// O(n (d^a + d^b + m d^b)). The per-sample sum is chunked with a fixed chunk
// size and tree-combined, so results are identical for any thread count.
class MhatOperator {
 public:
  MhatOperator(const models::Dataset& data, const Kernel& kernel, const UnfoldConfig& cfg);

  Eigen::Index dim() const { return rows_; }
  int kernel_rank() const { return static_cast<int>(feats_.rows()); }
  bool symmetric_split() const { return a_ == b_; }

  void matvec(const Eigen::VectorXd& v, Eigen::VectorXd& out) const;

 private:
  const models::Dataset& data_;
  int ell_, a_, b_;
  Eigen::Index rows_, cols_;
  double factor_;
  Eigen::MatrixXd feats_;       // rank x n, precomputed T_r(y_i)
  Eigen::VectorXd feat_sq_;     // n, sum_r T_r(y_i)^2
  harmonic::HarmonicEvaluator ev_;
};

}  // namespace smim::estimator
