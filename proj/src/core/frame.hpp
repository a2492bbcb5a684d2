#pragma once

#include <Eigen/Dense>

#include "core/rng.hpp"

namespace smim::tensor {

// Orthonormal s-frame in R^d (columns of a d x s matrix with W^T W = I_s).
class Frame {
 public:
  Frame() = default;
  explicit Frame(Eigen::MatrixXd cols, double tol = 1e-12);
  static Frame unchecked(Eigen::MatrixXd cols) { return Frame(std::move(cols), Unchecked{}); }
  static Frame empty(int d) { return unchecked(Eigen::MatrixXd(d, 0)); }

  int dim() const { return static_cast<int>(cols_.rows()); }
  int rank() const { return static_cast<int>(cols_.cols()); }
  const Eigen::MatrixXd& cols() const { return cols_; }
  Eigen::VectorXd col(int i) const { return cols_.col(i); }

 private:
  struct Unchecked {};
  Frame(Eigen::MatrixXd cols, Unchecked) : cols_(std::move(cols)) {}
  Eigen::MatrixXd cols_;
};

// Thin QR with positive diagonal of R. Unique, so iterates transport exactly
// under rotation; used everywhere a deterministic orthonormalization matters.
Eigen::MatrixXd qr_positive(const Eigen::MatrixXd& m);

// Orthonormalization of an i.i.d. Gaussian d x s matrix (Haar on the Stiefel
// manifold with the positive-diagonal convention).
Frame random_frame(int d, int s, Rng& rng);

// Orthonormal complement (d x (d - s)), deterministic given the frame.
Frame complement(const Frame& f);

// Operator norm of the projector difference, via the Gram block of [U V].
double frame_distance(const Frame& u, const Frame& v);

// Concatenates the columns of a and b (spans must not overlap badly; the
// result is re-orthonormalized with the positive-diagonal convention).
Frame direct_sum(const Frame& a, const Frame& b);

}  // namespace smim::tensor
