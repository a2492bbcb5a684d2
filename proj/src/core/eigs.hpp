#pragma once

#include <Eigen/Dense>
#include <functional>

#include "core/rng.hpp"

namespace smim::estimator {

using Matvec = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct EigResult {
  Eigen::MatrixXd vectors;  // dim x k, orthonormal, Rayleigh-Ritz rotated
  Eigen::VectorXd values;   // k, descending
  int iterations = 0;
  bool converged = false;
};

// Block power iteration with positive-diagonal QR and a final Rayleigh-Ritz
// step. Stops when the projector distance between successive blocks drops
// below tol. The operator must be symmetric; values come out signed.
EigResult subspace_iteration(const Matvec& op, Eigen::Index dim, int k, double tol, int max_iter,
                             Rng& rng, const Eigen::MatrixXd* init = nullptr);

}  // namespace smim::estimator
