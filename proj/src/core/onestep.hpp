#pragma once

#include <Eigen/Dense>
#include <optional>

#include "core/eigs.hpp"
#include "core/frame.hpp"
#include "core/kernel.hpp"
#include "core/mhat.hpp"
#include "core/models.hpp"

namespace smim::estimator {

struct OneStepDiagnostics {
  Eigen::VectorXd mhat_eigs;  // Rayleigh-Ritz values of the iterated block
  Eigen::VectorXd p_eigs;     // full spectrum of the contraction matrix P
  int t = 0;                  // resolved unfolding rank
  int s0 = 0;                 // resolved signal rank
  int iterations = 0;
  bool converged = false;
  bool rank_deficient = false;
  bool stalled = false;
  double wall_ms = 0.0;
};

struct OneStepResult {
  tensor::Frame u0;  // d x s0
  OneStepDiagnostics diag;
};

// Algorithm: form the top-t eigenvectors of the implicit Mhat by subspace
// power iteration, contract them to the d x d matrix
// P = sum_s Mat_{1,a-1}(v_s) Mat_{1,a-1}(v_s)^T and return the top-s0
// eigenvectors of P. Ranks configured as -1 resolve adaptively: eigenvalues
// above median(bulk) + 4 MAD(bulk) count as signal.
OneStepResult one_step(const models::Dataset& data, const UnfoldConfig& cfg, const Kernel& kernel,
                       uint64_t seed, const Eigen::MatrixXd* init = nullptr);

// Adaptive rank rule used for both spectra.
int adaptive_rank(const Eigen::VectorXd& values_desc);

}  // namespace smim::estimator
