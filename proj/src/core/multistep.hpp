#pragma once

#include <vector>

#include "core/onestep.hpp"

namespace smim::estimator {

struct StepRecord {
  int ell = 0;
  tensor::Frame u_step;  // ambient coordinates
  OneStepDiagnostics diag;
};

struct RecoveryTrace {
  std::vector<StepRecord> steps;
  bool aborted = false;  // a step returned a degenerate frame
};

struct MultiStepResult {
  tensor::Frame w_hat;
  RecoveryTrace trace;
};

// Iterated unfolding: condition batch t on the accumulated frame, run the
// one-step procedure at degree[t] with kernel[t] (already symmetrized over
// the recovered coordinates), lift the result back to R^d and accumulate.
// One fresh batch per step. ranks[t] = (t, s0); (-1, -1) = adaptive.
MultiStepResult multi_step(const std::vector<models::Dataset>& batches,
                           const std::vector<int>& degrees, const std::vector<Kernel>& kernels,
                           const std::vector<std::pair<int, int>>& ranks, double tol, int max_iter,
                           uint64_t seed);

// Splits one dataset into T equal contiguous batches (the CLI path when a
// single dataset is supplied).
std::vector<models::Dataset> split_batches(const models::Dataset& data, int t);

}  // namespace smim::estimator
