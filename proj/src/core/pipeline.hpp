#pragma once

#include <optional>
#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/multistep.hpp"
#include "core/planner.hpp"
#include "core/report.hpp"

namespace smim::pipeline {

// Everything cmd_estimate needs, resolved from the [estimator]/[planner]
// sections of a config (flat key=value text).
struct EstimateOptions {
  std::vector<int> degrees = {2};
  std::string kernel = "oracle";          // "oracle" or "table:path[,path...]"
  std::vector<std::pair<int, int>> ranks; // empty = from the reference recovery
  bool adaptive_ranks = false;            // "ranks = adaptive"
  double tol = 1e-6;
  int max_iter = -1;
  int n_rot = 16;
  int kernel_cal = 20000;
  int kernel_bins = 16;
  double b_cap = 1e4;
  int plan_mc = 60000;
  int plan_bins = 0;
  uint64_t seed = 1;
  int trials = 1;               // re-runs with per-trial estimator seeds
  std::string save_kernel_dir;  // empty = do not dump kernels

  static EstimateOptions from_config(const io::Config& cfg);
};

struct KernelChain {
  std::vector<estimator::Kernel> kernels;
  std::vector<std::pair<int, int>> ranks;      // resolved per step
  complexity::RecoverySequence reference;      // populated for oracle kernels
};

// Builds the per-step kernels for a degree sequence. Oracle kernels are
// calibrated on a simulated reference model: step t conditions the reference
// frame on the population recovery sequence and symmetrizes over the
// recovered coordinates. Table kernels load from files and leave ranks to the
// caller (adaptive when unspecified).
KernelChain build_kernel_chain(const models::LinkSpec& link, int d, const EstimateOptions& opt);

struct EstimateOutcome {
  tensor::Frame w_hat;
  io::json report;
  bool stalled = false;
};

EstimateOutcome run_estimate(const models::Dataset& data, const models::LinkSpec* link,
                             const EstimateOptions& opt, const tensor::Frame* truth);

// cmd_complexity: per-step spectra, chosen degrees, and predicted cost
// exponents for both modes side by side.
io::json run_complexity(const models::LinkSpec& link, const tensor::Frame& planted, int max_ell,
                        const complexity::XiOptions& opt, uint64_t seed);

io::json run_complexity_symbolic(const io::Config& cfg);

}  // namespace smim::pipeline
