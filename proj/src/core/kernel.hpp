#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "core/binning.hpp"
#include "core/frame.hpp"
#include "core/models.hpp"
#include "core/rng.hpp"

namespace smim::estimator {

// Finite-rank PSD kernel over labels, realized as a per-bin feature table:
// K(y, y') = sum_r T_r(y) T_r(y'). A symmetrized kernel additionally carries
// rotations of the trailing rot_dim label coordinates; its feature vector is
// the concatenation over rotations of the base features, scaled by
// 1/sqrt(#rotations).
class Kernel {
 public:
  Binning binning;
  Eigen::MatrixXd table;  // base_rank x total_bins
  double b_cap = 1e4;     // bound B_K enforced by clamping
  bool degenerate = false;
  int rot_dim = 0;
  std::vector<Eigen::MatrixXd> rotations;  // each rot_dim x rot_dim

  int base_rank() const { return static_cast<int>(table.rows()); }
  int rank() const { return base_rank() * std::max<int>(1, rotations.size()); }
  int label_arity() const { return binning.arity(); }

  // Writes the rank()-dimensional feature vector of label y.
  void features(const double* y, Eigen::VectorXd& out) const;

  double eval(const double* y1, const double* y2) const;

  std::string to_json() const;
  static Kernel from_json(const std::string& text);
  void save(const std::string& path) const;
  static Kernel load(const std::string& path);
};

struct OracleKernelOptions {
  int n_cal = 20000;     // calibration sample size
  int n_bins = 16;       // per label coordinate
  double b_cap = 1e4;    // feature clamp
  double rel_tol = 1e-3; // eigenvalue floor relative to the top one
};

// Oracle kernel for the (possibly reduced) model: calibrates the conditional
// mean of the frame coefficients of H_{d_res,ell}(z_res) by label binning,
// whitens with the pseudo-inverted second-moment matrix and returns bin-lookup
// features. `u_ref` is the already-conditioned subframe (may be empty); the
// calibration simulates (link, w_ref) and conditions on it, so labels are the
// augmented (y, r_U).
Kernel oracle_kernel_reduced(const models::LinkSpec& link, const tensor::Frame& w_ref,
                             const tensor::Frame& u_ref, int ell, const OracleKernelOptions& opt,
                             uint64_t seed);

// Unconditioned case; draws a reference frame internally.
Kernel oracle_kernel(const models::LinkSpec& link, int d, int ell, const OracleKernelOptions& opt,
                     uint64_t seed);

// Haar-averaged kernel over the trailing s_rot label coordinates:
// K_bar((y,r),(y',r')) = (1/n_rot) sum_j K((y, g_j r), (y', g_j r')).
Kernel symmetrize_kernel(const Kernel& base, int s_rot, int n_rot, Rng& rng);

}  // namespace smim::estimator
