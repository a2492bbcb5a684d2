#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "core/frame.hpp"
#include "core/models.hpp"

namespace smim::complexity {

struct XiOptions {
  int n_mc = 200000;
  int n_bins = 0;         // 0 = ceil(n_mc^(1/3)) per coordinate, capped at 64
  double c_mu = 0.25;     // gap-rule constants (Assumption-style rank selection)
  double gamma_gap = 4.0;
  int split_a = -1;       // unfolding split used for the rank t; -1 = floor(ell/2), (1,0) at ell=1
};

struct XiEstimate {
  double value = 0.0;
  double std_error = 0.0;
  int bins = 0;
  long long pairs = 0;
};

struct XiSpectrumEntry {
  int ell = 0;
  double xi_norm_sq = 0.0;   // trace of the second-moment matrix below
  double std_error = 0.0;
  Eigen::VectorXd mu;        // eigenvalues of Upsilon, descending
  int r = 0;                 // gap-rule rank
  int t = 0;                 // rank of Mat_{a,2l-a}(Z_0)
  int s0 = 0;                // rank of Mat_{1,2l-1}(Z_0)
  tensor::Frame u0_res;      // recovered directions, residual coordinates (d_res x s0)
  bool at_noise_floor = false;
  double noise_floor = 0.0;
};

// Binned pair U-statistic for ||xi_{U,l}||^2 = E_y ||E[H(z_U)|y_U]||_F^2.
// Within each label bin it averages <H(z_i), H(z_j)> over distinct pairs via
// the reproducing identity sqrt(N) Q_l(<z_i, z_j>); no tensors materialize.
// Standard error: multiplier bootstrap over per-sample projection scores.
XiEstimate estimate_xi_norm(const models::LinkSpec& link, const tensor::Frame& w,
                            const tensor::Frame& u, int ell, const XiOptions& opt, uint64_t seed);

// Frame-coefficient second moment: estimates the D x D matrix
// Upsilon = E[zeta zeta^T] from binned conditional means of the projected
// harmonic tensor, eigen-decomposes it, applies the gap rule for r, and
// derives (t, s0) plus the recovered subframe from the top-r eigen-tensors.
// The second moment is taken in the geometry induced by xi (coefficients
// whitened by T_W^(1/2) where T_W = (W^T)^{ox l} P_tf W^{ox l}), so that
// trace(Upsilon) equals ||xi||^2 exactly in population.
XiSpectrumEntry estimate_xi_spectrum(const models::LinkSpec& link, const tensor::Frame& w,
                                     const tensor::Frame& u, int ell, const XiOptions& opt,
                                     uint64_t seed);

// The q x q matrix of B -> sum_j h^(d)_{l,j} P_sym(tau^j(P_sym(B)) ox I_s^j)
// acting on order-l tensors over R^s (q = s^l); equals
// (W^T)^{ox l} P_tf W^{ox l} on the symmetric subspace for any d x s frame W.
Eigen::MatrixXd tw_operator(int d_ambient, int s, int ell);

}  // namespace smim::complexity
