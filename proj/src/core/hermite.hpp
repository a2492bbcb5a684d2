#pragma once

#include <Eigen/Dense>

#include "core/tensor.hpp"

namespace smim::complexity {

inline constexpr int kMaxHermiteOrder = 4;

// Normalized Hermite tensor He_k(x) over R^d (dense; k <= 4).
tensor::Tensor hermite_tensor(const Eigen::VectorXd& x, int k);

// Generalized Laguerre polynomial L_n^{(alpha)}(x).
double laguerre(int n, double alpha, double x);

// beta^{(d)}_{k,l}(r): coefficient of <P_tf(tau^j A), H_{d,l}(z)> in the
// Hermite-to-harmonic decomposition of <A, He_k(x)>, with k - l = 2j even.
// Laguerre closed form; beta_coeff_sum is the finite-sum definition used as
// the cross-check.
double beta_coeff(int d, int k, int l, double r);
double beta_coeff_sum(int d, int k, int l, double r);

struct BetaMoments {
  double mean = 0.0;           // E_{r~chi_d} beta_{l+2j,l}(r)
  double second_moment = 0.0;  // E beta^2
  bool mean_vanishes = false;  // the (l/2)_j factor is identically 0 at l=0, j>=1
};

BetaMoments beta_moments(int d, int l, int j);

}  // namespace smim::complexity
