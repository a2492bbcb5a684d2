#include "core/hermite.hpp"

#include <cmath>
#include <stdexcept>

#include "core/coeffs.hpp"

namespace smim::complexity {

tensor::Tensor hermite_tensor(const Eigen::VectorXd& x, int k) {
  if (k < 0 || k > kMaxHermiteOrder) throw std::length_error("hermite_tensor: order cap exceeded");
  const int d = static_cast<int>(x.size());
  if (k == 0) return tensor::Tensor::scalar(d, 1.0);
  tensor::Tensor out(d, k);
  for (int j = 0; 2 * j <= k; ++j) {
    const double c = ((j % 2 == 0) ? 1.0 : -1.0) * factorial(k) /
                     (std::pow(2.0, j) * factorial(j) * factorial(k - 2 * j));
    out += c * tensor::sym_with_identities(tensor::Tensor::rank_one(x, k - 2 * j), j);
  }
  out *= 1.0 / std::sqrt(factorial(k));
  return out;
}

double laguerre(int n, double alpha, double x) {
  double lm = 0.0, l0 = 1.0;
  for (int k = 1; k <= n; ++k) {
    const double next = ((2.0 * k - 1.0 + alpha - x) * l0 - (k - 1.0 + alpha) * lm) / k;
    lm = l0;
    l0 = next;
  }
  return l0;
}

double beta_coeff(int d, int k, int l, double r) {
  if (l < 0 || l > k || (k - l) % 2 != 0) throw std::invalid_argument("beta_coeff: parity mismatch");
  const int j = (k - l) / 2;
  const double sign = (j % 2 == 0) ? 1.0 : -1.0;
  const double c = sign * std::sqrt(factorial(k)) /
                   (std::pow(2.0, j) * kappa(d, l) * std::sqrt(harmonic_dim(d, l)) * factorial(l) *
                    pochhammer(0.5 * d + l, j));
  return c * std::pow(r, l) * laguerre(j, 0.5 * d + l - 1.0, 0.5 * r * r);
}

double beta_coeff_sum(int d, int k, int l, double r) {
  if (l < 0 || l > k || (k - l) % 2 != 0) throw std::invalid_argument("beta_coeff: parity mismatch");
  const int j = (k - l) / 2;
  double s = 0.0;
  for (int i = 0; i <= j; ++i) {
    const double sign = (i % 2 == 0) ? 1.0 : -1.0;
    s += sign * std::pow(r, k - 2 * i) / (std::pow(2.0, i) * factorial(i) * factorial(k - 2 * i)) *
         f_coeff(d, k - 2 * i, j - i);
  }
  return std::sqrt(factorial(k)) / (kappa(d, l) * std::sqrt(harmonic_dim(d, l))) * s;
}

BetaMoments beta_moments(int d, int l, int j) {
  if (d < 3) throw std::invalid_argument("beta_moments: need d >= 3");
  BetaMoments out;
  const double k2n = kappa2(d, l) * harmonic_dim(d, l);
  const double lfact = factorial(l);
  const double k = l + 2.0 * j;
  // E[r^l L_j(r^2/2)] involves Gamma(d/2 + l/2)/Gamma(d/2) and (l/2)_j
  const double gamma_ratio = std::exp(std::lgamma(0.5 * d + 0.5 * l) - std::lgamma(0.5 * d));
  const double sign = (j % 2 == 0) ? 1.0 : -1.0;
  const double poch_half_l = pochhammer(0.5 * l, j);
  out.mean = sign * std::pow(2.0, -j + 0.5 * l) * std::sqrt(factorial(static_cast<int>(k))) /
             (std::sqrt(k2n) * lfact * pochhammer(0.5 * d + l, j)) * gamma_ratio * poch_half_l /
             factorial(j);
  out.mean_vanishes = (l == 0 && j >= 1);  // (l/2)_j == 0 identically there
  out.second_moment = std::pow(2.0, l - 2.0 * j) * factorial(static_cast<int>(k)) /
                      (k2n * lfact * lfact) * pochhammer(0.5 * d, l) /
                      pochhammer(0.5 * d + l, j) / factorial(j);
  return out;
}

}  // namespace smim::complexity
