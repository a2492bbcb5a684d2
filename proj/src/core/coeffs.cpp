#include "core/coeffs.hpp"

#include <cmath>
#include <stdexcept>

namespace smim {

double pochhammer(double a, int k) {
  double v = 1.0;
  for (int i = 0; i < k; ++i) v *= a + i;
  return v;
}

double factorial(int n) {
  double v = 1.0;
  for (int i = 2; i <= n; ++i) v *= i;
  return v;
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  if (k > n - k) k = n - k;
  double v = 1.0;
  for (int i = 1; i <= k; ++i) v = v * (n - k + i) / i;
  return v;
}

long long sym_dim(int s, int l) {
  if (s < 1 || l < 0) throw std::invalid_argument("sym_dim: need s >= 1, l >= 0");
  long long v = 1;
  for (int i = 1; i <= l; ++i) v = v * (s + i - 1) / i;  // exact: consecutive binomials
  return v;
}

double harmonic_dim(int d, int l) {
  if (d < 2 || l < 0) throw std::invalid_argument("harmonic_dim: need d >= 2, l >= 0");
  if (l == 0) return 1.0;
  if (l == 1) return d;
  return (d + 2.0 * l - 2.0) / l * binomial(d + l - 3, l - 1);
}

double kappa2(int d, int l) {
  if (d < 3) throw std::invalid_argument("kappa: need d >= 3");
  double v = 1.0;
  for (int i = 0; i < l; ++i) v *= (d - 2.0 + 2.0 * i) / (d - 2.0 + i);
  return v;
}

double kappa(int d, int l) { return std::sqrt(kappa2(d, l)); }

double h_coeff(int d, int l, int j) {
  if (j < 0 || 2 * j > l) throw std::invalid_argument("h_coeff: need 0 <= j <= l/2");
  // (d+2l-2j-4)!!/(d+2l-4)!! collapses to 1/prod_{i<j}(d+2l-4-2i).
  double v = factorial(l) / (std::pow(2.0, j) * factorial(j) * factorial(l - 2 * j));
  for (int i = 0; i < j; ++i) v /= (d + 2.0 * l - 4.0 - 2.0 * i);
  return (j % 2 == 0) ? v : -v;
}

double h_coeff_recursive(int d, int l, int j) {
  if (j < 0 || 2 * j > l) throw std::invalid_argument("h_coeff: need 0 <= j <= l/2");
  double v = 1.0;
  for (int i = 1; i <= j; ++i) {
    v *= -(l - 2.0 * i + 2.0) * (l - 2.0 * i + 1.0) / (2.0 * i * (d + 2.0 * l - 2.0 * i - 2.0));
  }
  return v;
}

double f_coeff(int d, int l, int j) {
  if (j < 0 || 2 * j > l) throw std::invalid_argument("f_coeff: need 0 <= j <= l/2");
  return factorial(l) /
         (std::pow(4.0, j) * factorial(j) * factorial(l - 2 * j) * pochhammer(0.5 * d + l - 2 * j, j));
}

}  // namespace smim
