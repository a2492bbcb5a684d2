#pragma once

#include <cstdint>

namespace smim {

// Scalar machinery shared by the tensor and harmonic layers: dimensions of
// symmetric / harmonic spaces and the coefficient families h, f, kappa used
// by the traceless projection and the Fischer decomposition. All rising
// factorials are evaluated as ratio products, which stay bounded for every
// (d, l) in range, so no log-space fallback is needed.

double pochhammer(double a, int k);  // a (a+1) ... (a+k-1); empty product = 1
double binomial(int n, int k);
double factorial(int n);

// dim S_l(R^s) = C(s+l-1, l)
long long sym_dim(int s, int l);

// N_{d,l} = dim of the degree-l spherical harmonic subspace on S^{d-1}.
double harmonic_dim(int d, int l);

// kappa_{d,l}^2 = 2^l (d/2-1)_l / (d-2)_l ; normalizes ||P_tf(w^{ox l})|| to 1/kappa.
double kappa2(int d, int l);
double kappa(int d, int l);

// Coefficients of P_tf(A) = sum_j h_{l,j} P_sym(tau^j(A) ox I^j).
double h_coeff(int d, int l, int j);            // closed form
double h_coeff_recursive(int d, int l, int j);  // recursion; test cross-check

// Coefficients of the Fischer decomposition
// A = sum_j f_{l,j} P_sym(P_tf(tau^j(A)) ox I^j).
double f_coeff(int d, int l, int j);

}  // namespace smim
