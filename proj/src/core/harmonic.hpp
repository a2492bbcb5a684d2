#pragma once

#include <Eigen/Dense>
#include <vector>

#include "core/tensor.hpp"

namespace smim::harmonic {

inline constexpr int kMaxMatvecDegree = 4;  // pattern tables are built up to here

// One term of the expansion P_tf(z^{ox l}) = sum_j h_j P_sym(z^{ox(l-2j)} ox I^j),
// with the symmetrization resolved into index patterns: each pattern assigns
// every slot either a z factor or one end of an identity pair. Patterns are
// dimension-independent; strides are derived from d when applied.
struct ColOp {
  enum Kind { kContractZ, kTracePair } kind;
  int s0 = 0, s1 = 0;  // slot indices valid at application time
};

struct RowVar {
  enum Kind { kZ, kPair, kCross } kind;
  int e0 = 0, e1 = 0;  // row-stride exponents (stride = d^e)
  int u_pos = 0;       // for kCross: position among the kept column slots
};

struct Pattern {
  double weight = 0;  // h_j / (number of patterns at this j)
  std::vector<ColOp> col_ops;
  std::vector<RowVar> row_vars;
  int u_order = 0;  // number of column slots surviving the column phase
};

// Patterns for the (a,b)-unfolded action of P_tf(z^{ox l}); cost of one
// product is O(#patterns * (d^a + d^b)).
class MatvecPlan {
 public:
  MatvecPlan() = default;
  MatvecPlan(int d, int l, int a, int b);  // d only fixes the h coefficients

  int degree() const { return l_; }
  int split_a() const { return a_; }
  int split_b() const { return b_; }

  struct Workspace {
    Eigen::VectorXd buf0, buf1;
  };

  // out = Mat_{a,b}( sum_j h_j P_sym(z^{ox(l-2j)} ox I^j) ) * v, unscaled.
  // dim = length of z; v must have length dim^b, out dim^a.
  void apply(const Eigen::VectorXd& z, const Eigen::VectorXd& v, Eigen::VectorXd& out,
             Workspace& ws) const;

 private:
  int l_ = 0, a_ = 0, b_ = 0;
  std::vector<Pattern> patterns_;
};

// Cached constants and pattern tables for the degree-l harmonic tensor
// H_{d,l}(z) = kappa sqrt(N) P_tf(z^{ox l}). Immutable after construction.
class HarmonicEvaluator {
 public:
  HarmonicEvaluator(int d, int l);

  int dim() const { return d_; }
  int degree() const { return l_; }
  double n_dl() const { return n_; }        // N_{d,l}
  double kappa() const { return kappa_; }   // kappa_{d,l}
  double scale() const { return scale_; }   // kappa sqrt(N)

  // Dense H_{d,l}(z); requires |‖z‖-1| <= 1e-10 and d^l within the budget.
  tensor::Tensor harmonic_tensor(const Eigen::VectorXd& z) const;

  // <A, H_{d,l}(z)> = scale * <A, z^{ox l}> without materializing H.
  double eval(const tensor::Tensor& a, const Eigen::VectorXd& z) const;

  // (W^T)^{ox l} H_{d,l}(z) for t = W^T z, as a dense order-l tensor over R^s
  // (s = t.size()). Ambient-d coefficients, identities I_s. O(C_l s^l).
  tensor::Tensor frame_coeff(const Eigen::VectorXd& t) const;

  // Mat_{a,b}(H_{d,l}(z)) v in O(d^a + d^b); a+b = l.
  void matvec(const Eigen::VectorXd& z, int a, int b, const Eigen::VectorXd& v,
              Eigen::VectorXd& out, MatvecPlan::Workspace& ws) const;

  // <H_{d,l}(w), H_{d,l}(z)> = N_{d,l} P_l(<w,z>) (reproducing kernel).
  double zonal(double t) const;

  const MatvecPlan& plan(int a) const;  // split (a, l-a)

 private:
  int d_, l_;
  double n_, kappa_, scale_;
  std::vector<double> h_;
  std::vector<MatvecPlan> plans_;  // index a = 0..l
  MatvecPlan dense_plan_;          // (l, 0) split used for dense assembly
};

// Degree-l normalized Gegenbauer value Q_l(t): the family orthonormal in
// L^2 of the first-coordinate marginal of the sphere, pinned to the exact
// reproducing identity <H(w), H(z)> = sqrt(N) Q_l(<w,z>).
double gegenbauer(int d, int l, double t);

// The P_l normalization (P_l(1) = 1), i.e. Q_l = sqrt(N_{d,l}) P_l.
double gegenbauer_p(int d, int l, double t);

// Three-term recurrence coefficients and quadrature for the marginal density
// c_d (1 - t^2)^{(d-3)/2} on [-1, 1].
struct GegenbauerBasis {
  GegenbauerBasis(int d, int max_degree) : d(d), max_degree(max_degree) {}
  int d;
  int max_degree;
  double value(int l, double t) const { return gegenbauer(d, l, t); }
};

// Gauss nodes/weights for the marginal density; exact for polynomials of
// degree <= 2n-1. Weights sum to 1.
void gauss_marginal(int d, int n, Eigen::VectorXd& nodes, Eigen::VectorXd& weights);

// b^{(d)}_{p,q,j}: coefficient of <A `diamond_j` B, H_{p+q-2j}(z)> in the
// decomposition of <A ox B, H_p(z) ox H_q(z)>.
double product_b_coeff(int d, int p, int q, int j);

}  // namespace smim::harmonic
