#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

namespace smim::tensor {

// Dense order-l tensor over R^d. Entries are stored flat in row-major order:
// entry (i_1,...,i_l) sits at sum_k i_k * d^(l-1-k), 0-based. This convention
// is load-bearing: Mat_{a,b} below is a plain reshape of the same buffer, and
// the estimator's index arithmetic relies on it.
class Tensor {
 public:
  Tensor() : d_(1), order_(0), data_(Eigen::VectorXd::Zero(1)) {}
  Tensor(int d, int order);
  Tensor(int d, int order, Eigen::VectorXd data);

  static Tensor scalar(int d, double value);
  static Tensor identity(int d);                            // I_d as an order-2 tensor
  static Tensor rank_one(const Eigen::VectorXd& v, int l);  // v^{ox l}

  int dim() const { return d_; }
  int order() const { return order_; }
  Eigen::Index size() const { return data_.size(); }

  const Eigen::VectorXd& data() const { return data_; }
  Eigen::VectorXd& data() { return data_; }

  double operator()(const std::vector<int>& idx) const { return data_[flat(idx)]; }
  double& operator()(const std::vector<int>& idx) { return data_[flat(idx)]; }

  Eigen::Index flat(const std::vector<int>& idx) const;

  double norm() const { return data_.norm(); }
  double dot(const Tensor& other) const;

  Tensor& operator+=(const Tensor& other);
  Tensor& operator*=(double c) {
    data_ *= c;
    return *this;
  }
  friend Tensor operator*(double c, Tensor t) {
    t *= c;
    return t;
  }
  friend Tensor operator+(Tensor a, const Tensor& b) {
    a += b;
    return a;
  }
  friend Tensor operator-(Tensor a, const Tensor& b) {
    a += (-1.0) * b;
    return a;
  }

  bool is_symmetric(double tol = 1e-10) const;

 private:
  int d_;
  int order_;
  Eigen::VectorXd data_;
};

inline constexpr int kMaxSymOrder = 6;  // P_sym enumerates all order! permutations

// Validated wrappers. Construction checks the invariant and throws on failure.
class SymTensor {
 public:
  explicit SymTensor(Tensor t, double tol = 1e-10);
  static SymTensor unchecked(Tensor t) { return SymTensor(std::move(t), Unchecked{}); }
  const Tensor& get() const { return t_; }
  operator const Tensor&() const { return t_; }

 private:
  struct Unchecked {};
  SymTensor(Tensor t, Unchecked) : t_(std::move(t)) {}
  Tensor t_;
};

class TracelessSymTensor {
 public:
  explicit TracelessSymTensor(Tensor t, double tol = 1e-10);
  static TracelessSymTensor unchecked(Tensor t) { return TracelessSymTensor(std::move(t), Unchecked{}); }
  const Tensor& get() const { return t_; }
  operator const Tensor&() const { return t_; }

 private:
  struct Unchecked {};
  TracelessSymTensor(Tensor t, Unchecked) : t_(std::move(t)) {}
  Tensor t_;
};

// sum over the last r indices of A against the first r indices of B;
// r = 0 is the tensor product.
Tensor contract(const Tensor& a, const Tensor& b, int r);

// average of T over all order! index permutations (order <= kMaxSymOrder)
Tensor sym_project(const Tensor& t);

// single partial trace over the first two indices (symmetric input makes the
// choice of pair irrelevant); tau_power applies it j times
Tensor partial_trace(const Tensor& t);
Tensor tau_power(const Tensor& t, int j);

// orthogonal projection onto traceless symmetric tensors,
// P_tf(A) = sum_j h_{l,j} P_sym(tau^j(A) ox I^j); non-symmetric input is
// symmetrized first
Tensor tf_project(const Tensor& t);

// components C_j = P_tf(tau^j(A)), j = 0..l/2, with
// A = sum_j f_{l,j} P_sym(C_j ox I^j)
std::vector<std::pair<int, Tensor>> fischer_decompose(const Tensor& a);
Tensor fischer_reconstruct(int d, int order, const std::vector<std::pair<int, Tensor>>& parts);

// A `diamond_j` B = P_tf(P_sym(A ox_j B))
Tensor diamond(const Tensor& a, const Tensor& b, int j);

// P_sym(core ox I^j) without forming the big intermediate product first
Tensor sym_with_identities(const Tensor& core, int j);

struct Matricization {
  int d = 1;
  int a = 0;
  int b = 0;
  Eigen::MatrixXd m;  // d^a x d^b
};

Matricization unfold(const Tensor& t, int a, int b);
Tensor refold(const Matricization& m);

// (W^{ox l}) T for T over R^s, W a d x s matrix: applies W to every index
Tensor apply_matrix(const Eigen::MatrixXd& w, const Tensor& t);

Eigen::Index pow_ll(int d, int l);

}  // namespace smim::tensor
