#include "core/tensor.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "core/coeffs.hpp"

namespace smim::tensor {

Eigen::Index pow_ll(int d, int l) {
  Eigen::Index v = 1;
  for (int i = 0; i < l; ++i) {
    if (v > (Eigen::Index(1) << 40) / d) throw std::length_error("tensor too large");
    v *= d;
  }
  return v;
}

Tensor::Tensor(int d, int order) : d_(d), order_(order) {
  if (d < 1 || order < 0) throw std::invalid_argument("Tensor: bad shape");
  data_ = Eigen::VectorXd::Zero(pow_ll(d, order));
}

Tensor::Tensor(int d, int order, Eigen::VectorXd data) : d_(d), order_(order), data_(std::move(data)) {
  if (data_.size() != pow_ll(d, order)) throw std::invalid_argument("Tensor: data size mismatch");
}

Tensor Tensor::scalar(int d, double value) {
  Tensor t(d, 0);
  t.data_[0] = value;
  return t;
}

Tensor Tensor::identity(int d) {
  Tensor t(d, 2);
  for (int i = 0; i < d; ++i) t.data_[Eigen::Index(i) * d + i] = 1.0;
  return t;
}

Tensor Tensor::rank_one(const Eigen::VectorXd& v, int l) {
  const int d = static_cast<int>(v.size());
  Tensor t = Tensor::scalar(d, 1.0);
  for (int k = 0; k < l; ++k) {
    Tensor next(d, t.order() + 1);
    for (Eigen::Index i = 0; i < t.size(); ++i)
      next.data_.segment(i * d, d) = t.data_[i] * v;
    t = std::move(next);
  }
  return t;
}

Eigen::Index Tensor::flat(const std::vector<int>& idx) const {
  if (static_cast<int>(idx.size()) != order_) throw std::invalid_argument("Tensor: index arity");
  Eigen::Index f = 0;
  for (int i : idx) {
    if (i < 0 || i >= d_) throw std::out_of_range("Tensor: index out of range");
    f = f * d_ + i;
  }
  return f;
}

double Tensor::dot(const Tensor& other) const {
  if (d_ != other.d_ || order_ != other.order_) throw std::invalid_argument("Tensor::dot: shape mismatch");
  return data_.dot(other.data_);
}

Tensor& Tensor::operator+=(const Tensor& other) {
  if (d_ != other.d_ || order_ != other.order_) throw std::invalid_argument("Tensor: shape mismatch");
  data_ += other.data_;
  return *this;
}

namespace {

// Iterates over all index tuples of an order-l tensor. idx is maintained
// alongside the flat position.
struct Odometer {
  explicit Odometer(int d, int l) : d_(d), idx(l, 0) {}
  bool next() {
    for (int k = static_cast<int>(idx.size()) - 1; k >= 0; --k) {
      if (++idx[k] < d_) return true;
      idx[k] = 0;
    }
    return false;
  }
  int d_;
  std::vector<int> idx;
};

}  // namespace

bool Tensor::is_symmetric(double tol) const {
  if (order_ <= 1) return true;
  if (order_ > kMaxSymOrder) throw std::length_error("is_symmetric: order cap exceeded");
  const double scale = std::max(1.0, norm());
  Odometer it(d_, order_);
  std::vector<int> p(order_);
  do {
    const double v = data_[flat(it.idx)];
    // checking adjacent transpositions is enough
    for (int k = 0; k + 1 < order_; ++k) {
      p = it.idx;
      std::swap(p[k], p[k + 1]);
      if (std::abs(data_[flat(p)] - v) > tol * scale) return false;
    }
  } while (it.next());
  return true;
}

SymTensor::SymTensor(Tensor t, double tol) : t_(std::move(t)) {
  if (!t_.is_symmetric(tol)) throw std::invalid_argument("SymTensor: not symmetric");
}

TracelessSymTensor::TracelessSymTensor(Tensor t, double tol) : t_(std::move(t)) {
  if (!t_.is_symmetric(tol)) throw std::invalid_argument("TracelessSymTensor: not symmetric");
  if (t_.order() >= 2) {
    const Tensor tr = partial_trace(t_);
    if (tr.norm() > tol * std::max(1.0, t_.norm()))
      throw std::invalid_argument("TracelessSymTensor: nonzero partial trace");
  }
}

Tensor contract(const Tensor& a, const Tensor& b, int r) {
  if (a.dim() != b.dim()) throw std::invalid_argument("contract: dim mismatch");
  if (r < 0 || r > std::min(a.order(), b.order())) throw std::invalid_argument("contract: bad r");
  const int d = a.dim();
  const Eigen::Index left = pow_ll(d, a.order() - r);
  const Eigen::Index mid = pow_ll(d, r);
  const Eigen::Index right = pow_ll(d, b.order() - r);
  Tensor out(d, a.order() + b.order() - 2 * r);
  // A viewed as left x mid (row-major), B as mid x right.
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> ma(
      a.data().data(), left, mid);
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> mb(
      b.data().data(), mid, right);
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> mo(
      out.data().data(), left, right);
  mo = ma * mb;
  return out;
}

Tensor sym_project(const Tensor& t) {
  const int l = t.order();
  if (l <= 1) return t;
  if (l > kMaxSymOrder) throw std::length_error("sym_project: order cap exceeded");
  const int d = t.dim();
  std::vector<int> perm(l);
  std::iota(perm.begin(), perm.end(), 0);
  Tensor out(d, l);
  std::vector<int> src(l);
  double nperm = 0;
  do {
    nperm += 1;
    Odometer it(d, l);
    Eigen::Index f = 0;
    do {
      for (int k = 0; k < l; ++k) src[k] = it.idx[perm[k]];
      out.data()[f++] += t.data()[t.flat(src)];
    } while (it.next());
  } while (std::next_permutation(perm.begin(), perm.end()));
  out *= 1.0 / nperm;
  return out;
}

Tensor partial_trace(const Tensor& t) {
  if (t.order() < 2) throw std::invalid_argument("partial_trace: order < 2");
  const int d = t.dim();
  const Eigen::Index rest = pow_ll(d, t.order() - 2);
  Tensor out(d, t.order() - 2);
  for (int j = 0; j < d; ++j) {
    const Eigen::Index base = (Eigen::Index(j) * d + j) * rest;
    out.data() += t.data().segment(base, rest);
  }
  return out;
}

Tensor tau_power(const Tensor& t, int j) {
  if (2 * j > t.order()) throw std::invalid_argument("tau_power: order < 2j");
  Tensor cur = t;
  for (int i = 0; i < j; ++i) cur = partial_trace(cur);
  return cur;
}

Tensor sym_with_identities(const Tensor& core, int j) {
  Tensor big = core;
  for (int i = 0; i < j; ++i) big = contract(big, Tensor::identity(core.dim()), 0);
  return sym_project(big);
}

Tensor tf_project(const Tensor& t_in) {
  const Tensor t = t_in.order() >= 2 && !t_in.is_symmetric(1e-12) ? sym_project(t_in) : t_in;
  const int l = t.order();
  if (l <= 1) return t;
  const int d = t.dim();
  Tensor out(d, l);
  Tensor cur = t;
  for (int j = 0; 2 * j <= l; ++j) {
    out += h_coeff(d, l, j) * sym_with_identities(cur, j);
    if (cur.order() >= 2) cur = partial_trace(cur);
  }
  return out;
}

std::vector<std::pair<int, Tensor>> fischer_decompose(const Tensor& a) {
  const int l = a.order();
  std::vector<std::pair<int, Tensor>> parts;
  Tensor cur = a;
  for (int j = 0; 2 * j <= l; ++j) {
    parts.emplace_back(j, tf_project(cur));
    if (cur.order() >= 2) cur = partial_trace(cur);
  }
  return parts;
}

Tensor fischer_reconstruct(int d, int order, const std::vector<std::pair<int, Tensor>>& parts) {
  Tensor out(d, order);
  for (const auto& [j, c] : parts) out += f_coeff(d, order, j) * sym_with_identities(c, j);
  return out;
}

Tensor diamond(const Tensor& a, const Tensor& b, int j) {
  if (j < 0 || j > std::min(a.order(), b.order())) throw std::invalid_argument("diamond: bad j");
  return tf_project(sym_project(contract(a, b, j)));
}

Matricization unfold(const Tensor& t, int a, int b) {
  if (a < 0 || b < 0 || a + b != t.order()) throw std::invalid_argument("unfold: need a+b = order");
  Matricization m;
  m.d = t.dim();
  m.a = a;
  m.b = b;
  const Eigen::Index rows = pow_ll(t.dim(), a);
  const Eigen::Index cols = pow_ll(t.dim(), b);
  m.m = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      t.data().data(), rows, cols);
  return m;
}

Tensor refold(const Matricization& m) {
  Tensor t(m.d, m.a + m.b);
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      t.data().data(), m.m.rows(), m.m.cols()) = m.m;
  return t;
}

Tensor apply_matrix(const Eigen::MatrixXd& w, const Tensor& t) {
  if (w.cols() != t.dim()) throw std::invalid_argument("apply_matrix: dim mismatch");
  const int l = t.order();
  const int s = static_cast<int>(w.cols());
  const int d = static_cast<int>(w.rows());
  if (l == 0) return Tensor::scalar(d, t.data()[0]);
  // One mode at a time. After k steps the buffer has shape d^k x s^(l-k)
  // (row-major); step k contracts the leading s-mode of each block.
  Eigen::VectorXd buf = t.data();
  for (int k = 0; k < l; ++k) {
    const Eigen::Index lead = pow_ll(d, k);
    const Eigen::Index tail = pow_ll(s, l - k - 1);
    Eigen::VectorXd next(lead * d * tail);
    for (Eigen::Index i = 0; i < lead; ++i) {
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> block(
          buf.data() + i * s * tail, s, tail);
      Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> out(
          next.data() + i * d * tail, d, tail);
      out = w * block;
    }
    buf = std::move(next);
  }
  return Tensor(d, l, std::move(buf));
}

}  // namespace smim::tensor
