#include "core/harmonic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "core/coeffs.hpp"

namespace smim::harmonic {

namespace {

Eigen::Index ipow(int d, int e) {
  Eigen::Index v = 1;
  for (int i = 0; i < e; ++i) v *= d;
  return v;
}

// Enumerates all assignments of l slots to (l-2j) z-factors plus j unordered
// identity pairs, for every j. Visitor receives (j, z_slots, pairs).
template <typename Visit>
void enumerate_patterns(int l, Visit&& visit) {
  std::vector<int> z_slots;
  std::vector<std::pair<int, int>> pairs;
  std::vector<bool> used(l, false);

  auto rec = [&](auto&& self, int slot) -> void {
    while (slot < l && used[slot]) ++slot;
    if (slot == l) {
      visit(static_cast<int>(pairs.size()), z_slots, pairs);
      return;
    }
    used[slot] = true;
    // slot carries a z factor
    z_slots.push_back(slot);
    self(self, slot + 1);
    z_slots.pop_back();
    // slot pairs with a later slot
    for (int other = slot + 1; other < l; ++other) {
      if (used[other]) continue;
      used[other] = true;
      pairs.emplace_back(slot, other);
      self(self, slot + 1);
      pairs.pop_back();
      used[other] = false;
    }
    used[slot] = false;
  };
  rec(rec, 0);
}

}  // namespace

MatvecPlan::MatvecPlan(int d, int l, int a, int b) : l_(l), a_(a), b_(b) {
  if (a < 0 || b < 0 || a + b != l) throw std::invalid_argument("MatvecPlan: need a + b = l");
  if (l > kMaxMatvecDegree) throw std::length_error("MatvecPlan: degree cap exceeded");

  std::vector<double> h(l / 2 + 1);
  for (int j = 0; 2 * j <= l; ++j) h[j] = h_coeff(d, l, j);
  std::vector<Eigen::Index> count(l / 2 + 1, 0);
  enumerate_patterns(l, [&](int j, const std::vector<int>&, const std::vector<std::pair<int, int>>&) {
    count[j]++;
  });

  enumerate_patterns(l, [&](int j, const std::vector<int>& z_slots,
                            const std::vector<std::pair<int, int>>& pairs) {
    Pattern p;
    p.weight = h[j] / static_cast<double>(count[j]);

    // classify: slots [0, a) are rows, [a, l) are columns
    std::vector<int> col_z, cross_cols;
    std::vector<std::pair<int, int>> col_pairs;
    for (int s : z_slots) {
      if (s < a) {
        RowVar v;
        v.kind = RowVar::kZ;
        v.e0 = a - 1 - s;
        p.row_vars.push_back(v);
      } else {
        col_z.push_back(s - a);
      }
    }
    std::vector<std::pair<int, int>> cross;  // (row slot, col slot)
    for (auto [s0, s1] : pairs) {
      if (s0 < a && s1 < a) {
        RowVar v;
        v.kind = RowVar::kPair;
        v.e0 = a - 1 - s0;
        v.e1 = a - 1 - s1;
        p.row_vars.push_back(v);
      } else if (s0 >= a && s1 >= a) {
        col_pairs.emplace_back(s0 - a, s1 - a);
      } else {
        cross.emplace_back(s0, s1 - a);  // s0 < a <= s1 always (enumeration order)
        cross_cols.push_back(s1 - a);
      }
    }

    // Column phase ops, highest slot first so earlier indices stay valid.
    // Kept (cross) columns are untouched and remain in ascending order.
    struct RawOp {
      int key;
      ColOp op;
    };
    std::vector<RawOp> raw;
    for (int s : col_z) raw.push_back({s, {ColOp::kContractZ, s, 0}});
    for (auto [p0, p1] : col_pairs) raw.push_back({p1, {ColOp::kTracePair, p0, p1}});
    std::sort(raw.begin(), raw.end(), [](const RawOp& x, const RawOp& y) { return x.key > y.key; });
    // re-map slot indices as earlier ops remove higher slots
    std::vector<bool> removed(b, false);
    auto relative = [&](int s) {
      int r = s;
      for (int i = 0; i < s; ++i)
        if (removed[i]) --r;
      return r;
    };
    for (auto& ro : raw) {
      ColOp op = ro.op;
      if (op.kind == ColOp::kContractZ) {
        op.s0 = relative(op.s0);
        removed[ro.op.s0] = true;
      } else {
        op.s0 = relative(op.s0);
        op.s1 = relative(op.s1);
        removed[ro.op.s0] = true;
        removed[ro.op.s1] = true;
      }
      p.col_ops.push_back(op);
    }
    p.u_order = static_cast<int>(cross.size());

    // cross row vars index u by the rank of their column slot
    std::sort(cross_cols.begin(), cross_cols.end());
    for (auto [rs, cs] : cross) {
      RowVar v;
      v.kind = RowVar::kCross;
      v.e0 = a - 1 - rs;
      v.u_pos = static_cast<int>(std::lower_bound(cross_cols.begin(), cross_cols.end(), cs) -
                                 cross_cols.begin());
      p.row_vars.push_back(v);
    }

    patterns_.push_back(std::move(p));
  });
}

void MatvecPlan::apply(const Eigen::VectorXd& z, const Eigen::VectorXd& v, Eigen::VectorXd& out,
                       Workspace& ws) const {
  const int d = static_cast<int>(z.size());
  const Eigen::Index rows = ipow(d, a_);
  const Eigen::Index cols = ipow(d, b_);
  if (v.size() != cols) throw std::invalid_argument("MatvecPlan::apply: bad v length");
  out.setZero(rows);
  if (ws.buf0.size() < cols) ws.buf0.resize(cols);
  if (ws.buf1.size() < cols) ws.buf1.resize(cols);

  for (const Pattern& p : patterns_) {
    // ---- column phase: reduce v to u over the kept (cross) columns
    const double* src = v.data();
    double* cur = ws.buf0.data();
    double* nxt = ws.buf1.data();
    int k = b_;
    bool first = true;
    for (const ColOp& op : p.col_ops) {
      double* dst = first ? cur : nxt;
      const double* in = first ? src : cur;
      if (op.kind == ColOp::kContractZ) {
        const Eigen::Index outer = ipow(d, op.s0);
        const Eigen::Index inner = ipow(d, k - op.s0 - 1);
        for (Eigen::Index o = 0; o < outer; ++o) {
          const double* base = in + o * d * inner;
          double* ob = dst + o * inner;
          for (Eigen::Index i = 0; i < inner; ++i) ob[i] = 0.0;
          for (int m = 0; m < d; ++m) {
            const double zm = z[m];
            const double* row = base + m * inner;
            for (Eigen::Index i = 0; i < inner; ++i) ob[i] += zm * row[i];
          }
        }
        k -= 1;
      } else {
        const int s0 = op.s0, s1 = op.s1;
        const Eigen::Index o1 = ipow(d, s0);
        const Eigen::Index o2 = ipow(d, s1 - s0 - 1);
        const Eigen::Index o3 = ipow(d, k - s1 - 1);
        Eigen::Index w = 0;
        for (Eigen::Index i1 = 0; i1 < o1; ++i1)
          for (Eigen::Index i2 = 0; i2 < o2; ++i2)
            for (Eigen::Index i3 = 0; i3 < o3; ++i3) {
              double acc = 0.0;
              for (int m = 0; m < d; ++m)
                acc += in[(((i1 * d + m) * o2 + i2) * d + m) * o3 + i3];
              dst[w++] = acc;
            }
        k -= 2;
      }
      if (!first) std::swap(cur, nxt);
      first = false;
    }
    const double* u = first ? src : cur;

    // ---- row phase: scatter weight * z-products * u into out
    const int nvars = static_cast<int>(p.row_vars.size());
    if (nvars == 0) {
      out[0] += p.weight * u[0];
      continue;
    }
    std::array<Eigen::Index, kMaxMatvecDegree> row_stride{};
    std::array<Eigen::Index, kMaxMatvecDegree> u_stride{};
    std::array<int, kMaxMatvecDegree> vals{};
    for (int i = 0; i < nvars; ++i) {
      const RowVar& rv = p.row_vars[i];
      row_stride[i] = ipow(d, rv.e0) + (rv.kind == RowVar::kPair ? ipow(d, rv.e1) : 0);
      u_stride[i] = rv.kind == RowVar::kCross ? ipow(d, p.u_order - 1 - rv.u_pos) : 0;
      vals[i] = 0;
    }
    for (;;) {
      Eigen::Index rf = 0, uf = 0;
      double zprod = p.weight;
      for (int i = 0; i < nvars; ++i) {
        rf += vals[i] * row_stride[i];
        uf += vals[i] * u_stride[i];
        if (p.row_vars[i].kind == RowVar::kZ) zprod *= z[vals[i]];
      }
      out[rf] += zprod * u[uf];
      int i = nvars - 1;
      for (; i >= 0; --i) {
        if (++vals[i] < d) break;
        vals[i] = 0;
      }
      if (i < 0) break;
    }
  }
}

HarmonicEvaluator::HarmonicEvaluator(int d, int l) : d_(d), l_(l) {
  if (d < 3) throw std::invalid_argument("HarmonicEvaluator: need d >= 3");
  if (l < 0) throw std::invalid_argument("HarmonicEvaluator: need l >= 0");
  n_ = harmonic_dim(d, l);
  kappa_ = smim::kappa(d, l);
  scale_ = kappa_ * std::sqrt(n_);
  h_.resize(l / 2 + 1);
  for (int j = 0; 2 * j <= l; ++j) h_[j] = h_coeff(d, l, j);
  if (l <= kMaxMatvecDegree) {
    for (int a = 0; a <= l; ++a) plans_.emplace_back(d, l, a, l - a);
    dense_plan_ = MatvecPlan(d, l, l, 0);
  }
}

const MatvecPlan& HarmonicEvaluator::plan(int a) const {
  if (plans_.empty()) throw std::length_error("HarmonicEvaluator: degree cap exceeded for matvec");
  if (a < 0 || a > l_) throw std::invalid_argument("HarmonicEvaluator: bad split");
  return plans_[a];
}

tensor::Tensor HarmonicEvaluator::harmonic_tensor(const Eigen::VectorXd& z) const {
  if (z.size() != d_) throw std::invalid_argument("harmonic_tensor: dim mismatch");
  if (std::abs(z.norm() - 1.0) > 1e-10) throw std::invalid_argument("harmonic_tensor: z not unit");
  const Eigen::Index size = tensor::pow_ll(d_, l_);
  if (size > (Eigen::Index(1) << 24)) throw std::length_error("harmonic_tensor: memory budget exceeded");
  if (l_ == 0) return tensor::Tensor::scalar(d_, 1.0);
  tensor::Tensor t(d_, l_);
  MatvecPlan::Workspace ws;
  Eigen::VectorXd one(1);
  one[0] = 1.0;
  dense_plan_.apply(z, one, t.data(), ws);
  t *= scale_;
  return t;
}

double HarmonicEvaluator::eval(const tensor::Tensor& a, const Eigen::VectorXd& z) const {
  if (a.dim() != d_ || a.order() != l_) throw std::invalid_argument("harmonic eval: shape mismatch");
  if (l_ == 0) return a.data()[0];
  // fold z into the last mode repeatedly: <A, z^{ox l}>
  Eigen::VectorXd cur = a.data();
  Eigen::Index size = cur.size();
  for (int k = 0; k < l_; ++k) {
    size /= d_;
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
        cur.data(), size, d_);
    Eigen::VectorXd next = m * z;
    cur = std::move(next);
  }
  return scale_ * cur[0];
}

tensor::Tensor HarmonicEvaluator::frame_coeff(const Eigen::VectorXd& t) const {
  const int s = static_cast<int>(t.size());
  if (l_ == 0) return tensor::Tensor::scalar(s, 1.0);
  tensor::Tensor out(s, l_);
  MatvecPlan::Workspace ws;
  Eigen::VectorXd one(1);
  one[0] = 1.0;
  dense_plan_.apply(t, one, out.data(), ws);
  out *= scale_;
  return out;
}

void HarmonicEvaluator::matvec(const Eigen::VectorXd& z, int a, int b, const Eigen::VectorXd& v,
                               Eigen::VectorXd& out, MatvecPlan::Workspace& ws) const {
  if (a + b != l_) throw std::invalid_argument("matvec: need a + b = l");
  plan(a).apply(z, v, out, ws);
  out *= scale_;
}

double HarmonicEvaluator::zonal(double t) const { return n_ * gegenbauer_p(d_, l_, t); }

double gegenbauer_p(int d, int l, double t) {
  if (d < 3) throw std::invalid_argument("gegenbauer: need d >= 3");
  if (std::abs(t) > 1.0 + 1e-12) throw std::invalid_argument("gegenbauer: |t| > 1");
  if (l == 0) return 1.0;
  if (l == 1) return t;
  double pm = 1.0, p = t;
  for (int k = 2; k <= l; ++k) {
    const double next = ((2.0 * k + d - 4.0) * t * p - (k - 1.0) * pm) / (k + d - 3.0);
    pm = p;
    p = next;
  }
  return p;
}

double gegenbauer(int d, int l, double t) {
  return std::sqrt(harmonic_dim(d, l)) * gegenbauer_p(d, l, t);
}

void gauss_marginal(int d, int n, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  if (d < 3) throw std::invalid_argument("gauss_marginal: need d >= 3");
  // Golub-Welsch for the weight (1-t^2)^{lambda - 1/2}, lambda = (d-2)/2.
  const double lambda = 0.5 * (d - 2.0);
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double beta = k * (k + 2.0 * lambda - 1.0) / (4.0 * (k + lambda) * (k + lambda - 1.0));
    jac(k, k - 1) = jac(k - 1, k) = std::sqrt(beta);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  nodes = es.eigenvalues();
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    const double v0 = es.eigenvectors()(0, i);
    weights[i] = v0 * v0;
  }
}

double product_b_coeff(int d, int p, int q, int j) {
  if (j < 0 || j > std::min(p, q)) throw std::invalid_argument("product_b_coeff: bad j");
  const double num = f_coeff(d, p + q, j) * kappa(d, p) * kappa(d, q) *
                     std::sqrt(harmonic_dim(d, p) * harmonic_dim(d, q));
  const double den = kappa(d, p + q - 2 * j) * std::sqrt(harmonic_dim(d, p + q - 2 * j));
  const double comb = std::pow(2.0, j) * factorial(p) * factorial(q) * factorial(p + q - 2 * j) /
                      (factorial(p + q) * factorial(p - j) * factorial(q - j));
  return num / den * comb;
}

}  // namespace smim::harmonic
