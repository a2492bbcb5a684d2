#include "core/mhat.hpp"

#include <stdexcept>
#include <vector>

#include "core/parallel.hpp"

namespace smim::estimator {

namespace {
constexpr std::size_t kChunk = 512;
}

MhatOperator::MhatOperator(const models::Dataset& data, const Kernel& kernel, const UnfoldConfig& cfg)
    : data_(data),
      ell_(cfg.ell),
      a_(cfg.a),
      b_(cfg.b),
      factor_(1.0),
      ev_(data.d, cfg.ell) {
  if (cfg.a + cfg.b != cfg.ell) throw std::invalid_argument("MhatOperator: need a + b = ell");
  if (kernel.label_arity() != data.arity())
    throw std::invalid_argument("MhatOperator: kernel arity != dataset label arity");
  if (kernel.degenerate || kernel.rank() == 0)
    throw std::invalid_argument("MhatOperator: degenerate kernel");
  rows_ = tensor::pow_ll(data.d, a_);
  cols_ = tensor::pow_ll(data.d, b_);
  const int n = data.n();
  if (n < 2) throw std::invalid_argument("MhatOperator: need n >= 2");
  if (a_ != b_) factor_ = 1.0 + 1.0 / (n - 1.0);

  feats_.resize(kernel.rank(), n);
  Eigen::VectorXd f;
  for (int i = 0; i < n; ++i) {
    kernel.features(data.y.col(i).data(), f);
    feats_.col(i) = f;
  }
  feat_sq_ = feats_.colwise().squaredNorm();
}

void MhatOperator::matvec(const Eigen::VectorXd& v, Eigen::VectorXd& out) const {
  if (v.size() != rows_) throw std::invalid_argument("MhatOperator::matvec: bad length");
  const int n = data_.n();
  const int m = kernel_rank();
  const bool sym = a_ == b_;
  const std::size_t nchunks = parallel::num_chunks(n, kChunk);

  // pass 1: q_i = Mat_i^T v; accumulate W = (1/n) sum_i q_i feats_i^T and the
  // diagonal correction sum_i feat_sq_i Mat_i q_i for the off-square split
  std::vector<Eigen::MatrixXd> w_slots(nchunks);
  std::vector<Eigen::VectorXd> diag_slots(nchunks);
  parallel::for_chunks(n, kChunk, [&](std::size_t c, std::size_t lo, std::size_t hi) {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(cols_, m);
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(sym ? 0 : rows_);
    harmonic::MatvecPlan::Workspace ws;
    Eigen::VectorXd q(cols_), p(rows_);
    for (std::size_t i = lo; i < hi; ++i) {
      const Eigen::Index ii = static_cast<Eigen::Index>(i);
      ev_.matvec(data_.z.col(ii), b_, a_, v, q, ws);
      w.noalias() += q * feats_.col(ii).transpose();
      if (!sym) {
        ev_.matvec(data_.z.col(ii), a_, b_, q, p, ws);
        diag.noalias() += feat_sq_[ii] * p;
      }
    }
    w_slots[c] = std::move(w);
    diag_slots[c] = std::move(diag);
  });
  parallel::tree_combine(w_slots.data(), nchunks, [](Eigen::MatrixXd& d, const Eigen::MatrixXd& s) {
    d += s;
  });
  if (!sym)
    parallel::tree_combine(diag_slots.data(), nchunks,
                           [](Eigen::VectorXd& d, const Eigen::VectorXd& s) { d += s; });
  const Eigen::MatrixXd w = w_slots[0] / static_cast<double>(n);

  // pass 2: out = (1/n) sum_i Mat_i (W feats_i)
  std::vector<Eigen::VectorXd> out_slots(nchunks);
  parallel::for_chunks(n, kChunk, [&](std::size_t c, std::size_t lo, std::size_t hi) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(rows_);
    harmonic::MatvecPlan::Workspace ws;
    Eigen::VectorXd ci(cols_), p(rows_);
    for (std::size_t i = lo; i < hi; ++i) {
      const Eigen::Index ii = static_cast<Eigen::Index>(i);
      ci.noalias() = w * feats_.col(ii);
      ev_.matvec(data_.z.col(ii), a_, b_, ci, p, ws);
      acc += p;
    }
    out_slots[c] = std::move(acc);
  });
  parallel::tree_combine(out_slots.data(), nchunks,
                         [](Eigen::VectorXd& d, const Eigen::VectorXd& s) { d += s; });
  out = out_slots[0] / static_cast<double>(n);
  if (!sym) out -= diag_slots[0] / (static_cast<double>(n) * n);
  out *= factor_;
}

}  // namespace smim::estimator
