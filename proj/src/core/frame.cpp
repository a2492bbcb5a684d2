#include "core/frame.hpp"

#include <stdexcept>

namespace smim::tensor {

Frame::Frame(Eigen::MatrixXd cols, double tol) : cols_(std::move(cols)) {
  if (cols_.cols() > cols_.rows()) throw std::invalid_argument("Frame: rank exceeds dim");
  const Eigen::MatrixXd gram = cols_.transpose() * cols_;
  const double err = (gram - Eigen::MatrixXd::Identity(cols_.cols(), cols_.cols())).norm();
  if (err > tol * std::max<double>(1, cols_.cols())) throw std::invalid_argument("Frame: not orthonormal");
}

Eigen::MatrixXd qr_positive(const Eigen::MatrixXd& m) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), m.cols());
  const Eigen::MatrixXd r = qr.matrixQR().topRows(m.cols()).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  }
  return q;
}

Frame random_frame(int d, int s, Rng& rng) {
  if (s < 0 || s > d) throw std::invalid_argument("random_frame: need 0 <= s <= d");
  if (s == 0) return Frame::empty(d);
  Eigen::MatrixXd g(d, s);
  for (int j = 0; j < s; ++j)
    for (int i = 0; i < d; ++i) g(i, j) = rng.normal();
  return Frame::unchecked(qr_positive(g));
}

Frame complement(const Frame& f) {
  const int d = f.dim();
  const int s = f.rank();
  if (s == 0) return Frame::unchecked(Eigen::MatrixXd::Identity(d, d));
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(f.cols());
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
  // sign-fix the leading block so the complement is deterministic
  const Eigen::MatrixXd r = qr.matrixQR().topRows(s).triangularView<Eigen::Upper>();
  for (int j = 0; j < s; ++j) {
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  }
  return Frame::unchecked(q.rightCols(d - s));
}

double frame_distance(const Frame& u, const Frame& v) {
  if (u.dim() != v.dim()) throw std::invalid_argument("frame_distance: dim mismatch");
  const int ru = u.rank(), rv = v.rank();
  if (ru == 0 && rv == 0) return 0.0;
  Eigen::MatrixXd b(u.dim(), ru + rv);
  if (ru > 0) b.leftCols(ru) = u.cols();
  if (rv > 0) b.rightCols(rv) = v.cols();
  // Orthonormal basis Q of span([U V]); the projector difference restricted
  // to that span carries the full spectrum.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(b, Eigen::ComputeThinU);
  int k = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > 1e-12) ++k;
  const Eigen::MatrixXd q = svd.matrixU().leftCols(k);
  const Eigen::MatrixXd qu = q.transpose() * u.cols();
  const Eigen::MatrixXd qv = q.transpose() * v.cols();
  const Eigen::MatrixXd a = qu * qu.transpose() - qv * qv.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Frame direct_sum(const Frame& a, const Frame& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("direct_sum: dim mismatch");
  if (a.rank() == 0) return b;
  if (b.rank() == 0) return a;
  Eigen::MatrixXd m(a.dim(), a.rank() + b.rank());
  m.leftCols(a.rank()) = a.cols();
  m.rightCols(b.rank()) = b.cols();
  return Frame::unchecked(qr_positive(m));
}

}  // namespace smim::tensor
