#include "core/eigs.hpp"

#include <stdexcept>

#include "core/frame.hpp"

namespace smim::estimator {

EigResult subspace_iteration(const Matvec& op, Eigen::Index dim, int k, double tol, int max_iter,
                             Rng& rng, const Eigen::MatrixXd* init) {
  if (k < 1 || k > dim) throw std::invalid_argument("subspace_iteration: need 1 <= k <= dim");
  Eigen::MatrixXd block(dim, k);
  if (init) {
    if (init->rows() != dim || init->cols() != k)
      throw std::invalid_argument("subspace_iteration: bad init shape");
    block = *init;
  } else {
    for (int j = 0; j < k; ++j)
      for (Eigen::Index i = 0; i < dim; ++i) block(i, j) = rng.normal();
  }
  block = tensor::qr_positive(block);

  EigResult result;
  Eigen::MatrixXd next(dim, k);
  Eigen::VectorXd in(dim), out(dim);
  for (int it = 0; it < max_iter; ++it) {
    for (int j = 0; j < k; ++j) {
      in = block.col(j);
      op(in, out);
      next.col(j) = out;
    }
    const Eigen::MatrixXd q = tensor::qr_positive(next);
    // projector distance via the smallest singular value of B^T Q
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(block.transpose() * q);
    const double smin = svd.singularValues().minCoeff();
    const double dist = std::sqrt(std::max(0.0, 1.0 - smin * smin));
    block = q;
    result.iterations = it + 1;
    if (dist < tol) {
      result.converged = true;
      break;
    }
  }

  // Rayleigh-Ritz on the converged block
  Eigen::MatrixXd mb(dim, k);
  for (int j = 0; j < k; ++j) {
    in = block.col(j);
    op(in, out);
    mb.col(j) = out;
  }
  Eigen::MatrixXd h = block.transpose() * mb;
  h = 0.5 * (h + h.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  result.values = es.eigenvalues().reverse();
  result.vectors = block * es.eigenvectors().rowwise().reverse();
  return result;
}

}  // namespace smim::estimator
