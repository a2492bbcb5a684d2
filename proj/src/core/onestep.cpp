#include "core/onestep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace smim::estimator {

int adaptive_rank(const Eigen::VectorXd& values_desc) {
  const int k = static_cast<int>(values_desc.size());
  if (k <= 1) return k;
  // bulk = lower half of the profile
  std::vector<double> bulk(values_desc.data() + k / 2, values_desc.data() + k);
  std::sort(bulk.begin(), bulk.end());
  const double med = bulk[bulk.size() / 2];
  std::vector<double> dev;
  dev.reserve(bulk.size());
  for (double v : bulk) dev.push_back(std::abs(v - med));
  std::sort(dev.begin(), dev.end());
  const double mad = dev[dev.size() / 2];
  const double thresh = med + 4.0 * mad + 1e-12;
  int r = 0;
  while (r < k && values_desc[r] > thresh) ++r;
  return r;
}

OneStepResult one_step(const models::Dataset& data, const UnfoldConfig& cfg, const Kernel& kernel,
                       uint64_t seed, const Eigen::MatrixXd* init) {
  const auto t_start = std::chrono::steady_clock::now();
  if (cfg.ell >= 2 && cfg.a < 1)
    throw std::invalid_argument("one_step: need a >= 1 for the contraction step");

  const MhatOperator op(data, kernel, cfg);
  const Eigen::Index dim = op.dim();
  const int d = data.d;
  const int max_iter =
      cfg.max_iter > 0 ? cfg.max_iter : 50 * static_cast<int>(std::ceil(std::log(std::max(3, d))));

  OneStepResult res;
  OneStepDiagnostics& diag = res.diag;

  // resolve t: requested, or adaptive from an exploratory profile
  int t = cfg.t;
  Rng rng = Rng::stream(seed, 0x706f77ULL);  // power-iteration substream
  const Matvec mv = [&op](const Eigen::VectorXd& v, Eigen::VectorXd& out) { op.matvec(v, out); };
  if (t <= 0) {
    const int probe = static_cast<int>(std::min<Eigen::Index>(dim, 8));
    const EigResult er = subspace_iteration(mv, dim, probe, cfg.tol, max_iter, rng);
    t = std::max(1, adaptive_rank(er.values));
  }
  const int block = static_cast<int>(std::min<Eigen::Index>(dim, t + cfg.oversample));

  const EigResult er = subspace_iteration(mv, dim, block, cfg.tol, max_iter, rng, init);
  diag.mhat_eigs = er.values;
  diag.iterations = er.iterations;
  diag.converged = er.converged;
  diag.t = t;
  if (!er.values.allFinite() || er.values[0] <= 0.0) {
    diag.stalled = true;
  }
  if (er.values.size() >= t && t >= 1 && er.values[t - 1] <= 1e-9 * std::abs(er.values[0]))
    diag.rank_deficient = true;

  // contraction: P = sum_{s<=t} Mat_{1,a-1}(v_s) Mat_{1,a-1}(v_s)^T
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(d, d);
  const Eigen::Index tail = dim / d;  // d^(a-1)
  for (int s = 0; s < t; ++s) {
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
        er.vectors.col(s).data(), d, tail);
    p.noalias() += m * m.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p);
  diag.p_eigs = es.eigenvalues().reverse();

  int s0 = cfg.s0;
  if (s0 <= 0) s0 = std::max(1, adaptive_rank(diag.p_eigs));
  s0 = std::min(s0, d);
  diag.s0 = s0;
  if (diag.p_eigs[s0 - 1] <= 1e-12 * std::max(1e-300, diag.p_eigs[0])) diag.stalled = true;

  Eigen::MatrixXd u(d, s0);
  for (int j = 0; j < s0; ++j) u.col(j) = es.eigenvectors().col(d - 1 - j);
  res.u0 = tensor::Frame::unchecked(std::move(u));

  diag.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_start)
                     .count();
  return res;
}

}  // namespace smim::estimator
