#include "core/xi.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "core/binning.hpp"
#include "core/coeffs.hpp"
#include "core/harmonic.hpp"
#include "core/tensor.hpp"

namespace smim::complexity {

namespace {

struct ReducedModel {
  models::Dataset data;       // conditioned samples
  Eigen::MatrixXd w_res;      // residual planted frame (d_res x s_res)
  int s_res = 0;
};

ReducedModel draw_reduced(const models::LinkSpec& link, const tensor::Frame& w,
                          const tensor::Frame& u, int n_mc, uint64_t seed) {
  models::Dataset full = models::sample_mim(link, w, n_mc, seed);
  ReducedModel out;
  if (u.rank() == 0) {
    out.data = std::move(full);
    out.w_res = w.cols();
    out.s_res = w.rank();
    return out;
  }
  const tensor::Frame u_perp = tensor::complement(u);
  models::ReducedDataset red = models::condition(full, u, u_perp);
  out.data = std::move(red.data);
  const Eigen::MatrixXd res = u_perp.cols().transpose() * w.cols();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(res, Eigen::ComputeThinU);
  int s_res = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > 1e-9) ++s_res;
  out.w_res = svd.matrixU().leftCols(s_res);
  out.s_res = s_res;
  return out;
}

int default_bins(int n_mc, int requested) {
  if (requested > 0) return requested;
  return std::min(64, static_cast<int>(std::ceil(std::cbrt(double(n_mc)))));
}

}  // namespace

XiEstimate estimate_xi_norm(const models::LinkSpec& link, const tensor::Frame& w,
                            const tensor::Frame& u, int ell, const XiOptions& opt, uint64_t seed) {
  if (ell == 0) return {1.0, 0.0, 1, 0};  // xi_{.,0} == 1 identically
  if (ell < 0) throw std::invalid_argument("estimate_xi_norm: need ell >= 0");
  const ReducedModel rm = draw_reduced(link, w, u, opt.n_mc, seed);
  const models::Dataset& data = rm.data;
  const int n = data.n();
  const int d_res = data.d;
  const harmonic::HarmonicEvaluator ev(d_res, ell);

  const estimator::Binning bins =
      estimator::Binning::equal_mass(data.y, default_bins(opt.n_mc, opt.n_bins),
                                     std::max(8, n / 64));
  std::vector<std::vector<int>> members(bins.total_bins());
  for (int i = 0; i < n; ++i) members[bins.bin_of(data.y.col(i).data())].push_back(i);

  XiEstimate est;
  Eigen::VectorXd scores(n);  // per-sample projection scores, mean == estimate
  scores.setZero();
  long long usable = 0;
  constexpr int kTile = 1024;
  for (const auto& idx : members) {
    const int nb = static_cast<int>(idx.size());
    if (nb < 2) continue;
    est.bins += 1;
    usable += nb;
    Eigen::MatrixXd zb(d_res, nb);
    for (int i = 0; i < nb; ++i) zb.col(i) = data.z.col(idx[i]);
    Eigen::VectorXd rowsum = Eigen::VectorXd::Zero(nb);
    double pairsum = 0.0;
    for (int i0 = 0; i0 < nb; i0 += kTile) {
      const int ilen = std::min(kTile, nb - i0);
      for (int j0 = i0; j0 < nb; j0 += kTile) {
        const int jlen = std::min(kTile, nb - j0);
        const Eigen::MatrixXd gram =
            zb.middleCols(i0, ilen).transpose() * zb.middleCols(j0, jlen);
        for (int i = 0; i < ilen; ++i) {
          const int jstart = (j0 == i0) ? i + 1 : 0;
          for (int j = jstart; j < jlen; ++j) {
            const double v = ev.zonal(std::clamp(gram(i, j), -1.0, 1.0));
            pairsum += v;
            rowsum[i0 + i] += v;
            rowsum[j0 + j] += v;
          }
        }
      }
    }
    est.pairs += static_cast<long long>(nb) * (nb - 1) / 2;
    const double u_b = 2.0 * pairsum / (double(nb) * (nb - 1.0));
    for (int i = 0; i < nb; ++i) {
      const double h1 = rowsum[i] / (nb - 1.0);
      scores[idx[i]] = 2.0 * (h1 - u_b) + u_b;
    }
    est.value += (double(nb) / n) * u_b;
  }
  if (usable < n / 2)
    throw std::runtime_error("estimate_xi_norm: too few samples per bin (over half the mass unusable)");

  // multiplier bootstrap on the projection scores
  const double mean = scores.mean();
  Rng brng = Rng::stream(seed, 0x626f6f74ULL);
  const int breps = 200;
  double bs = 0.0, bss = 0.0;
  for (int rep = 0; rep < breps; ++rep) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += brng.normal() * (scores[i] - mean);
    const double repv = acc / n;
    bs += repv;
    bss += repv * repv;
  }
  est.std_error = std::sqrt(std::max(0.0, bss / breps - (bs / breps) * (bs / breps)));
  return est;
}

Eigen::MatrixXd tw_operator(int d_ambient, int s, int ell) {
  const Eigen::Index q = tensor::pow_ll(s, ell);
  Eigen::MatrixXd m(q, q);
  for (Eigen::Index k = 0; k < q; ++k) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(q);
    e[k] = 1.0;
    const tensor::Tensor basis = tensor::sym_project(tensor::Tensor(s, ell, e));
    tensor::Tensor out(s, ell);
    tensor::Tensor cur = basis;
    for (int j = 0; 2 * j <= ell; ++j) {
      out += h_coeff(d_ambient, ell, j) * tensor::sym_with_identities(cur, j);
      if (cur.order() >= 2) cur = tensor::partial_trace(cur);
    }
    m.col(k) = out.data();
  }
  return 0.5 * (m + m.transpose());
}

XiSpectrumEntry estimate_xi_spectrum(const models::LinkSpec& link, const tensor::Frame& w,
                                     const tensor::Frame& u, int ell, const XiOptions& opt,
                                     uint64_t seed) {
  if (ell < 1) throw std::invalid_argument("estimate_xi_spectrum: need ell >= 1");
  const ReducedModel rm = draw_reduced(link, w, u, opt.n_mc, seed);
  const models::Dataset& data = rm.data;
  const int n = data.n();
  const int d_res = data.d;
  const int s_res = rm.s_res;
  if (s_res == 0) throw std::invalid_argument("estimate_xi_spectrum: conditioning exhausts the support");
  const harmonic::HarmonicEvaluator ev(d_res, ell);
  const Eigen::Index q = tensor::pow_ll(s_res, ell);

  XiSpectrumEntry entry;
  entry.ell = ell;

  // per-bin split-half means of the frame coefficients
  const estimator::Binning bins =
      estimator::Binning::equal_mass(data.y, default_bins(opt.n_mc, opt.n_bins),
                                     std::max(8, n / 64));
  const int nb = bins.total_bins();
  Eigen::MatrixXd sum1 = Eigen::MatrixXd::Zero(q, nb), sum2 = Eigen::MatrixXd::Zero(q, nb);
  Eigen::VectorXd c1 = Eigen::VectorXd::Zero(nb), c2 = Eigen::VectorXd::Zero(nb),
                  cnt = Eigen::VectorXd::Zero(nb);
  for (int i = 0; i < n; ++i) {
    const int b = bins.bin_of(data.y.col(i).data());
    const Eigen::VectorXd t = rm.w_res.transpose() * data.z.col(i);
    const Eigen::VectorXd g = ev.frame_coeff(t).data();
    cnt[b] += 1;
    if (static_cast<long long>(cnt[b]) % 2 == 1) {
      sum1.col(b) += g;
      c1[b] += 1;
    } else {
      sum2.col(b) += g;
      c2[b] += 1;
    }
  }

  // whitening by T_W^{-1/2}: trace(Upsilon) then matches ||xi||^2 exactly
  const Eigen::MatrixXd tw = tw_operator(d_res, s_res, ell);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tes(tw);
  Eigen::VectorXd tinv_half = Eigen::VectorXd::Zero(q);
  Eigen::VectorXd tinv = Eigen::VectorXd::Zero(q);
  for (Eigen::Index i = 0; i < q; ++i) {
    if (tes.eigenvalues()[i] > 1e-10) {
      tinv_half[i] = 1.0 / std::sqrt(tes.eigenvalues()[i]);
      tinv[i] = 1.0 / tes.eigenvalues()[i];
    }
  }
  const Eigen::MatrixXd w_half =
      tes.eigenvectors() * tinv_half.asDiagonal() * tes.eigenvectors().transpose();
  const Eigen::MatrixXd w_inv =
      tes.eigenvectors() * tinv.asDiagonal() * tes.eigenvectors().transpose();

  Eigen::MatrixXd upsilon = Eigen::MatrixXd::Zero(q, q);  // whitened geometry
  Eigen::MatrixXd upsilon_raw = Eigen::MatrixXd::Zero(q, q);
  double noise_tr = 0.0;
  for (int b = 0; b < nb; ++b) {
    if (c1[b] < 1 || c2[b] < 1) continue;
    const double pb = cnt[b] / n;
    const Eigen::VectorXd l1 = w_half * (sum1.col(b) / c1[b]);
    const Eigen::VectorXd l2 = w_half * (sum2.col(b) / c2[b]);
    upsilon += 0.5 * pb * (l1 * l2.transpose() + l2 * l1.transpose());
    noise_tr += 0.25 * pb * (l1 - l2).squaredNorm();
    const Eigen::VectorXd r1 = w_inv * (sum1.col(b) / c1[b]);
    const Eigen::VectorXd r2 = w_inv * (sum2.col(b) / c2[b]);
    upsilon_raw += 0.5 * pb * (r1 * r2.transpose() + r2 * r1.transpose());
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(upsilon);
  entry.mu = es.eigenvalues().reverse();
  entry.xi_norm_sq = std::max(0.0, upsilon.trace());
  entry.std_error = noise_tr;  // scale of the MC noise on the trace
  entry.noise_floor = 3.0 * noise_tr;

  const double mu1 = entry.mu.size() ? entry.mu[0] : 0.0;
  if (mu1 <= entry.noise_floor || mu1 <= 0) {
    entry.at_noise_floor = true;
    entry.r = entry.t = entry.s0 = 0;
    entry.u0_res = tensor::Frame::empty(d_res);
    return entry;
  }

  // gap rule: smallest r with mu_r >= c_mu mu_1 and mu_{r+1} <= c_mu mu_1 / gamma
  const double big = opt.c_mu * mu1;
  const double small = big / opt.gamma_gap;
  int r = 0;
  for (int k = 1; k <= entry.mu.size(); ++k) {
    const double next = k < entry.mu.size() ? entry.mu[k] : 0.0;
    if (entry.mu[k - 1] >= big && next <= small) {
      r = k;
      break;
    }
  }
  if (r == 0) {
    while (r < entry.mu.size() && entry.mu[r] >= big) ++r;  // fallback: all large ones
    r = std::max(r, 1);
  }
  entry.r = r;

  // signal tensor in residual-frame coordinates: Z0 = sum_j V_j ox V_j with
  // V_j the top-r eigen-tensors of the raw-coefficient second moment. With
  // row-major storage, Mat_{a,2l-a}(V ox V) is a plain reshape of the flat
  // outer product, so the small s-space matricizations sum directly.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esr(upsilon_raw);
  const int a = opt.split_a > 0 ? opt.split_a : (ell == 1 ? 1 : ell / 2);
  const Eigen::Index rows_t = tensor::pow_ll(s_res, a);
  Eigen::MatrixXd mat_t = Eigen::MatrixXd::Zero(rows_t, q * q / rows_t);
  Eigen::MatrixXd mat_s = Eigen::MatrixXd::Zero(s_res, q * q / s_res);
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  for (int j = 0; j < r; ++j) {
    const Eigen::VectorXd v = esr.eigenvectors().col(q - 1 - j);
    const RowMat vv = v * v.transpose();  // flat row-major = vec(V ox V)
    mat_t += Eigen::Map<const RowMat>(vv.data(), rows_t, q * q / rows_t);
    mat_s += Eigen::Map<const RowMat>(vv.data(), s_res, q * q / s_res);
  }
  const auto matrix_rank = [](const Eigen::MatrixXd& m, Eigen::MatrixXd* left = nullptr,
                              int keep = 0) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU);
    int rank = 0;
    const double top = svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
      if (svd.singularValues()[i] > 0.25 * top && svd.singularValues()[i] > 1e-12) ++rank;
    if (left) *left = svd.matrixU().leftCols(keep > 0 ? keep : rank);
    return rank;
  };
  entry.t = matrix_rank(mat_t);
  Eigen::MatrixXd left;
  entry.s0 = matrix_rank(mat_s, &left);
  entry.u0_res = tensor::Frame::unchecked(rm.w_res * left);
  return entry;
}

}  // namespace smim::complexity
