#include "core/kernel.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "core/harmonic.hpp"

namespace smim::estimator {

void Kernel::features(const double* y, Eigen::VectorXd& out) const {
  const int m = base_rank();
  if (rotations.empty()) {
    out.resize(m);
    out = table.col(binning.bin_of(y));
    return;
  }
  const int arity = binning.arity();
  const int base = arity - rot_dim;
  out.resize(m * static_cast<int>(rotations.size()));
  Eigen::VectorXd rotated(arity);
  for (int c = 0; c < base; ++c) rotated[c] = y[c];
  const double scale = 1.0 / std::sqrt(static_cast<double>(rotations.size()));
  Eigen::Map<const Eigen::VectorXd> r(y + base, rot_dim);
  for (std::size_t j = 0; j < rotations.size(); ++j) {
    rotated.tail(rot_dim).noalias() = rotations[j] * r;
    out.segment(static_cast<Eigen::Index>(j) * m, m) =
        scale * table.col(binning.bin_of(rotated.data()));
  }
}

double Kernel::eval(const double* y1, const double* y2) const {
  Eigen::VectorXd f1, f2;
  features(y1, f1);
  features(y2, f2);
  return f1.dot(f2);
}

namespace {

// Frame coefficient statistic g(z) = (W^T)^{ox l} H(z) flattened; conditional
// means of g are (a fixed invertible map of) the zeta coefficients, which is
// all the whitening construction needs.
struct CalibrationStats {
  Eigen::MatrixXd mean_full;   // q x B
  Eigen::MatrixXd mean_half1;  // q x B
  Eigen::MatrixXd mean_half2;  // q x B
  Eigen::VectorXd prob;        // B
  Eigen::VectorXd count;       // B
};

CalibrationStats bin_statistics(const Eigen::MatrixXd& stats, const Eigen::MatrixXd& labels,
                                const Binning& binning) {
  const int n = static_cast<int>(stats.cols());
  const int q = static_cast<int>(stats.rows());
  const int nb = binning.total_bins();
  CalibrationStats out;
  out.mean_full = Eigen::MatrixXd::Zero(q, nb);
  out.mean_half1 = Eigen::MatrixXd::Zero(q, nb);
  out.mean_half2 = Eigen::MatrixXd::Zero(q, nb);
  out.prob = Eigen::VectorXd::Zero(nb);
  out.count = Eigen::VectorXd::Zero(nb);
  Eigen::VectorXd c1 = Eigen::VectorXd::Zero(nb), c2 = Eigen::VectorXd::Zero(nb);
  for (int i = 0; i < n; ++i) {
    const int b = binning.bin_of(labels.col(i).data());
    out.mean_full.col(b) += stats.col(i);
    out.count[b] += 1;
    // alternate halves by within-bin arrival order
    if (static_cast<long long>(out.count[b]) % 2 == 1) {
      out.mean_half1.col(b) += stats.col(i);
      c1[b] += 1;
    } else {
      out.mean_half2.col(b) += stats.col(i);
      c2[b] += 1;
    }
  }
  for (int b = 0; b < nb; ++b) {
    if (out.count[b] > 0) out.mean_full.col(b) /= out.count[b];
    if (c1[b] > 0) out.mean_half1.col(b) /= c1[b];
    if (c2[b] > 0) out.mean_half2.col(b) /= c2[b];
    out.prob[b] = out.count[b] / n;
  }
  return out;
}

}  // namespace

Kernel oracle_kernel_reduced(const models::LinkSpec& link, const tensor::Frame& w_ref,
                             const tensor::Frame& u_ref, int ell, const OracleKernelOptions& opt,
                             uint64_t seed) {
  if (ell < 1) throw std::invalid_argument("oracle_kernel: need ell >= 1");
  const int d = w_ref.dim();
  const int su = u_ref.rank();
  const int d_res = d - su;

  const models::Dataset cal = models::sample_mim(link, w_ref, opt.n_cal, seed);
  const tensor::Frame u_perp = su == 0
                                   ? tensor::Frame::unchecked(Eigen::MatrixXd::Identity(d, d))
                                   : complement(u_ref);
  const models::ReducedDataset red = su == 0
                                         ? models::ReducedDataset{cal, {}}
                                         : models::condition(cal, u_ref, u_perp);
  const models::Dataset& data = red.data;

  // residual planted frame: orthonormal basis of U_perp^T W_ref
  const Eigen::MatrixXd res = u_perp.cols().transpose() * w_ref.cols();
  Eigen::MatrixXd w_res;
  int s_res = 0;
  {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(res, Eigen::ComputeThinU);
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
      if (svd.singularValues()[i] > 1e-9) ++s_res;
    w_res = svd.matrixU().leftCols(s_res);
  }
  if (s_res == 0) throw std::invalid_argument("oracle_kernel: conditioning frame exhausts the support");

  const harmonic::HarmonicEvaluator ev(d_res, ell);
  const Eigen::Index q = tensor::pow_ll(s_res, ell);
  Eigen::MatrixXd stats(q, data.n());
  for (int i = 0; i < data.n(); ++i) {
    const Eigen::VectorXd t = w_res.transpose() * data.z.col(i);
    stats.col(i) = ev.frame_coeff(t).data();
  }

  Kernel k;
  k.b_cap = opt.b_cap;
  k.rot_dim = su;
  k.binning = Binning::equal_mass(data.y, opt.n_bins, std::max(8, data.n() / 64));
  const CalibrationStats cs = bin_statistics(stats, data.y, k.binning);

  // split-half second moment: unbiased for E[lambda lambda^T] (cross terms)
  Eigen::MatrixXd upsilon = Eigen::MatrixXd::Zero(q, q);
  double noise_tr = 0.0;
  for (int b = 0; b < k.binning.total_bins(); ++b) {
    if (cs.count[b] < 2) continue;
    upsilon += 0.5 * cs.prob[b] *
               (cs.mean_half1.col(b) * cs.mean_half2.col(b).transpose() +
                cs.mean_half2.col(b) * cs.mean_half1.col(b).transpose());
    noise_tr += cs.prob[b] * 0.25 * (cs.mean_half1.col(b) - cs.mean_half2.col(b)).squaredNorm();
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(upsilon);
  const Eigen::VectorXd evals = es.eigenvalues().reverse();
  const double lead = evals.size() ? evals[0] : 0.0;
  const double floor = std::max({1e-12, opt.rel_tol * std::abs(lead), 3.0 * noise_tr});
  int m = 0;
  while (m < evals.size() && evals[m] > floor) ++m;
  if (m == 0) {
    k.degenerate = true;
    k.table = Eigen::MatrixXd::Zero(0, k.binning.total_bins());
    return k;
  }

  // whitened features per bin: T(b) = D^{-1/2} E^T lambda_b, clamped to b_cap
  Eigen::MatrixXd basis(q, m);
  for (int j = 0; j < m; ++j) basis.col(j) = es.eigenvectors().col(q - 1 - j);
  k.table.resize(m, k.binning.total_bins());
  for (int b = 0; b < k.binning.total_bins(); ++b) {
    Eigen::VectorXd f = basis.transpose() * cs.mean_full.col(b);
    for (int j = 0; j < m; ++j) f[j] /= std::sqrt(evals[j]);
    const double ssq = f.squaredNorm();
    if (ssq > k.b_cap) f *= std::sqrt(k.b_cap / ssq);
    k.table.col(b) = f;
  }
  return k;
}

Kernel oracle_kernel(const models::LinkSpec& link, int d, int ell, const OracleKernelOptions& opt,
                     uint64_t seed) {
  Rng rng = Rng::stream(seed, 0x6f72636cULL);  // frame substream
  const tensor::Frame w_ref = tensor::random_frame(d, link.s, rng);
  return oracle_kernel_reduced(link, w_ref, tensor::Frame::empty(d), ell, opt,
                               mix_keys(seed, 0x63616cULL));
}

Kernel symmetrize_kernel(const Kernel& base, int s_rot, int n_rot, Rng& rng) {
  if (s_rot < 1) throw std::invalid_argument("symmetrize_kernel: need s_rot >= 1");
  if (base.rot_dim != s_rot)
    throw std::invalid_argument("symmetrize_kernel: base kernel was not calibrated on s_rot trailing coords");
  Kernel k = base;
  k.rotations.clear();
  for (int j = 0; j < n_rot; ++j) {
    const tensor::Frame g = tensor::random_frame(s_rot, s_rot, rng);
    k.rotations.push_back(g.cols());
  }
  return k;
}

std::string Kernel::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = "smim-kernel-v1";
  j["b_cap"] = b_cap;
  j["degenerate"] = degenerate;
  j["rot_dim"] = rot_dim;
  j["edges"] = nlohmann::ordered_json::array();
  for (const auto& e : binning.edges) j["edges"].push_back(e);
  j["table"] = nlohmann::ordered_json::array();
  for (Eigen::Index r = 0; r < table.rows(); ++r) {
    std::vector<double> row(table.cols());
    for (Eigen::Index c = 0; c < table.cols(); ++c) row[c] = table(r, c);
    j["table"].push_back(row);
  }
  j["rotations"] = nlohmann::ordered_json::array();
  for (const auto& g : rotations) {
    std::vector<double> flat(g.size());
    Eigen::Map<Eigen::MatrixXd>(flat.data(), g.rows(), g.cols()) = g;
    j["rotations"].push_back(flat);
  }
  return j.dump();
}

Kernel Kernel::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  if (j.value("format", "") != "smim-kernel-v1") throw std::runtime_error("kernel: bad format tag");
  Kernel k;
  k.b_cap = j.at("b_cap").get<double>();
  k.degenerate = j.at("degenerate").get<bool>();
  k.rot_dim = j.at("rot_dim").get<int>();
  for (const auto& e : j.at("edges")) k.binning.edges.push_back(e.get<std::vector<double>>());
  const auto& rows = j.at("table");
  const int m = static_cast<int>(rows.size());
  const int nb = k.binning.total_bins();
  k.table.resize(m, nb);
  for (int r = 0; r < m; ++r) {
    const auto row = rows[r].get<std::vector<double>>();
    if (static_cast<int>(row.size()) != nb) throw std::runtime_error("kernel: table width mismatch");
    for (int c = 0; c < nb; ++c) k.table(r, c) = row[c];
  }
  for (const auto& g : j.at("rotations")) {
    const auto flat = g.get<std::vector<double>>();
    Eigen::MatrixXd m2(k.rot_dim, k.rot_dim);
    Eigen::Map<Eigen::MatrixXd>(m2.data(), k.rot_dim, k.rot_dim) =
        Eigen::Map<const Eigen::MatrixXd>(flat.data(), k.rot_dim, k.rot_dim);
    k.rotations.push_back(m2);
  }
  return k;
}

void Kernel::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("kernel: cannot write " + path);
  out << to_json();
}

Kernel Kernel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("kernel: cannot read " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json(text);
}

}  // namespace smim::estimator
