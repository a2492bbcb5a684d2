#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "core/eigs.hpp"
#include "core/harmonic.hpp"
#include "core/kernel.hpp"
#include "core/mhat.hpp"
#include "core/models.hpp"
#include "core/onestep.hpp"
#include "core/parallel.hpp"

using namespace smim;
using namespace smim::models;
using namespace smim::tensor;
using namespace smim::estimator;

namespace {

// Dense Mhat straight from the double-sum definition of the algorithm.
Eigen::MatrixXd dense_mhat(const Dataset& data, const Kernel& k, int ell, int a, int b) {
  const int n = data.n();
  const harmonic::HarmonicEvaluator ev(data.d, ell);
  std::vector<Eigen::MatrixXd> mats;
  for (int i = 0; i < n; ++i)
    mats.push_back(unfold(ev.harmonic_tensor(data.z.col(i)), a, b).m);
  const Eigen::Index rows = mats[0].rows();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, rows);
  if (a == b) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        m += k.eval(data.y.col(i).data(), data.y.col(j).data()) * mats[i] * mats[j].transpose();
    m /= double(n) * n;
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        m += k.eval(data.y.col(i).data(), data.y.col(j).data()) * mats[i] * mats[j].transpose();
      }
    m /= double(n) * (n - 1.0);
  }
  return m;
}

Eigen::MatrixXd operator_dense(const MhatOperator& op) {
  const Eigen::Index dim = op.dim();
  Eigen::MatrixXd m(dim, dim);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(dim), col(dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    e[j] = 1.0;
    op.matvec(e, col);
    m.col(j) = col;
    e[j] = 0.0;
  }
  return m;
}

Kernel constant_rank1_kernel(int arity, double value) {
  Kernel k;
  k.binning.edges.assign(arity, {});
  k.table = Eigen::MatrixXd::Constant(1, 1, std::sqrt(value));
  return k;
}

}  // namespace

TEST_CASE("oracle kernel on noiseless parity: sign structure and rank") {
  const LinkSpec link = LinkSpec::parity(2, 0.0);
  OracleKernelOptions opt;
  opt.n_cal = 8000;
  opt.n_bins = 8;
  const Kernel k = oracle_kernel(link, 16, 2, opt, 42);
  CHECK_FALSE(k.degenerate);
  CHECK(k.base_rank() <= 2);
  const double yp = 1.0, ym = -1.0;
  CHECK(k.eval(&yp, &yp) > 0);
  CHECK(k.eval(&ym, &ym) > 0);
  CHECK(k.eval(&yp, &ym) < 0);  // whitened two-atom kernel separates the labels

  // rank bound from the construction: m <= s^ell (+1 slack per the table)
  const Kernel kn = oracle_kernel(LinkSpec::parity(2, 0.1), 16, 2, opt, 43);
  CHECK(kn.rank() <= 5);
}

TEST_CASE("oracle kernel degenerates when labels carry no signal") {
  // sigma >> 1 makes y essentially independent of z at this calibration size
  LinkSpec link = LinkSpec::parity(2, 60.0);
  OracleKernelOptions opt;
  opt.n_cal = 4000;
  opt.n_bins = 8;
  const Kernel k = oracle_kernel(link, 12, 2, opt, 7);
  CHECK(k.degenerate);
}

TEST_CASE("kernel json round trip") {
  const LinkSpec link = LinkSpec::parity(2, 0.1);
  OracleKernelOptions opt;
  opt.n_cal = 3000;
  opt.n_bins = 8;
  const Kernel k = oracle_kernel(link, 10, 2, opt, 9);
  const Kernel k2 = Kernel::from_json(k.to_json());
  CHECK(k2.base_rank() == k.base_rank());
  CHECK((k2.table - k.table).norm() == 0.0);
  const double y1 = 0.95, y2 = -1.05;
  CHECK(k2.eval(&y1, &y2) == k.eval(&y1, &y2));
}

TEST_CASE("implicit Mhat equals the dense double sum") {
  Rng frng(3);
  const int d = 5;
  const Frame w = random_frame(d, 2, frng);

  SUBCASE("a == b, ell = 2") {
    const LinkSpec link = LinkSpec::parity(2, 0.1);
    const Dataset ds = sample_mim(link, w, 40, 11);
    OracleKernelOptions opt;
    opt.n_cal = 3000;
    opt.n_bins = 8;
    const Kernel k = oracle_kernel(link, d, 2, opt, 5);
    UnfoldConfig cfg = UnfoldConfig::for_degree(2);
    const MhatOperator op(ds, k, cfg);
    const Eigen::MatrixXd lhs = operator_dense(op);
    const Eigen::MatrixXd rhs = dense_mhat(ds, k, 2, 1, 1);
    CHECK((lhs - rhs).norm() <= 1e-9 * std::max(1.0, rhs.norm()));
    // PSD quadratic form
    Rng rng(17);
    Eigen::VectorXd v(d), out(d);
    for (int i = 0; i < d; ++i) v[i] = rng.normal();
    op.matvec(v, out);
    CHECK(v.dot(out) >= 0.0);
  }

  SUBCASE("a != b, ell = 3") {
    const LinkSpec link = LinkSpec::staircase(0.1);
    const Frame w3 = random_frame(d, 3, frng);
    const Dataset ds = sample_mim(link, w3, 30, 13);
    OracleKernelOptions opt;
    opt.n_cal = 3000;
    opt.n_bins = 8;
    const Kernel k = oracle_kernel(link, d, 3, opt, 6);
    UnfoldConfig cfg = UnfoldConfig::for_degree(3);
    REQUIRE(cfg.a == 1);
    REQUIRE(cfg.b == 2);
    const MhatOperator op(ds, k, cfg);
    const Eigen::MatrixXd lhs = operator_dense(op);
    const Eigen::MatrixXd rhs = dense_mhat(ds, k, 3, 1, 2);
    CHECK((lhs - rhs).norm() <= 1e-9 * std::max(1.0, rhs.norm()));
  }

  SUBCASE("a != b, ell = 1") {
    const LinkSpec link = LinkSpec::parity(2, 0.1);
    const Dataset ds = sample_mim(link, w, 25, 15);
    OracleKernelOptions opt;
    opt.n_cal = 2000;
    opt.n_bins = 8;
    const Kernel k = oracle_kernel(link, d, 1, opt, 8);
    if (!k.degenerate) {
      UnfoldConfig cfg = UnfoldConfig::for_degree(1);
      const MhatOperator op(ds, k, cfg);
      CHECK((operator_dense(op) - dense_mhat(ds, k, 1, 1, 0)).norm() <= 1e-9);
    }
  }
}

TEST_CASE("n=2 off-square case: hand-assembled value") {
  // Mhat = K(y1,y2) (M1 M2^T + M2 M1^T) / 2 for a rank-one kernel
  Rng frng(5);
  const int d = 4;
  const Frame w = random_frame(d, 3, frng);
  const LinkSpec link = LinkSpec::staircase(0.1);
  Dataset ds = sample_mim(link, w, 2, 21);
  const Kernel k = constant_rank1_kernel(1, 0.7);
  UnfoldConfig cfg = UnfoldConfig::for_degree(3);
  const MhatOperator op(ds, k, cfg);
  const harmonic::HarmonicEvaluator ev(d, 3);
  const Eigen::MatrixXd m1 = unfold(ev.harmonic_tensor(ds.z.col(0)), 1, 2).m;
  const Eigen::MatrixXd m2 = unfold(ev.harmonic_tensor(ds.z.col(1)), 1, 2).m;
  const Eigen::MatrixXd want = 0.7 * 0.5 * (m1 * m2.transpose() + m2 * m1.transpose());
  CHECK((operator_dense(op) - want).norm() <= 1e-10 * std::max(1.0, want.norm()));
}

TEST_CASE("matvec is thread-count independent (bitwise)") {
  Rng frng(6);
  const int d = 10;
  const Frame w = random_frame(d, 2, frng);
  const LinkSpec link = LinkSpec::parity(2, 0.1);
  const Dataset ds = sample_mim(link, w, 2000, 23);
  OracleKernelOptions opt;
  opt.n_cal = 3000;
  opt.n_bins = 8;
  const Kernel k = oracle_kernel(link, d, 2, opt, 10);
  const MhatOperator op(ds, k, UnfoldConfig::for_degree(2));
  Rng rng(29);
  Eigen::VectorXd v(d), o1(d), o4(d);
  for (int i = 0; i < d; ++i) v[i] = rng.normal();
  parallel::set_threads(1);
  op.matvec(v, o1);
  parallel::set_threads(4);
  op.matvec(v, o4);
  parallel::set_threads(1);
  CHECK((o1 - o4).norm() == 0.0);
}

TEST_CASE("subspace iteration") {
  Rng rng(31);
  SUBCASE("diagonal operator") {
    Eigen::VectorXd diag(6);
    diag << 5, 3, 1, 0, 0, 0;
    const Matvec op = [&](const Eigen::VectorXd& v, Eigen::VectorXd& out) {
      out = diag.asDiagonal() * v;
    };
    const EigResult er = subspace_iteration(op, 6, 2, 1e-10, 200, rng);
    CHECK(er.converged);
    CHECK(er.values[0] == doctest::Approx(5.0).epsilon(1e-9));
    CHECK(er.values[1] == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(std::abs(er.vectors(0, 0)) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(std::abs(er.vectors(1, 1)) == doctest::Approx(1.0).epsilon(1e-8));
  }
  SUBCASE("rank one") {
    Eigen::VectorXd u(5);
    for (int i = 0; i < 5; ++i) u[i] = rng.normal();
    const Matvec op = [&](const Eigen::VectorXd& v, Eigen::VectorXd& out) { out = u * u.dot(v); };
    const EigResult er = subspace_iteration(op, 5, 1, 1e-10, 200, rng);
    CHECK(er.values[0] == doctest::Approx(u.squaredNorm()).epsilon(1e-9));
    CHECK(std::abs(er.vectors.col(0).dot(u.normalized())) == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("random PSD vs dense eigensolver") {
    // random basis, fixed spectrum with a clear gap after the third value
    // (the projector comparison is only well-posed given a gap)
    const int n = 50;
    Eigen::MatrixXd g(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) g(i, j) = rng.normal();
    const Eigen::MatrixXd q = tensor::qr_positive(g);
    Eigen::VectorXd spec(n);
    spec[0] = 10;
    spec[1] = 6;
    spec[2] = 3;
    for (int i = 3; i < n; ++i) spec[i] = rng.uniform();
    const Eigen::MatrixXd psd = q * spec.asDiagonal() * q.transpose();
    const Matvec op = [&](const Eigen::VectorXd& v, Eigen::VectorXd& out) { out = psd * v; };
    const EigResult er = subspace_iteration(op, n, 3, 1e-12, 2000, rng);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(psd);
    const Eigen::MatrixXd top = es.eigenvectors().rightCols(3);
    // projector distance
    const Eigen::MatrixXd diff =
        er.vectors * er.vectors.transpose() - top * top.transpose();
    CHECK(diff.operatorNorm() <= 1e-8);
    for (int j = 0; j < 3; ++j)
      CHECK(er.values[j] == doctest::Approx(es.eigenvalues()[n - 1 - j]).epsilon(1e-9));
  }
  SUBCASE("k > dim rejected") {
    const Matvec op = [](const Eigen::VectorXd& v, Eigen::VectorXd& out) { out = v; };
    CHECK_THROWS(subspace_iteration(op, 3, 4, 1e-8, 10, rng));
  }
}

TEST_CASE("one_step recovers a planted parity plane at small scale") {
  Rng frng(7);
  const int d = 16, n = 4000;
  const Frame w = random_frame(d, 2, frng);
  const LinkSpec link = LinkSpec::parity(2, 0.1);
  const Dataset ds = sample_mim(link, w, n, 101);
  OracleKernelOptions opt;
  opt.n_cal = 10000;
  opt.n_bins = 16;
  const Kernel k = oracle_kernel(link, d, 2, opt, 55);
  UnfoldConfig cfg = UnfoldConfig::for_degree(2);
  cfg.t = 2;
  cfg.s0 = 2;
  const OneStepResult res = one_step(ds, cfg, k, 77);
  CHECK_FALSE(res.diag.stalled);
  CHECK(res.u0.rank() == 2);
  CHECK(frame_distance(res.u0, w) <= 0.35);

  SUBCASE("null data: top eigenvalue drops by at least 5x") {
    // y independent of z at the same (d, n): shuffle labels by regenerating
    // with an independent frame so the kernel sees pure noise
    const Frame w2 = random_frame(d, 2, frng);
    Dataset null_ds = sample_mim(link, w2, n, 505);
    // decouple: replace inputs with fresh uniform draws
    Rng zrng(606);
    for (int i = 0; i < n; ++i) null_ds.z.col(i) = sample_sphere(d, zrng);
    const OneStepResult null_res = one_step(null_ds, cfg, k, 77);
    CHECK(res.diag.mhat_eigs[0] >= 5.0 * null_res.diag.mhat_eigs[0]);
  }
}

TEST_CASE("one_step rotation equivariance with transported initializer") {
  Rng frng(8);
  const int d = 12, n = 3000;
  const Frame w = random_frame(d, 2, frng);
  const LinkSpec link = LinkSpec::parity(2, 0.1);
  const Dataset ds = sample_mim(link, w, n, 303);
  OracleKernelOptions opt;
  opt.n_cal = 8000;
  opt.n_bins = 16;
  const Kernel k = oracle_kernel(link, d, 2, opt, 56);
  UnfoldConfig cfg = UnfoldConfig::for_degree(2);
  cfg.t = 2;
  cfg.s0 = 2;
  cfg.tol = 1e-10;
  cfg.max_iter = 500;

  Rng init_rng(909);
  Eigen::MatrixXd init(d, cfg.t + cfg.oversample);
  for (Eigen::Index i = 0; i < init.size(); ++i) init.data()[i] = init_rng.normal();

  const OneStepResult base = one_step(ds, cfg, k, 1, &init);

  const Frame qf = random_frame(d, d, frng);
  const Eigen::MatrixXd q = qf.cols();
  Dataset rot = ds;
  for (int i = 0; i < n; ++i) rot.z.col(i) = q * ds.z.col(i);
  const Eigen::MatrixXd rot_init = q * init;
  const OneStepResult rres = one_step(rot, cfg, k, 1, &rot_init);

  const Frame qu = Frame::unchecked(tensor::qr_positive(q * base.u0.cols()));
  CHECK(frame_distance(qu, rres.u0) <= 1e-6);
}

TEST_CASE("symmetrized kernel: rank and sign-flip averaging") {
  // base kernel over labels (y, r) with r scalar
  const LinkSpec link = LinkSpec::staircase(0.1);
  Rng frng(9);
  const int d = 14;
  const Frame w_ref = random_frame(d, 3, frng);
  const Frame u_ref = Frame(w_ref.cols().leftCols(1));
  OracleKernelOptions opt;
  opt.n_cal = 8000;
  opt.n_bins = 8;
  const Kernel base = oracle_kernel_reduced(link, w_ref, u_ref, 2, opt, 61);
  REQUIRE_FALSE(base.degenerate);
  REQUIRE(base.rot_dim == 1);

  Rng rng(33);
  const Kernel sym = symmetrize_kernel(base, 1, 16, rng);
  CHECK(sym.rank() == base.base_rank() * 16);

  // averaged kernel is closer to sign-invariant than the base one
  Rng lrng(35);
  double base_gap = 0, sym_gap = 0;
  for (int rep = 0; rep < 200; ++rep) {
    double y1[2] = {2.0 * (lrng.uniform() < 0.5 ? 1 : -1) * 1.0 + 0.1 * lrng.normal(),
                    0.3 * lrng.normal()};
    double y2[2] = {0.0 + 0.1 * lrng.normal(), 0.3 * lrng.normal()};
    double f1[2] = {y1[0], -y1[1]};
    double f2[2] = {y2[0], -y2[1]};
    base_gap += std::abs(base.eval(y1, y2) - base.eval(f1, f2));
    sym_gap += std::abs(sym.eval(y1, y2) - sym.eval(f1, f2));
  }
  CHECK(sym_gap <= 0.5 * base_gap + 1e-9);
}

TEST_CASE("degree-1 unfolding recovers a linear link direction") {
  // y = sqrt(d) <w, z> + noise, split (1,0), s0 = 1
  Rng frng(41);
  const int d = 50, n = 2000;
  const Frame w = random_frame(d, 1, frng);
  const LinkSpec link = LinkSpec::parse("poly(s=1,c0=0,c1=[1],sigma=0.5)");
  OracleKernelOptions kopt;
  kopt.n_cal = 12000;
  const Kernel k = oracle_kernel(link, d, 1, kopt, 43);
  REQUIRE_FALSE(k.degenerate);
  std::vector<double> overlaps;
  for (int trial = 0; trial < 5; ++trial) {
    const Dataset ds = sample_mim(link, w, n, 100 + trial);
    UnfoldConfig cfg = UnfoldConfig::for_degree(1);
    cfg.t = 1;
    cfg.s0 = 1;
    const OneStepResult res = one_step(ds, cfg, k, 7 + trial);
    overlaps.push_back((res.u0.cols().transpose() * w.col(0)).squaredNorm());
  }
  std::sort(overlaps.begin(), overlaps.end());
  CHECK(overlaps[overlaps.size() / 2] >= 0.8);
}

TEST_CASE("kernel boundedness: sup of the feature norm stays under the cap") {
  const LinkSpec link = LinkSpec::parity(2, 0.1);
  OracleKernelOptions opt;
  opt.n_cal = 6000;
  opt.b_cap = 3.0;
  const Kernel k = oracle_kernel(link, 12, 2, opt, 3);
  Rng frng(5);
  const Frame w = random_frame(12, 2, frng);
  const Dataset ds = sample_mim(link, w, 2000, 9);
  Eigen::VectorXd f;
  double worst = 0;
  for (int i = 0; i < ds.n(); ++i) {
    k.features(ds.y.col(i).data(), f);
    worst = std::max(worst, f.squaredNorm());
  }
  CHECK(worst <= 3.0 + 1e-12);
}

TEST_CASE("kernel symmetrization error decreases with the rotation count") {
  const LinkSpec link = LinkSpec::staircase(0.1);
  Rng frng(70);
  const int d = 14;
  const Frame w_ref = random_frame(d, 3, frng);
  const Frame u_ref = Frame(w_ref.cols().leftCols(1));
  OracleKernelOptions opt;
  opt.n_cal = 8000;
  opt.n_bins = 8;
  const Kernel base = oracle_kernel_reduced(link, w_ref, u_ref, 2, opt, 71);
  REQUIRE_FALSE(base.degenerate);

  // averaged |K(g.)-K(.)| over fresh Haar rotations, per n_rot
  auto invariance_gap = [&](const Kernel& k) {
    Rng lrng(72);
    double gap = 0;
    for (int rep = 0; rep < 300; ++rep) {
      const double g = lrng.uniform() < 0.5 ? 1.0 : -1.0;  // Haar on O(1)
      double y1[2] = {2.0 * (lrng.uniform() < 0.5 ? 1 : -1) + 0.1 * lrng.normal(),
                      0.3 * lrng.normal()};
      double y2[2] = {0.1 * lrng.normal(), 0.3 * lrng.normal()};
      double f1[2] = {y1[0], g * y1[1]};
      double f2[2] = {y2[0], g * y2[1]};
      gap += std::abs(k.eval(y1, y2) - k.eval(f1, f2));
    }
    return gap / 300;
  };

  // the invariance error of a single draw fluctuates (for s' = 1 it is the
  // sign imbalance of the rotations), so measure the mean over draws
  std::vector<double> gaps;
  for (int n_rot : {4, 16, 64}) {
    double acc = 0;
    for (int rep = 0; rep < 12; ++rep) {
      Rng rng = Rng::stream(73, n_rot, rep);
      acc += invariance_gap(symmetrize_kernel(base, 1, n_rot, rng));
    }
    gaps.push_back(acc / 12);
  }
  CHECK(gaps[1] <= gaps[0]);
  CHECK(gaps[2] <= gaps[1]);
}
