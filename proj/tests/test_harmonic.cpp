#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "core/coeffs.hpp"
#include "core/frame.hpp"
#include "core/harmonic.hpp"
#include "core/rng.hpp"
#include "core/tensor.hpp"

using namespace smim;
using namespace smim::tensor;
using namespace smim::harmonic;

namespace {

Eigen::VectorXd random_unit(int d, Rng& rng) {
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v[i] = rng.normal();
  return v / v.norm();
}

Tensor random_traceless(int d, int l, Rng& rng) {
  Tensor t(d, l);
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = rng.normal();
  return tf_project(t);
}

}  // namespace

TEST_CASE("harmonic tensor closed forms") {
  Rng rng(1);
  SUBCASE("degree 1 is sqrt(d) z") {
    const int d = 7;
    const Eigen::VectorXd z = random_unit(d, rng);
    const HarmonicEvaluator ev(d, 1);
    const Tensor h = ev.harmonic_tensor(z);
    CHECK((h.data() - std::sqrt(double(d)) * z).norm() <= 1e-12);
  }
  SUBCASE("degree 2 closed form") {
    const int d = 5;
    const Eigen::VectorXd z = random_unit(d, rng);
    const HarmonicEvaluator ev(d, 2);
    const Tensor h = ev.harmonic_tensor(z);
    const Eigen::MatrixXd want =
        std::sqrt(0.5 * (d + 2.0) * d) *
        (z * z.transpose() - Eigen::MatrixXd::Identity(d, d) / d);
    CHECK((unfold(h, 1, 1).m - want).norm() <= 1e-12 * want.norm());
  }
  SUBCASE("Frobenius norm is sqrt(N)") {
    for (int l : {1, 2, 3}) {
      const int d = 6;
      const HarmonicEvaluator ev(d, l);
      const Tensor h = ev.harmonic_tensor(random_unit(d, rng));
      CHECK(h.norm() == doctest::Approx(std::sqrt(harmonic_dim(d, l))).epsilon(1e-10));
    }
  }
  SUBCASE("rejects non-unit input") {
    const HarmonicEvaluator ev(4, 2);
    Eigen::VectorXd z = Eigen::VectorXd::Ones(4);
    CHECK_THROWS(ev.harmonic_tensor(z));
  }
}

TEST_CASE("harmonic_tensor equals scaled dense tf projection") {
  Rng rng(2);
  for (int d : {3, 5}) {
    for (int l : {1, 2, 3, 4}) {
      const Eigen::VectorXd z = random_unit(d, rng);
      const HarmonicEvaluator ev(d, l);
      const Tensor h = ev.harmonic_tensor(z);
      const Tensor want = ev.scale() * tf_project(Tensor::rank_one(z, l));
      CHECK((h - want).norm() <= 1e-11 * std::max(1.0, want.norm()));
    }
  }
}

TEST_CASE("harmonic_eval matches dense inner product") {
  Rng rng(3);
  const int d = 5;
  for (int l : {0, 1, 2, 3}) {
    const HarmonicEvaluator ev(d, l);
    const Eigen::VectorXd z = random_unit(d, rng);
    const Tensor a = random_traceless(d, l, rng);
    const double fast = ev.eval(a, z);
    const double dense = a.dot(ev.harmonic_tensor(z));
    CHECK(fast == doctest::Approx(dense).epsilon(1e-10));
  }
  // degree-1 closed form <w, H_1(z)> = sqrt(d) <w, z>
  const HarmonicEvaluator ev1(d, 1);
  const Eigen::VectorXd w = random_unit(d, rng), z = random_unit(d, rng);
  CHECK(ev1.eval(Tensor(d, 1, w), z) == doctest::Approx(std::sqrt(double(d)) * w.dot(z)));
}

TEST_CASE("equivariance under rotations") {
  Rng rng(4);
  for (int d : {3, 6}) {
    for (int l : {1, 2, 3}) {
      const HarmonicEvaluator ev(d, l);
      const Eigen::VectorXd z = random_unit(d, rng);
      const Frame qf = random_frame(d, d, rng);
      const Eigen::MatrixXd q = qf.cols();
      const Tensor lhs = ev.harmonic_tensor(q * z);
      const Tensor rhs = apply_matrix(q, ev.harmonic_tensor(z));
      CHECK((lhs - rhs).norm() <= 1e-10 * rhs.norm());
    }
  }
}

TEST_CASE("gegenbauer values") {
  CHECK(gegenbauer(5, 0, 0.3) == doctest::Approx(1.0));
  for (int d : {3, 9, 40}) {
    // Q_1(t) = sqrt(d) t
    CHECK(gegenbauer(d, 1, 0.4) == doctest::Approx(std::sqrt(double(d)) * 0.4).epsilon(1e-12));
  }
  // d=3: Q_2(t) = (3 sqrt(5)/2) t^2 - sqrt(5)/2
  const double t = 0.7;
  CHECK(gegenbauer(3, 2, t) ==
        doctest::Approx(1.5 * std::sqrt(5.0) * t * t - 0.5 * std::sqrt(5.0)).epsilon(1e-12));
  CHECK_THROWS(gegenbauer(5, 2, 1.5));
}

TEST_CASE("reproducing identity <H(w),H(z)> = sqrt(N) Q_l(<w,z>)") {
  Rng rng(5);
  for (int d : {3, 6, 12}) {
    for (int l = 0; l <= 4; ++l) {
      const HarmonicEvaluator ev(d, l);
      double worst = 0;
      for (int rep = 0; rep < 20; ++rep) {
        const Eigen::VectorXd w = random_unit(d, rng), z = random_unit(d, rng);
        const double lhs = ev.harmonic_tensor(w).dot(ev.harmonic_tensor(z));
        const double rhs = std::sqrt(harmonic_dim(d, l)) * gegenbauer(d, l, w.dot(z));
        worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
        CHECK(ev.zonal(w.dot(z)) == doctest::Approx(rhs).epsilon(1e-11));
      }
      CHECK(worst <= 1e-9);
    }
  }
}

TEST_CASE("gegenbauer orthonormality under the sphere marginal") {
  for (int d : {3, 10, 50}) {
    Eigen::VectorXd nodes, weights;
    gauss_marginal(d, 16, nodes, weights);
    CHECK(weights.sum() == doctest::Approx(1.0).epsilon(1e-12));
    for (int l = 0; l <= 6; ++l) {
      for (int m = l; m <= 6; ++m) {
        double acc = 0;
        for (int i = 0; i < nodes.size(); ++i)
          acc += weights[i] * gegenbauer(d, l, nodes[i]) * gegenbauer(d, m, nodes[i]);
        CHECK(std::abs(acc - (l == m ? 1.0 : 0.0)) <= 1e-8);
      }
    }
  }
}

TEST_CASE("unfolded matvec: dense oracle over all splits") {
  Rng rng(6);
  MatvecPlan::Workspace ws;
  for (int d : {3, 4, 6}) {
    for (int l = 1; l <= 4; ++l) {
      const HarmonicEvaluator ev(d, l);
      const Eigen::VectorXd z = random_unit(d, rng);
      const Tensor h = ev.harmonic_tensor(z);
      for (int a = 0; a <= l; ++a) {
        const int b = l - a;
        const Eigen::MatrixXd dense = unfold(h, a, b).m;
        for (int rep = 0; rep < 5; ++rep) {
          Eigen::VectorXd v(dense.cols());
          for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
          Eigen::VectorXd out;
          ev.matvec(z, a, b, v, out, ws);
          const Eigen::VectorXd want = dense * v;
          CHECK((out - want).norm() <= 1e-10 * std::max(1.0, want.norm()));
        }
      }
    }
  }
}

TEST_CASE("unfolded matvec closed forms") {
  Rng rng(7);
  MatvecPlan::Workspace ws;
  SUBCASE("l=2, a=b=1") {
    const int d = 9;
    const HarmonicEvaluator ev(d, 2);
    const Eigen::VectorXd z = random_unit(d, rng);
    Eigen::VectorXd v(d);
    for (int i = 0; i < d; ++i) v[i] = rng.normal();
    Eigen::VectorXd out;
    ev.matvec(z, 1, 1, v, out, ws);
    const Eigen::VectorXd want = std::sqrt(0.5 * (d + 2.0) * d) * (z * z.dot(v) - v / d);
    CHECK((out - want).norm() <= 1e-11 * want.norm());
  }
  SUBCASE("l=1, (a,b)=(1,0)") {
    const int d = 12;
    const HarmonicEvaluator ev(d, 1);
    const Eigen::VectorXd z = random_unit(d, rng);
    Eigen::VectorXd v(1);
    v[0] = 1.7;
    Eigen::VectorXd out;
    ev.matvec(z, 1, 0, v, out, ws);
    CHECK((out - std::sqrt(double(d)) * 1.7 * z).norm() <= 1e-12);
  }
}

TEST_CASE("frame_coeff equals projected dense harmonic tensor") {
  Rng rng(8);
  const int d = 7, s = 2;
  for (int l : {1, 2, 3}) {
    const HarmonicEvaluator ev(d, l);
    const Frame w = random_frame(d, s, rng);
    const Eigen::VectorXd z = random_unit(d, rng);
    const Tensor dense = apply_matrix(w.cols().transpose(), ev.harmonic_tensor(z));
    const Tensor fast = ev.frame_coeff(w.cols().transpose() * z);
    CHECK((dense - fast).norm() <= 1e-10 * std::max(1.0, dense.norm()));
  }
}

TEST_CASE("product of harmonics decomposition: b coefficients") {
  Rng rng(9);
  const int d = 5;
  for (auto [p, q] : {std::pair{1, 1}, std::pair{2, 1}, std::pair{2, 2}}) {
    const HarmonicEvaluator evp(d, p), evq(d, q);
    const Eigen::VectorXd z = random_unit(d, rng);
    const Tensor a = random_traceless(d, p, rng), b = random_traceless(d, q, rng);
    const double lhs = a.dot(evp.harmonic_tensor(z)) * b.dot(evq.harmonic_tensor(z));
    double rhs = 0;
    for (int j = 0; j <= std::min(p, q); ++j) {
      const Tensor dj = diamond(a, b, j);
      const HarmonicEvaluator evj(d, p + q - 2 * j);
      rhs += product_b_coeff(d, p, q, j) * dj.dot(evj.harmonic_tensor(z));
    }
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  }
  // p=q=1, j=1 term reduces to b <a, b> (degree-0 harmonic is 1)
  // and b^{(d)} stays Theta(1) in d
  const double r50 = product_b_coeff(50, 2, 2, 1);
  const double r200 = product_b_coeff(200, 2, 2, 1);
  CHECK(r50 / r200 > 0.5);
  CHECK(r50 / r200 < 2.0);
}

TEST_CASE("isometry in expectation (Monte Carlo)") {
  // E[<A,H(z)><B,H(z)>] = <A,B> within 5 standard errors
  Rng rng(10);
  const int d = 10, n = 20000;
  for (int l : {1, 2}) {
    const HarmonicEvaluator ev(d, l);
    const Tensor a = random_traceless(d, l, rng), b = random_traceless(d, l, rng);
    double sum = 0, sumsq = 0;
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd z = random_unit(d, rng);
      const double v = ev.eval(a, z) * ev.eval(b, z);
      sum += v;
      sumsq += v * v;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sumsq / n - mean * mean) / n);
    CHECK(std::abs(mean - a.dot(b)) <= 5 * se);
  }
}
