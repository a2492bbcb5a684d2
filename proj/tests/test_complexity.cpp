#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "core/harmonic.hpp"
#include "core/hermite.hpp"
#include "core/planner.hpp"
#include "core/xi.hpp"

using namespace smim;
using namespace smim::models;
using namespace smim::tensor;
using namespace smim::complexity;

namespace {
constexpr double kPi = 3.14159265358979323846;

// noiseless 2-parity: ||xi_2||^2 = (d+2)d/2 * 2 * E[z1 z2 | +]^2 with
// E[z1 z2 | +] = E|z1 z2| = 2/(pi d), i.e. exactly 4(d+2)/(pi^2 d)
double parity_xi2_exact(int d) { return 4.0 * (d + 2.0) / (kPi * kPi * d); }
}  // namespace

TEST_CASE("estimate_xi_norm: degree zero and null links") {
  Rng frng(1);
  const Frame w = random_frame(15, 2, frng);
  const LinkSpec link = LinkSpec::parity(2, 0.1);
  XiOptions opt;
  opt.n_mc = 20000;
  const XiEstimate e0 = estimate_xi_norm(link, w, Frame::empty(15), 0, opt, 3);
  CHECK(e0.value == 1.0);
  CHECK(e0.std_error == 0.0);

  // parity has no degree-1 signal
  const XiEstimate e1 = estimate_xi_norm(link, w, Frame::empty(15), 1, opt, 4);
  CHECK(std::abs(e1.value) <= 3.0 * e1.std_error + 1e-6);

  // label independent of z: sigma so large the signal drowns entirely
  const LinkSpec noisy = LinkSpec::parity(2, 50.0);
  const XiEstimate en = estimate_xi_norm(noisy, w, Frame::empty(15), 2, opt, 5);
  CHECK(std::abs(en.value) <= 3.0 * en.std_error + 1e-4);
}

TEST_CASE("estimate_xi_norm: noiseless parity against the exact value") {
  Rng frng(2);
  const int d = 20;
  const Frame w = random_frame(d, 2, frng);
  const LinkSpec link = LinkSpec::parity(2, 0.0);
  XiOptions opt;
  opt.n_mc = 100000;
  const XiEstimate e = estimate_xi_norm(link, w, Frame::empty(d), 2, opt, 6);
  const double exact = parity_xi2_exact(d);
  CHECK(std::abs(e.value - exact) / exact < 0.05);
  CHECK(std::abs(e.value - exact) <= 5.0 * e.std_error + 0.01 * exact);
  CHECK(e.value >= 0.0);
  CHECK(e.value <= 1.0 + 1e-9);
}

TEST_CASE("tw_operator equals the dense frame-projected traceless projection") {
  Rng frng(3);
  const int d = 9, s = 2, ell = 2;
  const Frame w = random_frame(d, s, frng);
  const Eigen::MatrixXd tw = tw_operator(d, s, ell);
  // dense check on symmetric basis tensors
  const Eigen::Index q = pow_ll(s, ell);
  for (Eigen::Index k = 0; k < q; ++k) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(q);
    e[k] = 1.0;
    const Tensor b = sym_project(Tensor(s, ell, e));
    const Tensor lifted = apply_matrix(w.cols(), b);
    const Tensor back = apply_matrix(w.cols().transpose(), tf_project(lifted));
    const Eigen::VectorXd want = back.data();
    const Eigen::VectorXd got = tw * b.data();
    CHECK((want - got).norm() <= 1e-12 * std::max(1.0, want.norm()));
  }
}

TEST_CASE("xi spectrum: parity structure and trace identity") {
  Rng frng(4);
  const int d = 25;
  const Frame w = random_frame(d, 2, frng);
  const LinkSpec link = LinkSpec::parity(2, 0.1);
  XiOptions opt;
  opt.n_mc = 60000;
  const XiSpectrumEntry e2 = estimate_xi_spectrum(link, w, Frame::empty(d), 2, opt, 7);
  CHECK_FALSE(e2.at_noise_floor);
  CHECK(e2.r == 1);      // single symmetric eigen-tensor
  CHECK(e2.t == 2);      // its Mat_{1,3} unfolding has rank 2
  CHECK(e2.s0 == 2);     // and it spans both planted directions
  CHECK(frame_distance(e2.u0_res, w) <= 0.15);

  // trace identity against the independent pairwise estimator
  const XiEstimate pairwise = estimate_xi_norm(link, w, Frame::empty(d), 2, opt, 8);
  CHECK(std::abs(e2.xi_norm_sq - pairwise.value) <=
        5.0 * (pairwise.std_error + e2.std_error) + 0.03 * pairwise.value);

  const XiSpectrumEntry e1 = estimate_xi_spectrum(link, w, Frame::empty(d), 1, opt, 9);
  CHECK(e1.at_noise_floor);
  CHECK(e1.r == 0);
}

TEST_CASE("hermite tensors") {
  Rng rng(5);
  const int d = 5;
  Eigen::VectorXd x(d);
  for (int i = 0; i < d; ++i) x[i] = rng.normal();

  CHECK(hermite_tensor(x, 0).data()[0] == doctest::Approx(1.0));
  CHECK((hermite_tensor(x, 1).data() - x).norm() <= 1e-14);
  const Tensor he2 = hermite_tensor(x, 2);
  const Eigen::MatrixXd want =
      (x * x.transpose() - Eigen::MatrixXd::Identity(d, d)) / std::sqrt(2.0);
  CHECK((unfold(he2, 1, 1).m - want).norm() <= 1e-12);
  CHECK_THROWS(hermite_tensor(x, 5));

  SUBCASE("Wiener-chaos isometry by Monte Carlo") {
    const Tensor a = sym_project([&] {
      Tensor t(d, 2);
      for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = rng.normal();
      return t;
    }());
    const Tensor b = sym_project([&] {
      Tensor t(d, 2);
      for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = rng.normal();
      return t;
    }());
    const int n = 40000;
    double sum = 0, sumsq = 0;
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd g(d);
      for (int j = 0; j < d; ++j) g[j] = rng.normal();
      const Tensor he = hermite_tensor(g, 2);
      const double v = a.dot(he) * b.dot(he);
      sum += v;
      sumsq += v * v;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sumsq / n - mean * mean) / n);
    CHECK(std::abs(mean - a.dot(b)) <= 5 * se);
  }
}

TEST_CASE("beta coefficients: closed forms and identities") {
  const int d = 6;
  Rng rng(6);
  SUBCASE("hand values") {
    for (double r : {0.5, 1.3, 2.7}) {
      CHECK(beta_coeff(d, 1, 1, r) == doctest::Approx(r / std::sqrt(double(d))).epsilon(1e-12));
      CHECK(beta_coeff(d, 2, 0, r) ==
            doctest::Approx((r * r - d) / (std::sqrt(2.0) * d)).epsilon(1e-12));
    }
  }
  SUBCASE("Laguerre form agrees with the finite sum") {
    for (int k = 0; k <= 4; ++k)
      for (int l = k % 2; l <= k; l += 2)
        for (double r : {0.4, 1.0, 2.2, 3.8}) {
          const double a = beta_coeff(d, k, l, r);
          const double b = beta_coeff_sum(d, k, l, r);
          CHECK(std::abs(a - b) <= 1e-10 * std::max(1.0, std::abs(a)));
        }
    CHECK_THROWS(beta_coeff(d, 3, 2, 1.0));
  }
  SUBCASE("pointwise Hermite-to-harmonic decomposition") {
    for (int k = 1; k <= 4; ++k) {
      for (int rep = 0; rep < 5; ++rep) {
        Tensor a(d, k);
        for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
        a = sym_project(a);
        Eigen::VectorXd x(d);
        for (int i = 0; i < d; ++i) x[i] = rng.normal();
        const double r = x.norm();
        const Eigen::VectorXd z = x / r;
        const double lhs = a.dot(hermite_tensor(x, k));
        double rhs = 0;
        Tensor cur = a;
        for (int j = 0; 2 * j <= k; ++j) {
          const harmonic::HarmonicEvaluator ev(d, k - 2 * j);
          rhs += beta_coeff(d, k, k - 2 * j, r) * ev.eval(tf_project(cur), z);
          if (cur.order() >= 2) cur = partial_trace(cur);
        }
        CHECK(std::abs(lhs - rhs) <= 1e-8 * std::max(1.0, std::abs(lhs)));
      }
    }
  }
}

TEST_CASE("beta moments: closed forms, MC check, and the d^{-j} scaling") {
  SUBCASE("E[beta_{2,0}^2] = 1/d") {
    for (int d : {10, 20, 50}) {
      const BetaMoments m = beta_moments(d, 0, 1);
      CHECK(m.second_moment == doctest::Approx(1.0 / d).epsilon(1e-12));
      CHECK(m.mean == doctest::Approx(0.0));
      CHECK(m.mean_vanishes);
    }
  }
  SUBCASE("Monte Carlo validation at (d,l,j) = (20,1,1)") {
    const int d = 20;
    const BetaMoments m = beta_moments(d, 1, 1);
    Rng rng(7);
    const int n = 200000;
    double s1 = 0, s2 = 0, v1 = 0, v2 = 0;
    for (int i = 0; i < n; ++i) {
      const double r = rng.chi(d);
      const double b = beta_coeff(d, 3, 1, r);
      s1 += b;
      s2 += b * b;
      v1 += b * b;
      v2 += b * b * b * b;
    }
    const double mean = s1 / n, mom2 = s2 / n;
    const double se1 = std::sqrt((v1 / n - mean * mean) / n);
    const double se2 = std::sqrt(std::max(0.0, v2 / n - mom2 * mom2) / n);
    CHECK(std::abs(mean - m.mean) <= 3 * se1);
    CHECK(std::abs(mom2 - m.second_moment) <= 3 * se2);
  }
  SUBCASE("second moment halves when d doubles (j = 1)") {
    const double ratio = beta_moments(40, 1, 1).second_moment / beta_moments(20, 1, 1).second_moment;
    CHECK(ratio > 0.4);
    CHECK(ratio < 0.6);
  }
}

TEST_CASE("align_complexity") {
  std::vector<XiSpectrumEntry> spec(3);
  spec[0].ell = 1;
  spec[0].xi_norm_sq = 1e-3;
  spec[1].ell = 2;
  spec[1].at_noise_floor = true;
  spec[2].ell = 3;
  spec[2].xi_norm_sq = 1.0;
  // d = 100: d^{1/2}/1e-3 = 1e4 vs d^{3/2} = 1e3 -> pick 3
  const AlignChoice s = align_complexity(spec, 100, Mode::kSample);
  CHECK(s.finite);
  CHECK(s.ell == 3);
  CHECK(s.cost_exponent == doctest::Approx(1.5));
  // query mode: d/1e-3 = 1e5 vs d^3 = 1e6 -> pick 1
  const AlignChoice q = align_complexity(spec, 100, Mode::kQuery);
  CHECK(q.ell == 1);
  CHECK(q.cost_exponent == doctest::Approx(1.0 + 1.5));

  std::vector<XiSpectrumEntry> dead(2);
  dead[0].at_noise_floor = true;
  dead[1].at_noise_floor = true;
  CHECK_FALSE(align_complexity(dead, 50, Mode::kSample).finite);
}

TEST_CASE("leap_plan: parity is one step at degree 2") {
  Rng frng(8);
  const int d = 20;
  const Frame w = random_frame(d, 2, frng);
  XiOptions opt;
  opt.n_mc = 40000;
  const LeapPlan plan = leap_plan(LinkSpec::parity(2, 0.1), w, 3, Mode::kSample, opt, 11);
  REQUIRE(plan.steps.size() == 1);
  CHECK_FALSE(plan.stalled);
  CHECK(plan.steps[0].ell == 2);
  CHECK(plan.steps[0].rank_increment == 2);
  CHECK(plan.recovered_rank == 2);

  // identical settings reproduce the identical plan
  const LeapPlan again = leap_plan(LinkSpec::parity(2, 0.1), w, 3, Mode::kSample, opt, 11);
  CHECK(again.steps[0].cost_exponent == plan.steps[0].cost_exponent);
}

TEST_CASE("leap_plan: staircase goes (1,+1) then (2,+2)") {
  Rng frng(9);
  const int d = 18;
  const Frame w = random_frame(d, 3, frng);
  XiOptions opt;
  opt.n_mc = 50000;
  const LeapPlan plan = leap_plan(LinkSpec::staircase(0.1), w, 3, Mode::kSample, opt, 13);
  REQUIRE(plan.steps.size() == 2);
  CHECK_FALSE(plan.stalled);
  CHECK(plan.steps[0].ell == 1);
  CHECK(plan.steps[0].rank_increment == 1);
  CHECK(plan.steps[1].ell == 2);
  CHECK(plan.steps[1].rank_increment == 2);
  CHECK(plan.recovered_rank == 3);
}

TEST_CASE("leap_plan: stalls on a link with no signal") {
  Rng frng(10);
  const Frame w = random_frame(12, 2, frng);
  XiOptions opt;
  opt.n_mc = 20000;
  const LeapPlan plan = leap_plan(LinkSpec::parity(2, 50.0), w, 2, Mode::kSample, opt, 17);
  CHECK(plan.stalled);
  CHECK(plan.recovered_rank == 0);
}

TEST_CASE("symbolic mixture plan reproduces the exact sequences") {
  // k0 = 2q, k1 = 4q, k2 = 8q, p = d^{-3q/2}
  const Fraction k0(2), k1(4), k2(8), p_exp(3, 2);
  const SymbolicPlan s = symbolic_mixture_plan(k0, k1, k2, p_exp, Mode::kSample);
  REQUIRE(s.steps.size() == 2);
  CHECK(s.steps[0].degree == Fraction(8));   // k2 first
  CHECK(s.steps[1].degree == Fraction(2));   // then k1 - k0
  CHECK(s.total_exponent == Fraction(4));    // n ~ d^{4q}

  const SymbolicPlan q = symbolic_mixture_plan(k0, k1, k2, p_exp, Mode::kQuery);
  CHECK(q.steps[0].degree == Fraction(4));   // k1 first
  CHECK(q.steps[1].degree == Fraction(6));   // then k2 - k0
  CHECK(q.total_exponent == Fraction(7));    // T ~ d^{7q} log d
}

TEST_CASE("directional SIM planner picks the generative exponent") {
  Rng frng(11);
  const int d = 40;
  const Frame w = random_frame(d, 1, frng);
  XiOptions opt;
  opt.n_mc = 60000;
  for (int kstar : {1, 2, 3}) {
    LinkSpec link;
    link.kind = LinkKind::kDirectionalMim;
    link.s = 1;
    link.id = "gen" + std::to_string(kstar);
    link.sigma = 0.2;
    std::vector<XiSpectrumEntry> spec;
    for (int ell = 1; ell <= 3; ++ell)
      spec.push_back(estimate_xi_spectrum(link, w, Frame::empty(d), ell, opt,
                                          mix_keys(19, kstar, ell)));
    const AlignChoice c = align_complexity(spec, d, Mode::kSample);
    CHECK(c.finite);
    CHECK(c.ell == kstar);
  }
}

TEST_CASE("polynomial link: degree-2 signal persists for reduced models") {
  Rng frng(30);
  const int d = 22;
  const LinkSpec link = LinkSpec::parse("poly(s=2,c0=0,c1=[0.7 0],c2=[0 0.5 0.5 0.3],sigma=0.3)");
  const Frame w = random_frame(d, 2, frng);
  XiOptions opt;
  opt.n_mc = 40000;
  const LeapPlan plan = leap_plan(link, w, 2, Mode::kSample, opt, 31);
  CHECK_FALSE(plan.stalled);
  CHECK(plan.recovered_rank == 2);
  for (const auto& step : plan.steps) CHECK(step.ell <= 2);
}

TEST_CASE("infinite-leap verdict for a link that never sees the input") {
  Rng frng(80);
  const Frame w = random_frame(14, 2, frng);
  XiOptions opt;
  opt.n_mc = 15000;
  const LinkSpec dead = LinkSpec::parity(2, 40.0);
  for (Mode mode : {Mode::kSample, Mode::kQuery}) {
    const LeapPlan plan = leap_plan(dead, w, 2, mode, opt, 81);
    CHECK(plan.stalled);
    CHECK(plan.recovered_rank == 0);
  }
}
