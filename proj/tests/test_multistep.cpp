#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "core/multistep.hpp"
#include "core/pipeline.hpp"

using namespace smim;
using namespace smim::models;
using namespace smim::tensor;
using namespace smim::estimator;

TEST_CASE("split_batches covers the dataset") {
  Rng frng(1);
  const Frame w = random_frame(8, 2, frng);
  const Dataset ds = sample_mim(LinkSpec::parity(2, 0.1), w, 103, 5);
  const auto batches = split_batches(ds, 3);
  REQUIRE(batches.size() == 3);
  CHECK(batches[0].n() == 34);
  CHECK(batches[2].n() == 35);
  CHECK((batches[1].z.col(0) - ds.z.col(34)).norm() == 0.0);
}

TEST_CASE("T=1 multi_step degenerates to one_step with the same seed") {
  Rng frng(2);
  const int d = 14;
  const Frame w = random_frame(d, 2, frng);
  const LinkSpec link = LinkSpec::parity(2, 0.1);
  const Dataset ds = sample_mim(link, w, 3000, 7);
  OracleKernelOptions kopt;
  kopt.n_cal = 8000;
  kopt.n_bins = 16;
  const Kernel k = oracle_kernel(link, d, 2, kopt, 11);

  const uint64_t seed = 99;
  UnfoldConfig cfg = UnfoldConfig::for_degree(2);
  cfg.t = 2;
  cfg.s0 = 2;
  const OneStepResult single = one_step(ds, cfg, k, seed);
  const MultiStepResult multi =
      multi_step({ds}, {2}, {k}, {{2, 2}}, cfg.tol, cfg.max_iter, seed);
  REQUIRE_FALSE(multi.trace.aborted);
  CHECK((multi.w_hat.cols() - single.u0.cols()).norm() == 0.0);  // identical output
}

TEST_CASE("kernel chain: staircase reference recovery and ranks") {
  const LinkSpec link = LinkSpec::staircase(0.1);
  pipeline::EstimateOptions opt;
  opt.degrees = {1, 2};
  opt.plan_mc = 40000;
  opt.kernel_cal = 12000;
  opt.seed = 3;
  const pipeline::KernelChain chain = pipeline::build_kernel_chain(link, 20, opt);
  REQUIRE(chain.kernels.size() == 2);
  REQUIRE(chain.ranks.size() == 2);
  CHECK(chain.ranks[0] == std::pair<int, int>{1, 1});
  CHECK(chain.ranks[1] == std::pair<int, int>{2, 2});
  CHECK(chain.kernels[0].rot_dim == 0);
  CHECK(chain.kernels[1].rot_dim == 1);
  CHECK(chain.kernels[1].rotations.size() == 16);
  CHECK(chain.reference.conditioning[0].rank() == 0);
  CHECK(chain.reference.conditioning[1].rank() == 1);
}

TEST_CASE("multi-step staircase recovers all three directions") {
  Rng frng(4);
  const int d = 20, n_per = 6000;
  const Frame w = random_frame(d, 3, frng);
  const LinkSpec link = LinkSpec::staircase(0.1);
  const Dataset ds = sample_mim(link, w, 2 * n_per, 17);

  pipeline::EstimateOptions opt;
  opt.degrees = {1, 2};
  opt.plan_mc = 40000;
  opt.kernel_cal = 16000;
  opt.seed = 5;
  const pipeline::KernelChain chain = pipeline::build_kernel_chain(link, d, opt);
  const MultiStepResult res = multi_step(split_batches(ds, 2), opt.degrees, chain.kernels,
                                         chain.ranks, 1e-6, -1, 21);
  REQUIRE_FALSE(res.trace.aborted);
  REQUIRE(res.w_hat.rank() == 3);
  CHECK(frame_distance(res.w_hat, w) <= 0.5);
  // step 1 alone found the linear direction
  const double overlap = (res.trace.steps[0].u_step.cols().transpose() * w.col(0)).squaredNorm();
  CHECK(overlap >= 0.7);
}

TEST_CASE("multi-step mixture of parities: degree (2,2) recovers rank 4") {
  Rng frng(5);
  const int d = 25, n_per = 9000;
  const LinkSpec link = LinkSpec::mixture_parity(1, 2, 3, 0.3, 0.1);
  REQUIRE(link.s == 4);
  const Frame w = random_frame(d, 4, frng);
  const Dataset ds = sample_mim(link, w, 2 * n_per, 23);

  pipeline::EstimateOptions opt;
  opt.degrees = {2, 2};
  opt.plan_mc = 60000;
  opt.kernel_cal = 20000;
  opt.seed = 7;
  const pipeline::KernelChain chain = pipeline::build_kernel_chain(link, d, opt);
  // the first step recovers the small parity's plane, the second the residual
  CHECK(chain.ranks[0] == std::pair<int, int>{2, 2});
  CHECK(chain.ranks[1] == std::pair<int, int>{2, 2});
  const MultiStepResult res = multi_step(split_batches(ds, 2), opt.degrees, chain.kernels,
                                         chain.ranks, 1e-6, -1, 29);
  REQUIRE_FALSE(res.trace.aborted);
  CHECK(res.w_hat.rank() == 4);
  CHECK(frame_distance(res.w_hat, w) <= 0.6);
}

TEST_CASE("run_estimate end-to-end report") {
  Rng frng(6);
  const int d = 16;
  const Frame w = random_frame(d, 2, frng);
  const LinkSpec link = LinkSpec::parity(2, 0.1);
  const Dataset ds = sample_mim(link, w, 4000, 31);
  pipeline::EstimateOptions opt;
  opt.degrees = {2};
  opt.plan_mc = 30000;
  opt.kernel_cal = 10000;
  opt.seed = 9;
  const pipeline::EstimateOutcome out = pipeline::run_estimate(ds, &link, opt, &w);
  CHECK_FALSE(out.stalled);
  CHECK(out.report.contains("frame_distance"));
  CHECK(out.report["recovered_rank"].get<int>() == 2);
  CHECK(out.report["frame_distance"].get<double>() <= 0.4);
  CHECK(out.report["steps"].size() == 1);
}
