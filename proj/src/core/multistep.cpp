#include "core/multistep.hpp"

#include <stdexcept>

namespace smim::estimator {

std::vector<models::Dataset> split_batches(const models::Dataset& data, int t) {
  if (t < 1 || t > data.n()) throw std::invalid_argument("split_batches: bad batch count");
  std::vector<models::Dataset> out;
  const int per = data.n() / t;
  for (int k = 0; k < t; ++k) {
    models::Dataset b;
    b.d = data.d;
    b.link_hash = data.link_hash;
    b.frame_hash = data.frame_hash;
    b.seed = data.seed;
    const int lo = k * per;
    const int len = (k == t - 1) ? data.n() - lo : per;
    b.z = data.z.middleCols(lo, len);
    b.y = data.y.middleCols(lo, len);
    out.push_back(std::move(b));
  }
  return out;
}

MultiStepResult multi_step(const std::vector<models::Dataset>& batches,
                           const std::vector<int>& degrees, const std::vector<Kernel>& kernels,
                           const std::vector<std::pair<int, int>>& ranks, double tol, int max_iter,
                           uint64_t seed) {
  const std::size_t t_steps = degrees.size();
  if (batches.size() != t_steps || kernels.size() != t_steps || ranks.size() != t_steps)
    throw std::invalid_argument("multi_step: batches/degrees/kernels/ranks must align");
  if (t_steps == 0) throw std::invalid_argument("multi_step: empty degree sequence");
  const int d = batches[0].d;

  MultiStepResult res;
  tensor::Frame acc = tensor::Frame::empty(d);
  for (std::size_t t = 0; t < t_steps; ++t) {
    if (batches[t].d != d) throw std::invalid_argument("multi_step: batch dimension mismatch");
    tensor::Frame perp = tensor::complement(acc);
    models::Dataset reduced;
    if (acc.rank() == 0) {
      reduced = batches[t];
    } else {
      reduced = models::condition(batches[t], acc, perp).data;
    }
    UnfoldConfig cfg = UnfoldConfig::for_degree(degrees[t]);
    cfg.t = ranks[t].first;
    cfg.s0 = ranks[t].second;
    cfg.tol = tol;
    cfg.max_iter = max_iter;
    const uint64_t step_seed = t == 0 ? seed : mix_keys(seed, 0x6d73ULL, t);
    OneStepResult step = one_step(reduced, cfg, kernels[t], step_seed);

    StepRecord rec;
    rec.ell = degrees[t];
    rec.diag = step.diag;
    if (step.diag.stalled) {
      rec.u_step = tensor::Frame::empty(d);
      res.trace.steps.push_back(std::move(rec));
      res.trace.aborted = true;
      break;
    }
    const tensor::Frame lifted =
        acc.rank() == 0
            ? step.u0
            : tensor::Frame::unchecked(tensor::qr_positive(perp.cols() * step.u0.cols()));
    rec.u_step = lifted;
    acc = tensor::direct_sum(acc, lifted);
    res.trace.steps.push_back(std::move(rec));
  }
  res.w_hat = acc;
  return res;
}

}  // namespace smim::estimator
