#include "core/planner.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace smim::complexity {

AlignChoice align_complexity(const std::vector<XiSpectrumEntry>& spectrum, int d, Mode mode) {
  AlignChoice best;
  const double logd = std::log(double(d));
  for (const auto& e : spectrum) {
    if (e.at_noise_floor || e.xi_norm_sq <= 0) continue;
    const double degree_part = mode == Mode::kSample ? 0.5 * e.ell : double(e.ell);
    const double exponent = degree_part - std::log(e.xi_norm_sq) / logd;
    if (!best.finite || exponent < best.cost_exponent - 1e-12) {
      best.finite = true;
      best.ell = e.ell;
      best.cost_exponent = exponent;
    }
  }
  return best;
}

namespace {

// one greedy pass shared by leap_plan and reference_recovery; degree < 0
// means "choose by align_complexity"
struct GreedyState {
  tensor::Frame acc;
  int rank = 0;
};

std::vector<XiSpectrumEntry> scan_degrees(const models::LinkSpec& link, const tensor::Frame& w,
                                          const tensor::Frame& acc, int max_ell,
                                          const XiOptions& opt, uint64_t seed, int step) {
  std::vector<XiSpectrumEntry> out;
  for (int ell = 1; ell <= max_ell; ++ell)
    out.push_back(estimate_xi_spectrum(link, w, acc, ell, opt,
                                       mix_keys(seed, 0x7370ULL, step, ell)));
  return out;
}

tensor::Frame lift_to_ambient(const tensor::Frame& acc, const tensor::Frame& u_res) {
  if (acc.rank() == 0) return u_res;
  const tensor::Frame perp = tensor::complement(acc);
  return tensor::Frame::unchecked(tensor::qr_positive(perp.cols() * u_res.cols()));
}

}  // namespace

LeapPlan leap_plan(const models::LinkSpec& link, const tensor::Frame& w, int max_ell, Mode mode,
                   const XiOptions& opt, uint64_t seed) {
  LeapPlan plan;
  plan.mode = mode;
  GreedyState st{tensor::Frame::empty(w.dim()), 0};
  const int s = w.rank();
  for (int step = 0; st.rank < s && step < s; ++step) {
    LeapStep ls;
    ls.spectrum = scan_degrees(link, w, st.acc, max_ell, opt, seed, step);
    const AlignChoice choice = align_complexity(ls.spectrum, w.dim() - st.rank, mode);
    if (!choice.finite) {
      plan.stalled = true;  // infinite leap: learning stalls at this state
      plan.steps.push_back(std::move(ls));
      break;
    }
    const XiSpectrumEntry& e = ls.spectrum[choice.ell - 1];
    ls.ell = choice.ell;
    ls.cost_exponent = choice.cost_exponent;
    ls.rank_increment = e.s0;
    if (e.s0 == 0) {
      plan.stalled = true;
      plan.steps.push_back(std::move(ls));
      break;
    }
    st.acc = tensor::direct_sum(st.acc, lift_to_ambient(st.acc, e.u0_res));
    st.rank += e.s0;
    plan.steps.push_back(std::move(ls));
  }
  plan.recovered_rank = st.rank;
  for (const auto& ls : plan.steps)
    plan.total_exponent = std::max(plan.total_exponent, ls.cost_exponent);
  if (st.rank < s && !plan.stalled) plan.stalled = true;
  return plan;
}

RecoverySequence reference_recovery(const models::LinkSpec& link, const tensor::Frame& w,
                                    const std::vector<int>& degrees, const XiOptions& opt,
                                    uint64_t seed) {
  RecoverySequence seq;
  seq.accumulated = tensor::Frame::empty(w.dim());
  for (std::size_t step = 0; step < degrees.size(); ++step) {
    seq.conditioning.push_back(seq.accumulated);
    XiSpectrumEntry e = estimate_xi_spectrum(link, w, seq.accumulated, degrees[step], opt,
                                             mix_keys(seed, 0x726566ULL, step));
    if (e.at_noise_floor || e.s0 == 0) {
      seq.stalled = true;
      seq.entries.push_back(std::move(e));
      break;
    }
    seq.accumulated =
        tensor::direct_sum(seq.accumulated, lift_to_ambient(seq.accumulated, e.u0_res));
    seq.entries.push_back(std::move(e));
  }
  return seq;
}

// ---------- symbolic planner ----------

namespace {
long long gcd_ll(long long a, long long b) { return b == 0 ? a : gcd_ll(b, a % b); }
}  // namespace

Fraction::Fraction(long long n, long long d) : num(n), den(d) {
  if (den == 0) throw std::invalid_argument("Fraction: zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const long long g = gcd_ll(std::abs(num), den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
}

Fraction Fraction::operator+(const Fraction& o) const {
  return Fraction(num * o.den + o.num * den, den * o.den);
}
Fraction Fraction::operator-(const Fraction& o) const {
  return Fraction(num * o.den - o.num * den, den * o.den);
}
Fraction Fraction::operator*(const Fraction& o) const { return Fraction(num * o.num, den * o.den); }
bool Fraction::operator<(const Fraction& o) const { return num * o.den < o.num * den; }

std::string Fraction::str() const {
  std::ostringstream os;
  os << num;
  if (den != 1) os << "/" << den;
  return os.str();
}

SymbolicPlan symbolic_mixture_plan(const Fraction& k0, const Fraction& k1, const Fraction& k2,
                                   const Fraction& p_exp, Mode mode) {
  if (!(k0 < k1) || !(k1 < k2)) throw std::invalid_argument("symbolic plan: need k0 < k1 < k2");
  const Fraction zero(0), two(2), half(1, 2);
  const Fraction deg_w = mode == Mode::kSample ? half : Fraction(1);
  // candidate at an unrecovered state: (degree, -log_d xi^2 in units of q)
  struct Cand {
    Fraction degree, xi_exp;
  };
  const auto cost = [&](const Cand& c) { return deg_w * c.degree + c.xi_exp; };
  // state 0: small parity at k1 with xi^2 = p^2, big parity at k2 with xi^2 = 1
  const Cand small{k1, two * p_exp};
  const Cand big{k2, zero};
  SymbolicPlan plan;
  plan.mode = mode;
  const bool pick_small = cost(small) < cost(big) ||
                          (!(cost(big) < cost(small)) && small.degree < big.degree);
  const Cand first = pick_small ? small : big;
  // residual after removing the chosen parity's directions: the other parity
  // minus the k0 shared ones, with its own mixture weight
  const Cand second = pick_small ? Cand{k2 - k0, zero} : Cand{k1 - k0, two * p_exp};
  const Fraction rank_first = pick_small ? k1 : k2;
  const Fraction rank_second = pick_small ? k2 - k0 : k1 - k0;
  plan.steps.push_back({first.degree, cost(first), rank_first});
  plan.steps.push_back({second.degree, cost(second), rank_second});
  plan.total_exponent = cost(first) < cost(second) ? cost(second) : cost(first);
  return plan;
}

}  // namespace smim::complexity
