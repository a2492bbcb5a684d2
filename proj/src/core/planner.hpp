#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "core/xi.hpp"

namespace smim::complexity {

enum class Mode { kSample, kQuery };

inline const char* mode_name(Mode m) { return m == Mode::kSample ? "sample" : "query"; }

struct AlignChoice {
  int ell = 0;
  double cost_exponent = 0.0;  // log_d of the predicted cost d^(l or l/2) / xi^2
  bool finite = false;
};

// argmin over degrees of d^(l/2)/||xi||^2 (sample) or d^l/||xi||^2 (query),
// over spectrum entries not at the noise floor; ties break to smaller l.
AlignChoice align_complexity(const std::vector<XiSpectrumEntry>& spectrum, int d, Mode mode);

struct LeapStep {
  int ell = 0;
  double cost_exponent = 0.0;
  int rank_increment = 0;
  std::vector<XiSpectrumEntry> spectrum;  // per-degree entries at this state
};

struct LeapPlan {
  Mode mode = Mode::kSample;
  std::vector<LeapStep> steps;
  double total_exponent = 0.0;  // max step cost; the plan cost
  int recovered_rank = 0;
  bool stalled = false;  // no degree carried signal before rank s was reached
};

// Greedy Monte Carlo planner: estimate the spectrum of the current reduced
// model for each degree, pick the mode-optimal one, condition on the
// population-predicted recovered subframe, recurse until rank s. The planted
// frame is required (this is an analysis tool).
LeapPlan leap_plan(const models::LinkSpec& link, const tensor::Frame& w, int max_ell, Mode mode,
                   const XiOptions& opt, uint64_t seed);

// Reference recovery sequence for a FIXED degree sequence: the conditioning
// frames a multi-step estimator's oracle kernels should be calibrated
// against. Step k holds the accumulated frame BEFORE step k (step 0: empty).
struct RecoverySequence {
  std::vector<tensor::Frame> conditioning;      // size T, ambient coords
  std::vector<XiSpectrumEntry> entries;         // per step
  tensor::Frame accumulated;                    // final recovered frame
  bool stalled = false;
};

RecoverySequence reference_recovery(const models::LinkSpec& link, const tensor::Frame& w,
                                    const std::vector<int>& degrees, const XiOptions& opt,
                                    uint64_t seed);

// ---------- symbolic planner (mixture of parities) ----------

// Exact rational arithmetic for exponents expressed in units of q.
struct Fraction {
  long long num = 0;
  long long den = 1;
  Fraction() = default;
  Fraction(long long n, long long d = 1);
  Fraction operator+(const Fraction& o) const;
  Fraction operator-(const Fraction& o) const;
  Fraction operator*(const Fraction& o) const;
  bool operator<(const Fraction& o) const;
  bool operator==(const Fraction& o) const { return num == o.num && den == o.den; }
  double value() const { return double(num) / double(den); }
  std::string str() const;  // "a/b q" style printing handled by callers
};

struct SymbolicStep {
  Fraction degree;         // harmonic degree, units of q
  Fraction cost_exponent;  // units of q
  Fraction rank_increment;
};

struct SymbolicPlan {
  Mode mode = Mode::kSample;
  std::vector<SymbolicStep> steps;
  Fraction total_exponent;  // units of q; runtime carries an extra log(d)
};

// Mixture of two parities of sizes k1 < k2 sharing k0 directions, mixture
// weight p = d^(-p_exp). All inputs are coefficients of q. The symbolic
// xi scalings are the asymptotic ones: 0 below k1, p^2 on [k1, k2), 1 from k2 on;
// conditioning on either parity leaves the other's residual block.
SymbolicPlan symbolic_mixture_plan(const Fraction& k0, const Fraction& k1, const Fraction& k2,
                                   const Fraction& p_exp, Mode mode);

}  // namespace smim::complexity
