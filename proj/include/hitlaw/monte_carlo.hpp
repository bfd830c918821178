#pragma once

// Seeded orbit sampling of entry times, empirical laws, Kolmogorov distance
// to Exp(1) and to an exact survival curve, and the DKW envelope.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "hitlaw/error.hpp"
#include "hitlaw/measures.hpp"
#include "hitlaw/oracle.hpp"
#include "hitlaw/parallel.hpp"
#include "hitlaw/rng.hpp"
#include "hitlaw/window_set.hpp"

namespace hitlaw {

inline constexpr std::uint64_t kDenseMembershipLimit = std::uint64_t{1} << 27;

struct SamplerConfig {
  std::uint64_t seed = 0;
  std::size_t trials = 100'000;
  std::uint64_t max_steps = 0;  // 0 = ceil(50 / eps)
  unsigned workers = 1;
};

struct EmpiricalLaw {
  int n = 0;
  double eps = 0.0;
  std::uint64_t seed = 0;
  std::size_t trials = 0;
  std::uint64_t max_steps = 0;
  std::vector<std::uint64_t> tau_by_trial;  // 0 marks a censored trial
  std::vector<std::uint64_t> taus;          // uncensored, sorted
  std::vector<double> x;                    // eps * taus
  std::size_t censored = 0;
  std::vector<std::string> warnings;

  std::size_t sample_size() const noexcept { return taus.size(); }
};

namespace detail {

/// Cumulative rows for inverse-CDF symbol draws. The last nonzero entry of
/// each row is pinned to 1 so a draw never falls off the end.
class SymbolSampler {
 public:
  explicit SymbolSampler(const MarkovMeasure& m) : a_(m.alphabet()) {
    cum_.assign(static_cast<std::size_t>(a_ * (a_ + 1)), 0.0);
    fill_row(a_, m.stationary());
    for (int i = 0; i < a_; ++i) fill_row(i, m.kernel().row(static_cast<std::size_t>(i)));
  }

  Symbol initial(Xoshiro256& g) const { return draw(a_, g.uniform()); }
  Symbol step(Symbol from, Xoshiro256& g) const { return draw(from, g.uniform()); }

 private:
  template <class Row>
  void fill_row(int r, const Row& p) {
    double* c = &cum_[static_cast<std::size_t>(r * a_)];
    double acc = 0.0;
    int last = -1;
    for (int j = 0; j < a_; ++j) {
      acc += p[static_cast<std::size_t>(j)];
      c[j] = acc;
      if (p[static_cast<std::size_t>(j)] > 0.0) last = j;
    }
    for (int j = std::max(last, 0); j < a_; ++j) c[j] = 1.0;
  }

  Symbol draw(int r, double u) const {
    const double* c = &cum_[static_cast<std::size_t>(r * a_)];
    int j = 0;
    while (u >= c[j]) ++j;
    return static_cast<Symbol>(j);
  }

  int a_;
  std::vector<double> cum_;  // rows 0..a-1: kernel, row a: pi
};

class Membership {
 public:
  explicit Membership(const WindowSet& u) : set_(&u) {
    const std::uint64_t span = u.codec().power(u.length());
    if (span <= kDenseMembershipLimit) {
      dense_.assign(static_cast<std::size_t>((span + 63) / 64), 0);
      for (auto code : u.codes()) dense_[code >> 6] |= std::uint64_t{1} << (code & 63);
    }
  }
  bool contains(std::uint64_t code) const {
    if (!dense_.empty()) return (dense_[code >> 6] >> (code & 63)) & 1;
    return set_->contains_code(code);
  }

 private:
  const WindowSet* set_;
  std::vector<std::uint64_t> dense_;
};

}  // namespace detail

/// Entry time of one orbit: window at time 0 drawn from the stationary L-word
/// law, then the first k >= 1 whose window lies in U. Returns 0 if no entry
/// happens within max_steps.
inline std::uint64_t sample_one_entry(const detail::SymbolSampler& sampler, const detail::Membership& member,
                                      const WordCodec& codec, int length, std::uint64_t max_steps,
                                      std::uint64_t trial_seed) {
  Xoshiro256 g(trial_seed);
  const auto a = static_cast<std::uint64_t>(codec.power(1));
  const std::uint64_t keep = codec.power(length - 1);
  Symbol s = sampler.initial(g);
  std::uint64_t code = s;
  for (int i = 1; i < length; ++i) {
    s = sampler.step(s, g);
    code = code * a + s;
  }
  for (std::uint64_t k = 1; k <= max_steps; ++k) {
    s = sampler.step(s, g);
    code = (code % keep) * a + s;
    if (member.contains(code)) return k;
  }
  return 0;
}

/// Seeded Monte-Carlo sample of tau_n over cfg.trials orbits. Trial i uses
/// derive_seed(cfg.seed, i) and writes only its own slot, so the output is
/// identical for every worker count.
inline EmpiricalLaw sample_entry_times(const MarkovMeasure& m, const WindowSet& u, const SamplerConfig& cfg,
                                       int n = 0) {
  if (!(u.base() == m.base())) fail(ErrorCode::InvalidShape, "target and measure live on different shifts");
  if (u.empty()) fail(ErrorCode::EmptySet, "empty target");
  if (cfg.trials == 0) fail(ErrorCode::EmptySample, "zero trials requested");
  EmpiricalLaw law;
  law.n = n;
  law.eps = set_measure(m, u);
  if (!(law.eps > 0.0)) fail(ErrorCode::EmptySet, "target has zero measure");
  law.seed = cfg.seed;
  law.trials = cfg.trials;
  law.max_steps = cfg.max_steps != 0 ? cfg.max_steps : static_cast<std::uint64_t>(std::ceil(50.0 / law.eps));
  if (static_cast<double>(law.max_steps) < 10.0 / law.eps)
    law.warnings.push_back("max_steps below 10/eps; expect censoring");

  const detail::SymbolSampler sampler(m);
  const detail::Membership member(u);
  law.tau_by_trial.assign(cfg.trials, 0);
  parallel_for(cfg.trials, cfg.workers, [&](std::size_t i) {
    law.tau_by_trial[i] =
        sample_one_entry(sampler, member, u.codec(), u.length(), law.max_steps, derive_seed(cfg.seed, i));
  });

  for (auto t : law.tau_by_trial) {
    if (t == 0)
      ++law.censored;
    else
      law.taus.push_back(t);
  }
  if (law.taus.empty()) fail(ErrorCode::AllCensored, "every trial reached max_steps = " + std::to_string(law.max_steps));
  std::sort(law.taus.begin(), law.taus.end());
  law.x.reserve(law.taus.size());
  for (auto t : law.taus) law.x.push_back(law.eps * static_cast<double>(t));
  return law;
}

/// Empirical law over given values of X (no entry times attached).
inline EmpiricalLaw law_from_values(std::vector<double> values, std::size_t censored = 0) {
  EmpiricalLaw law;
  law.trials = values.size() + censored;
  law.censored = censored;
  std::sort(values.begin(), values.end());
  law.x = std::move(values);
  return law;
}

/// Long orbit of the symbol chain started from pi, for frequency checks.
inline std::vector<Symbol> sample_orbit(const MarkovMeasure& m, std::size_t length, std::uint64_t seed) {
  const detail::SymbolSampler sampler(m);
  Xoshiro256 g(derive_seed(seed, 0));
  std::vector<Symbol> out;
  out.reserve(length);
  if (length == 0) return out;
  out.push_back(sampler.initial(g));
  while (out.size() < length) out.push_back(sampler.step(out.back(), g));
  return out;
}

struct EmpiricalKs {
  double ks = 0.0;
  double at = 0.0;              // abscissa of the sup
  double censored_mass = 0.0;   // censored / trials, counted as mass above every point
};

/// sup_x |F_emp(x) - (1 - e^{-x})| with F_emp normalised by all trials;
/// censored trials sit above every sample.
inline EmpiricalKs ks_statistic(const EmpiricalLaw& law) {
  if (law.x.empty()) fail(ErrorCode::EmptySample, "no uncensored samples");
  const auto total = static_cast<double>(law.trials);
  EmpiricalKs r;
  r.censored_mass = static_cast<double>(law.censored) / total;
  const std::size_t k = law.x.size();
  std::size_t i = 0;
  while (i < k) {
    std::size_t j = i;
    while (j < k && law.x[j] == law.x[i]) ++j;
    const double f = -std::expm1(-law.x[i]);
    const double below = static_cast<double>(i) / total;
    const double upto = static_cast<double>(j) / total;
    const double d = std::max(std::abs(f - below), std::abs(upto - f));
    if (d > r.ks) {
      r.ks = d;
      r.at = law.x[i];
    }
    i = j;
  }
  if (r.censored_mass > r.ks) {
    r.ks = r.censored_mass;
    r.at = std::numeric_limits<double>::infinity();
  }
  return r;
}

/// max over q = 0..Q of |#{tau <= q}/trials - (1 - s(q))|. Both laws are
/// step functions on the grid q*eps, so this is the sup over [0, Q eps].
inline EmpiricalKs ks_statistic(const EmpiricalLaw& law, const SurvivalCurve& curve) {
  if (law.taus.empty()) fail(ErrorCode::EmptySample, "no uncensored samples");
  const auto total = static_cast<double>(law.trials);
  EmpiricalKs r;
  r.censored_mass = static_cast<double>(law.censored) / total;
  std::size_t idx = 0;
  for (int q = 0; q <= curve.horizon(); ++q) {
    while (idx < law.taus.size() && law.taus[idx] <= static_cast<std::uint64_t>(q)) ++idx;
    const double d = std::abs(static_cast<double>(idx) / total - (1.0 - curve.values[static_cast<std::size_t>(q)]));
    if (d > r.ks) {
      r.ks = d;
      r.at = curve.t(q);
    }
  }
  return r;
}

/// sqrt(ln(2 / (1 - confidence)) / (2 trials)).
inline double dkw_band(std::size_t trials, double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0)) fail(ErrorCode::InvalidShape, "confidence must lie in (0, 1)");
  if (trials == 0) fail(ErrorCode::EmptySample, "zero trials");
  return std::sqrt(std::log(2.0 / (1.0 - confidence)) / (2.0 * static_cast<double>(trials)));
}

}  // namespace hitlaw
