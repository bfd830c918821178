#pragma once

// Exact entry-time law: survival curves mu{tau > q}, conditional survival
// mu{x in U : tau(x) > q}, and the grid Kolmogorov distance to Exp(1).

#include <cmath>
#include <cstdint>
#include <vector>

#include "hitlaw/error.hpp"
#include "hitlaw/window_chain.hpp"

namespace hitlaw {

inline constexpr long kHorizonCap = 5'000'000;
inline constexpr double kTailThreshold = 1e-4;

struct SurvivalCurve {
  int n = 0;
  double eps = 0.0;
  std::vector<double> values;  // values[q] = mu{tau > q}, q = 0..Q

  int horizon() const noexcept { return static_cast<int>(values.size()) - 1; }
  double t(int q) const noexcept { return q * eps; }
};

/// s(q) = mu(intersection over k = 1..q of sigma^{-k} U^c).
inline SurvivalCurve survival(const WindowChain& chain, long horizon, int n = 0) {
  if (horizon < 0) fail(ErrorCode::InvalidShape, "horizon must be >= 0");
  if (horizon > kHorizonCap) fail(ErrorCode::HorizonExceeded, "horizon above the 5e6 step cap");
  SurvivalCurve c;
  c.n = n;
  c.eps = chain.epsilon();
  c.values.reserve(static_cast<std::size_t>(horizon) + 1);
  const MaskOp avoid{&chain.target_mask(), true};
  sweep(chain, static_cast<int>(horizon), [&](int t) { return t == 0 ? MaskOp{} : avoid; },
        [&](int, double v) { c.values.push_back(v); });
  c.values[0] = 1.0;
  return c;
}

/// c(q) = mu{x in U : tau(x) > q} for q = 0..horizon. The time-0 window
/// carries the membership x in U, later windows the avoidance.
inline std::vector<double> conditional_survival(const WindowChain& chain, long horizon) {
  if (horizon < 0) fail(ErrorCode::InvalidShape, "horizon must be >= 0");
  if (horizon > kHorizonCap) fail(ErrorCode::HorizonExceeded, "horizon above the 5e6 step cap");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(horizon) + 1);
  const MaskOp hit{&chain.target_mask(), false};
  const MaskOp avoid{&chain.target_mask(), true};
  sweep(chain, static_cast<int>(horizon), [&](int t) { return t == 0 ? hit : avoid; },
        [&](int, double v) { out.push_back(v); });
  return out;
}

/// N = floor(t / eps).
inline long grid_index(double t, double eps) {
  if (!(eps > 0.0)) fail(ErrorCode::InvalidShape, "target has zero measure");
  if (t < 0.0) fail(ErrorCode::InvalidShape, "t must be >= 0");
  return static_cast<long>(std::floor(t / eps));
}

/// mu{tau > floor(t / eps)}.
inline double rescaled_law(const SurvivalCurve& curve, double t) {
  const long q = grid_index(t, curve.eps);
  if (q > curve.horizon()) fail(ErrorCode::HorizonExceeded, "floor(t/eps) beyond the computed horizon");
  return curve.values[static_cast<std::size_t>(q)];
}

/// Smallest Q with exp(-Q eps) < 1e-4; HorizonExceeded when above the cap.
inline long ks_horizon(double eps) {
  if (!(eps > 0.0)) fail(ErrorCode::InvalidShape, "target has zero measure");
  const long q = static_cast<long>(std::floor(-std::log(kTailThreshold) / eps)) + 1;
  if (q > kHorizonCap)
    fail(ErrorCode::HorizonExceeded, "tail threshold needs " + std::to_string(q) + " steps (cap 5e6)");
  return q;
}

struct KsResult {
  double sup_grid = 0.0;    // max_q |s(q) - exp(-q eps)|
  double tail_bound = 0.0;  // exp(-t_Q), added conservatively
  double ks = 0.0;          // sup_grid + tail_bound
  int argmax = 0;
};

inline KsResult ks_vs_exponential(const SurvivalCurve& curve) {
  const int q_max = curve.horizon();
  const double tail = std::exp(-curve.t(q_max));
  if (!(tail < kTailThreshold))
    fail(ErrorCode::HorizonExceeded, "curve horizon stops before exp(-t) < 1e-4");
  KsResult r;
  for (int q = 0; q <= q_max; ++q) {
    const double d = std::abs(curve.values[static_cast<std::size_t>(q)] - std::exp(-curve.t(q)));
    if (d > r.sup_grid) {
      r.sup_grid = d;
      r.argmax = q;
    }
  }
  r.tail_bound = tail;
  r.ks = r.sup_grid + tail;
  return r;
}

/// Survival curve up to the KS horizon of its own epsilon.
inline SurvivalCurve survival_to_ks_horizon(const WindowChain& chain, int n = 0) {
  return survival(chain, ks_horizon(chain.epsilon()), n);
}

}  // namespace hitlaw
