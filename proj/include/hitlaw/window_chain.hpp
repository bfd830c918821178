#pragma once

// Sliding-window Markov chain on admissible L-words. The window at time k
// covers absolute coordinates [k + b, k + b + L) where b is the target's
// offset, so sigma^k x in U is a property of the time-k state.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hitlaw/error.hpp"
#include "hitlaw/measures.hpp"
#include "hitlaw/numeric.hpp"
#include "hitlaw/sft.hpp"
#include "hitlaw/window_set.hpp"

namespace hitlaw {

inline constexpr std::size_t kMaxChainStates = 1'000'000;

using StateMask = std::vector<std::uint8_t>;

class WindowChain {
 public:
  /// step_kernel replaces the measure's kernel in the transition step only
  /// (initial law stays the measure's stationary word law). Used to inject
  /// faults.
  static WindowChain build(const MarkovMeasure& m, const WindowSet& target,
                           std::optional<Matrix> step_kernel = std::nullopt) {
    if (target.base().size() != m.alphabet() || !(target.base() == m.base()))
      fail(ErrorCode::InvalidShape, "target and measure live on different shifts");
    const int len = target.length();
    if (word_count(m.base(), len) > kMaxChainStates)
      fail(ErrorCode::StateSpaceTooLarge, "window chain would exceed 1e6 states (L = " + std::to_string(len) + ")");
    WindowChain c(m, target, step_kernel ? std::move(*step_kernel) : m.kernel());
    const WordCodec& codec = target.codec();
    for (const Word& w : enumerate_words(m.base(), len, kMaxChainStates)) c.states_.push_back(codec.encode(w));
    const std::size_t count = c.states_.size();
    c.rho_.resize(count);
    c.last_.resize(count);
    c.block_begin_.resize(count);
    c.block_end_.resize(count);
    c.target_mask_ = c.mask_of(target);
    const std::uint64_t suffix_span = codec.power(len - 1);
    const auto a = static_cast<std::uint64_t>(m.alphabet());
    for (std::size_t s = 0; s < count; ++s) {
      const std::uint64_t code = c.states_[s];
      c.rho_[s] = cylinder_measure(m, codec.decode(code));
      c.last_[s] = static_cast<Symbol>(code % a);
      // Successors share the prefix (code mod a^{L-1}) and form a contiguous
      // block of the sorted state list.
      const std::uint64_t lo = (code % suffix_span) * a;
      const auto begin = std::lower_bound(c.states_.begin(), c.states_.end(), lo);
      const auto end = std::lower_bound(begin, c.states_.end(), lo + a);
      c.block_begin_[s] = static_cast<std::uint32_t>(begin - c.states_.begin());
      c.block_end_[s] = static_cast<std::uint32_t>(end - c.states_.begin());
    }
    c.epsilon_ = set_measure(m, target);
    return c;
  }

  const MarkovMeasure& measure() const noexcept { return measure_; }
  const WindowSet& target() const noexcept { return target_; }
  const Matrix& step_kernel() const noexcept { return step_kernel_; }
  std::size_t size() const noexcept { return states_.size(); }
  int length() const noexcept { return target_.length(); }
  int offset() const noexcept { return target_.offset(); }
  double epsilon() const noexcept { return epsilon_; }
  const std::vector<std::uint64_t>& states() const noexcept { return states_; }
  const std::vector<double>& initial() const noexcept { return rho_; }
  const StateMask& target_mask() const noexcept { return target_mask_; }

  std::size_t absorbing_count() const {
    return static_cast<std::size_t>(std::count(target_mask_.begin(), target_mask_.end(), std::uint8_t{1}));
  }

  /// Membership mask of another window set read inside this chain's window.
  StateMask mask_of(const WindowSet& s) const {
    const int rel = s.offset() - offset();
    if (rel < 0 || rel + s.length() > length())
      fail(ErrorCode::InvalidShape, "set window is not inside the chain window");
    StateMask mask(states_.size(), 0);
    for (std::size_t i = 0; i < states_.size(); ++i)
      mask[i] = s.contains_code(target_.codec().slice(states_[i], rel, s.length())) ? 1 : 0;
    return mask;
  }

  /// out = in * step (one time step of the sliding window).
  void advance(std::span<const double> in, std::vector<double>& out) const {
    out.assign(states_.size(), 0.0);
    for (std::size_t s = 0; s < states_.size(); ++s) {
      const double mass = in[s];
      if (mass == 0.0) continue;
      const Symbol from = last_[s];
      for (std::uint32_t j = block_begin_[s]; j < block_end_[s]; ++j) {
        const double p = step_kernel_(from, last_[j]);
        if (p != 0.0) out[j] += mass * p;
      }
    }
  }

  /// Sum of outgoing step weights from each state (1 for an unperturbed chain).
  std::vector<double> outgoing_weights() const {
    std::vector<double> w(states_.size(), 0.0);
    for (std::size_t s = 0; s < states_.size(); ++s)
      for (std::uint32_t j = block_begin_[s]; j < block_end_[s]; ++j) w[s] += step_kernel_(last_[s], last_[j]);
    return w;
  }

 private:
  WindowChain(const MarkovMeasure& m, const WindowSet& target, Matrix step_kernel)
      : measure_(m), target_(target), step_kernel_(std::move(step_kernel)) {}

  MarkovMeasure measure_;
  WindowSet target_;
  Matrix step_kernel_;
  std::vector<std::uint64_t> states_;
  std::vector<double> rho_;
  std::vector<Symbol> last_;
  std::vector<std::uint32_t> block_begin_;
  std::vector<std::uint32_t> block_end_;
  StateMask target_mask_;
  double epsilon_ = 0.0;
};

inline double total_mass(std::span<const double> u) { return compensated_sum(u); }

/// Constraint applied to the window at one time step.
struct MaskOp {
  const StateMask* mask = nullptr;
  bool complement = false;
};

inline void apply_mask(std::vector<double>& u, const MaskOp& op) {
  if (!op.mask) return;
  const StateMask& m = *op.mask;
  for (std::size_t i = 0; i < u.size(); ++i)
    if ((m[i] != 0) == op.complement) u[i] = 0.0;
}

/// E(prod_{t=0}^{T} f_t o sigma^t) for every T = 0..horizon, where f_t is
/// given by mask_at(t). visit(T, value) receives each partial product.
template <class MaskAt, class Visit>
void sweep(const WindowChain& chain, int horizon, MaskAt&& mask_at, Visit&& visit) {
  std::vector<double> u = chain.initial();
  std::vector<double> next;
  apply_mask(u, mask_at(0));
  visit(0, total_mass(u));
  for (int t = 1; t <= horizon; ++t) {
    chain.advance(u, next);
    u.swap(next);
    apply_mask(u, mask_at(t));
    visit(t, total_mass(u));
  }
}

}  // namespace hitlaw
