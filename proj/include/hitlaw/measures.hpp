#pragma once

// Stationary Markov measures on a subshift of finite type: Bernoulli, Parry
// and Gibbs (two-coordinate potentials) realizations, cylinder masses, exact
// psi-mixing coefficients and the Gibbs pressure bound.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "hitlaw/error.hpp"
#include "hitlaw/numeric.hpp"
#include "hitlaw/sft.hpp"
#include "hitlaw/window_set.hpp"

namespace hitlaw {

enum class Provenance { Bernoulli, Parry, Gibbs, Custom };

inline std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::Bernoulli: return "bernoulli";
    case Provenance::Parry: return "parry";
    case Provenance::Gibbs: return "gibbs";
    case Provenance::Custom: return "custom";
  }
  return "custom";
}

inline constexpr double kMeasureTolerance = 1e-12;

/// Stationary one-step Markov measure: stationary vector pi and row-stochastic
/// kernel P whose support is exactly the transition matrix.
class MarkovMeasure {
 public:
  /// Validates stationarity, stochasticity and support (all to 1e-12).
  static MarkovMeasure from_parts(const TransitionMatrix& base, std::vector<double> stationary, Matrix kernel,
                                  Provenance provenance) {
    const auto a = static_cast<std::size_t>(base.size());
    if (stationary.size() != a || kernel.rows() != a || kernel.cols() != a)
      fail(ErrorCode::InvalidMeasure, "dimension mismatch with the transition matrix");
    for (std::size_t i = 0; i < a; ++i) {
      if (!(stationary[i] > 0.0)) fail(ErrorCode::InvalidMeasure, "stationary vector must be positive");
      double row = 0.0;
      for (std::size_t j = 0; j < a; ++j) {
        const double p = kernel(i, j);
        if (!std::isfinite(p) || p < 0.0) fail(ErrorCode::InvalidMeasure, "kernel entries must be finite and >= 0");
        if ((p > 0.0) != base.allowed(static_cast<int>(i), static_cast<int>(j)))
          fail(ErrorCode::InvalidMeasure, "kernel support differs from the transition matrix");
        row += p;
      }
      if (std::abs(row - 1.0) > kMeasureTolerance)
        fail(ErrorCode::InvalidMeasure, "kernel row " + std::to_string(i) + " does not sum to 1");
    }
    double total = 0.0;
    for (double x : stationary) total += x;
    if (std::abs(total - 1.0) > kMeasureTolerance)
      fail(ErrorCode::InvalidMeasure, "stationary vector does not sum to 1");
    for (std::size_t j = 0; j < a; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < a; ++i) s += stationary[i] * kernel(i, j);
      if (std::abs(s - stationary[j]) > kMeasureTolerance)
        fail(ErrorCode::InvalidMeasure, "stationary vector is not invariant under the kernel");
    }
    return MarkovMeasure(base, std::move(stationary), std::move(kernel), provenance);
  }

  const TransitionMatrix& base() const noexcept { return base_; }
  int alphabet() const noexcept { return base_.size(); }
  const std::vector<double>& stationary() const noexcept { return stationary_; }
  const Matrix& kernel() const noexcept { return kernel_; }
  Provenance provenance() const noexcept { return provenance_; }

  /// True when every kernel row equals the stationary vector bit for bit,
  /// i.e. the chain is an independent sequence.
  bool is_independent() const noexcept {
    for (std::size_t i = 0; i < kernel_.rows(); ++i)
      for (std::size_t j = 0; j < kernel_.cols(); ++j)
        if (kernel_(i, j) != stationary_[j]) return false;
    return true;
  }

 private:
  MarkovMeasure(TransitionMatrix base, std::vector<double> stationary, Matrix kernel, Provenance provenance)
      : base_(std::move(base)), stationary_(std::move(stationary)), kernel_(std::move(kernel)),
        provenance_(provenance) {}

  TransitionMatrix base_;
  std::vector<double> stationary_;
  Matrix kernel_;
  Provenance provenance_;
};

/// Product measure on the full shift.
inline MarkovMeasure bernoulli(const std::vector<double>& p) {
  if (p.size() < 2 || p.size() > static_cast<std::size_t>(kMaxAlphabet))
    fail(ErrorCode::BadProbabilityVector, "need between 2 and 64 probabilities");
  double total = 0.0;
  for (double x : p) {
    if (!(x > 0.0) || !std::isfinite(x)) fail(ErrorCode::BadProbabilityVector, "probabilities must be positive");
    total += x;
  }
  if (std::abs(total - 1.0) > kMeasureTolerance) fail(ErrorCode::BadProbabilityVector, "probabilities must sum to 1");
  const auto a = p.size();
  Matrix kernel(a, a);
  for (std::size_t i = 0; i < a; ++i)
    for (std::size_t j = 0; j < a; ++j) kernel(i, j) = p[j];
  return MarkovMeasure::from_parts(TransitionMatrix::full_shift(static_cast<int>(a)), p, std::move(kernel),
                                   Provenance::Bernoulli);
}

namespace detail {

/// Markov chain realizing the Perron data of a weighted matrix L supported on A:
/// P(i,j) = L(i,j) v_j / (lambda v_i), pi_i = u_i v_i.
inline MarkovMeasure chain_from_perron(const TransitionMatrix& a, const Matrix& weights, const PerronData& pd,
                                       Provenance provenance) {
  const auto n = static_cast<std::size_t>(a.size());
  Matrix kernel(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      kernel(i, j) = weights(i, j) * pd.right[j] / (pd.eigenvalue * pd.right[i]);
      row += kernel(i, j);
    }
    // Remove the power-iteration residual from the row sums.
    for (std::size_t j = 0; j < n; ++j) kernel(i, j) /= row;
  }
  std::vector<double> pi(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += pi[i] = pd.left[i] * pd.right[i];
  for (double& x : pi) x /= total;
  return MarkovMeasure::from_parts(a, std::move(pi), std::move(kernel), provenance);
}

}  // namespace detail

/// Measure of maximal entropy.
inline MarkovMeasure parry(const TransitionMatrix& a) {
  const Matrix weights = a.as_real();
  return detail::chain_from_perron(a, weights, perron(weights, 1e-14), Provenance::Parry);
}

/// Markov measure for an arbitrary kernel compatible with A; the stationary
/// vector is computed by power iteration on the transposed kernel.
inline MarkovMeasure markov_from_kernel(const TransitionMatrix& a, const Matrix& kernel) {
  const std::size_t n = kernel.rows();
  Matrix normalised = kernel;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += kernel(i, j);
    for (std::size_t j = 0; j < n; ++j) normalised(i, j) = kernel(i, j) / row;
  }
  const PerronData pd = perron(normalised.transposed(), 1e-15);
  return MarkovMeasure::from_parts(a, pd.right, std::move(normalised), Provenance::Custom);
}

/// Potential phi(x) = values(x_0, x_1), defined on the support of A.
class LocallyConstantPotential {
 public:
  LocallyConstantPotential(const TransitionMatrix& base, Matrix values) : base_(base), values_(std::move(values)) {
    const auto a = static_cast<std::size_t>(base.size());
    if (values_.rows() != a || values_.cols() != a)
      fail(ErrorCode::InvalidShape, "potential dimension differs from the transition matrix");
    for (std::size_t i = 0; i < a; ++i)
      for (std::size_t j = 0; j < a; ++j) {
        const double v = values_(i, j);
        if (!base.allowed(static_cast<int>(i), static_cast<int>(j))) {
          if (v != 0.0)
            fail(ErrorCode::PotentialOnForbiddenEdge,
                 "value on forbidden edge (" + std::to_string(i) + "," + std::to_string(j) + ")");
        } else if (!std::isfinite(v)) {
          fail(ErrorCode::NonFinitePotential, "non-finite value on edge (" + std::to_string(i) + "," +
                                                  std::to_string(j) + ")");
        }
      }
  }

  static LocallyConstantPotential zero(const TransitionMatrix& base) {
    return {base, Matrix(static_cast<std::size_t>(base.size()), static_cast<std::size_t>(base.size()))};
  }

  const TransitionMatrix& base() const noexcept { return base_; }
  const Matrix& values() const noexcept { return values_; }
  double operator()(int i, int j) const { return values_(static_cast<std::size_t>(i), static_cast<std::size_t>(j)); }

  /// sup |phi| over the support.
  double sup_norm() const {
    double s = 0.0;
    for (int i = 0; i < base_.size(); ++i)
      for (int j = 0; j < base_.size(); ++j)
        if (base_.allowed(i, j)) s = std::max(s, std::abs((*this)(i, j)));
    return s;
  }

  /// Word Birkhoff sum with |w| - 1 terms: sum_k phi(w_k, w_{k+1}).
  double birkhoff_sum(const Word& w) const {
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < w.size(); ++k) s += (*this)(w[k], w[k + 1]);
    return s;
  }

 private:
  TransitionMatrix base_;
  Matrix values_;
};

struct GibbsData {
  MarkovMeasure measure;
  double pressure = 0.0;
  LocallyConstantPotential potential;
  /// Empirical bracketing of mu([w]) / exp(-P m + S_m phi(w)) over depths 1..depth_checked.
  double c1 = 0.0;
  double c2 = 0.0;
  int depth_checked = 0;
};

inline double cylinder_measure(const MarkovMeasure& m, const Word& w) {
  if (w.empty()) return 1.0;
  for (Symbol s : w)
    if (s >= m.alphabet()) return 0.0;
  double p = m.stationary()[w[0]];
  for (std::size_t k = 0; k + 1 < w.size(); ++k) p *= m.kernel()(w[k], w[k + 1]);
  return p;
}

inline double set_measure(const MarkovMeasure& m, const WindowSet& u) {
  if (u.base().size() != m.alphabet()) fail(ErrorCode::InvalidShape, "window set and measure alphabets differ");
  CompensatedSum acc;
  for (auto code : u.codes()) acc.add(cylinder_measure(m, u.codec().decode(code)));
  return acc.value();
}

inline constexpr int kGibbsCheckDepth = 8;

/// Gibbs state of a two-coordinate potential, realized as the Markov chain of
/// the weighted matrix L(i,j) = A(i,j) exp(phi(i,j)); pressure is log of its
/// Perron eigenvalue.
inline GibbsData gibbs(const TransitionMatrix& a, const LocallyConstantPotential& phi) {
  if (!(phi.base() == a)) fail(ErrorCode::InvalidShape, "potential defined over a different transition matrix");
  const auto n = static_cast<std::size_t>(a.size());
  Matrix weights(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (a.allowed(static_cast<int>(i), static_cast<int>(j))) weights(i, j) = std::exp(phi(static_cast<int>(i), static_cast<int>(j)));
  const PerronData pd = perron(weights, 1e-14);
  GibbsData g{detail::chain_from_perron(a, weights, pd, Provenance::Gibbs), std::log(pd.eigenvalue), phi, 0.0, 0.0, 0};

  // Bracketing constants by exhaustive enumeration, keeping the work bounded
  // for large alphabets.
  int depth = kGibbsCheckDepth;
  while (depth > 1 && word_count(a, depth) > 2'000'000) --depth;
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (int m = 1; m <= depth; ++m) {
    for (const Word& w : enumerate_words(a, m, 2'000'000)) {
      const double ratio = cylinder_measure(g.measure, w) / std::exp(-g.pressure * m + phi.birkhoff_sum(w));
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
  }
  g.c1 = lo;
  g.c2 = hi;
  g.depth_checked = depth;
  return g;
}

/// Shannon entropy rate -sum_i pi_i sum_j P(i,j) log P(i,j).
inline double entropy_rate(const MarkovMeasure& m) {
  double h = 0.0;
  const auto n = static_cast<std::size_t>(m.alphabet());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double p = m.kernel()(i, j);
      if (p > 0.0) h -= m.stationary()[i] * p * std::log(p);
    }
  return h;
}

// ---------------------------------------------------------------------------
// psi-mixing coefficients

inline constexpr std::uint64_t kPsiPairCap = 10'000'000;

/// Closed form for Markov measures: max_{i,j} |P^{gap+1}(i,j) / pi_j - 1|.
/// Must agree with psi_enumeration; psi_coefficient enforces that.
inline double psi_closed_form_from_power(const MarkovMeasure& m, const Matrix& kernel_power) {
  if (m.is_independent()) return 0.0;
  double psi = 0.0;
  const auto n = static_cast<std::size_t>(m.alphabet());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      psi = std::max(psi, std::abs(kernel_power(i, j) / m.stationary()[j] - 1.0));
  return psi;
}

inline Matrix kernel_power(const MarkovMeasure& m, int k) {
  Matrix p = Matrix::identity(static_cast<std::size_t>(m.alphabet()));
  for (int i = 0; i < k; ++i) p = p * m.kernel();
  return p;
}

inline double psi_closed_form(const MarkovMeasure& m, int gap) {
  return psi_closed_form_from_power(m, kernel_power(m, gap + 1));
}

namespace detail {

inline std::vector<Word> words_up_to(const TransitionMatrix& a, int max_len) {
  std::vector<Word> out;
  for (int len = 1; len <= max_len; ++len) {
    auto ws = enumerate_words(a, len, kPsiPairCap);
    out.insert(out.end(), ws.begin(), ws.end());
  }
  return out;
}

inline std::uint64_t words_up_to_count(const TransitionMatrix& a, int max_len) {
  std::uint64_t total = 0;
  for (int len = 1; len <= max_len; ++len) {
    const auto c = word_count(a, len);
    if (c > kPsiPairCap) return kPsiPairCap + 1;
    total += c;
  }
  return total;
}

/// sum over bridge words b of length gap of the kernel products along
/// i -> b_1 -> ... -> b_gap -> j, for every j.
inline std::vector<double> gap_sums(const MarkovMeasure& m, int from, int gap) {
  const auto n = static_cast<std::size_t>(m.alphabet());
  std::vector<double> h(n, 0.0);
  h[static_cast<std::size_t>(from)] = 1.0;
  for (int step = 0; step <= gap; ++step) {
    std::vector<double> next(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      if (h[i] != 0.0)
        for (std::size_t j = 0; j < n; ++j) next[j] += h[i] * m.kernel()(i, j);
    h = std::move(next);
  }
  return h;
}

}  // namespace detail

/// Sup of |mu(U cap sigma^{-gap-|U|} V) / (mu(U) mu(V)) - 1| over cylinders U
/// and V of length <= cutoff, by enumerating every cylinder pair. The joint
/// mass of a pair is the sum over all admissible bridge words of the cylinder
/// mass of the concatenation.
inline double psi_enumeration(const MarkovMeasure& m, int gap, int cutoff) {
  if (gap < 0 || cutoff < 1) fail(ErrorCode::InvalidShape, "psi needs gap >= 0 and cutoff >= 1");
  const std::uint64_t count = detail::words_up_to_count(m.base(), cutoff);
  if (count > kPsiPairCap || count * count > kPsiPairCap)
    fail(ErrorCode::CutoffTooLarge, "enumeration would exceed 1e7 cylinder pairs");
  const auto words = detail::words_up_to(m.base(), cutoff);
  std::vector<double> mass(words.size());
  for (std::size_t k = 0; k < words.size(); ++k) mass[k] = cylinder_measure(m, words[k]);
  double psi = 0.0;
  std::vector<std::vector<double>> bridge(static_cast<std::size_t>(m.alphabet()));
  for (int s = 0; s < m.alphabet(); ++s) bridge[static_cast<std::size_t>(s)] = detail::gap_sums(m, s, gap);
  for (std::size_t iu = 0; iu < words.size(); ++iu) {
    const Word& u = words[iu];
    const auto& h = bridge[u.back()];
    for (std::size_t iv = 0; iv < words.size(); ++iv) {
      const Word& v = words[iv];
      // mu(u b v) summed over b = mu(u) * [bridge into v_0] * prod_v P
      double tail = 1.0;
      for (std::size_t k = 0; k + 1 < v.size(); ++k) tail *= m.kernel()(v[k], v[k + 1]);
      const double joint = mass[iu] * h[v[0]] * tail;
      psi = std::max(psi, std::abs(joint / (mass[iu] * mass[iv]) - 1.0));
    }
  }
  return psi;
}

/// Spot check over unions of up to max_union cylinders of a common length
/// <= max_len on each side. Returns the sup of the ratio deviation.
inline double psi_enumeration_unions(const MarkovMeasure& m, int gap, int max_len, int max_union) {
  struct Event {
    std::vector<Word> words;
    double mass = 0.0;
  };
  std::vector<Event> events;
  for (int len = 1; len <= max_len; ++len) {
    const auto ws = enumerate_words(m.base(), len, 64);
    const std::size_t k = ws.size();
    if (k > 16) fail(ErrorCode::CutoffTooLarge, "too many words for the union spot check");
    for (std::uint32_t mask = 1; mask < (1U << k); ++mask) {
      if (std::popcount(mask) > max_union) continue;
      Event e;
      for (std::size_t b = 0; b < k; ++b)
        if (mask >> b & 1U) {
          e.words.push_back(ws[b]);
          e.mass += cylinder_measure(m, ws[b]);
        }
      events.push_back(std::move(e));
    }
  }
  std::vector<std::vector<double>> bridge(static_cast<std::size_t>(m.alphabet()));
  for (int s = 0; s < m.alphabet(); ++s) bridge[static_cast<std::size_t>(s)] = detail::gap_sums(m, s, gap);
  double psi = 0.0;
  for (const Event& eu : events)
    for (const Event& ev : events) {
      double joint = 0.0;
      for (const Word& u : eu.words)
        for (const Word& v : ev.words) {
          double tail = 1.0;
          for (std::size_t k = 0; k + 1 < v.size(); ++k) tail *= m.kernel()(v[k], v[k + 1]);
          joint += cylinder_measure(m, u) * bridge[u.back()][v[0]] * tail;
        }
      psi = std::max(psi, std::abs(joint / (eu.mass * ev.mass) - 1.0));
    }
  return psi;
}

/// Largest cutoff <= requested (and <= 4) whose enumeration stays under the
/// pair cap.
inline int psi_validation_depth(const TransitionMatrix& a, int cutoff) {
  int depth = std::min(cutoff, 4);
  while (depth > 1) {
    const auto c = detail::words_up_to_count(a, depth);
    if (c <= kPsiPairCap && c * c <= kPsiPairCap) break;
    --depth;
  }
  return depth;
}

inline constexpr double kPsiAgreement = 1e-12;

struct PsiValue {
  double value = 0.0;
  double closed_form = 0.0;
  double enumeration = 0.0;
  int validation_depth = 0;
  bool closed_form_trusted = false;
};

/// psi_gap restricted to cylinder events of length <= cutoff. The Markov
/// closed form is used only after it matches the enumeration oracle at the
/// validation depth; otherwise the enumeration value is returned.
inline PsiValue psi_evaluate(const MarkovMeasure& m, int gap, int cutoff, const Matrix* power = nullptr) {
  if (gap < 0 || cutoff < 1) fail(ErrorCode::InvalidShape, "psi needs gap >= 0 and cutoff >= 1");
  PsiValue out;
  out.closed_form = power ? psi_closed_form_from_power(m, *power) : psi_closed_form(m, gap);
  out.validation_depth = psi_validation_depth(m.base(), cutoff);
  out.enumeration = m.is_independent() ? 0.0 : psi_enumeration(m, gap, out.validation_depth);
  out.closed_form_trusted = std::abs(out.closed_form - out.enumeration) <= kPsiAgreement;
  out.value = out.closed_form_trusted ? out.closed_form : out.enumeration;
  return out;
}

inline double psi_coefficient(const MarkovMeasure& m, int gap, int cutoff) {
  return psi_evaluate(m, gap, cutoff).value;
}

enum class PsiMethod { ClosedFormValidated, Enumeration, Injected };

inline std::string_view to_string(PsiMethod method) {
  switch (method) {
    case PsiMethod::ClosedFormValidated: return "closed-form-validated";
    case PsiMethod::Enumeration: return "exact-enumeration";
    case PsiMethod::Injected: return "injected";
  }
  return "injected";
}

struct MixingProfile {
  std::vector<int> deltas;
  std::vector<double> psi;
  PsiMethod method = PsiMethod::ClosedFormValidated;
  int cutoff = 0;
  int validation_depth = 0;
  double max_discrepancy = 0.0;
  bool monotone = true;
  bool bounded = true;

  int max_delta() const noexcept { return deltas.empty() ? -1 : deltas.back(); }

  double at(int delta) const {
    if (delta < 0 || delta > max_delta())
      fail(ErrorCode::InvalidShape, "psi requested at gap " + std::to_string(delta) + " beyond the profile");
    return psi[static_cast<std::size_t>(delta)];
  }

  /// Copy with every coefficient multiplied by factor (fault injection).
  MixingProfile scaled(double factor) const {
    MixingProfile out = *this;
    for (double& x : out.psi) x *= factor;
    out.method = PsiMethod::Injected;
    return out;
  }
};

inline MixingProfile psi_profile(const MarkovMeasure& m, int max_delta, int cutoff) {
  if (max_delta < 0) fail(ErrorCode::InvalidShape, "max gap must be >= 0");
  MixingProfile prof;
  prof.cutoff = cutoff;
  Matrix power = m.kernel();
  bool all_trusted = true;
  for (int gap = 0; gap <= max_delta; ++gap) {
    const PsiValue v = psi_evaluate(m, gap, cutoff, &power);
    prof.deltas.push_back(gap);
    prof.psi.push_back(v.value);
    prof.validation_depth = v.validation_depth;
    prof.max_discrepancy = std::max(prof.max_discrepancy, std::abs(v.closed_form - v.enumeration));
    all_trusted = all_trusted && v.closed_form_trusted;
    power = power * m.kernel();
  }
  prof.method = all_trusted ? PsiMethod::ClosedFormValidated : PsiMethod::Enumeration;
  for (std::size_t k = 1; k < prof.psi.size(); ++k)
    if (prof.psi[k] > prof.psi[k - 1] + 1e-15) prof.monotone = false;
  for (double x : prof.psi)
    if (!std::isfinite(x)) prof.bounded = false;
  if (!prof.bounded) fail(ErrorCode::Internal, "psi profile is not bounded");
  return prof;
}

/// Modulus of the subdominant eigenvalue of the kernel, by power iteration on
/// the deflated matrix P - 1 pi^T. Two-step growth is used so real negative
/// subdominant eigenvalues converge.
inline double subdominant_modulus(const MarkovMeasure& m) {
  const auto n = static_cast<std::size_t>(m.alphabet());
  Matrix d = m.kernel();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) d(i, j) -= m.stationary()[j];
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = (i % 2 ? -1.0 : 1.0) * (1.0 + 0.37 * static_cast<double>(i));
  auto norm = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double e : v) s = std::max(s, std::abs(e));
    return s;
  };
  double estimate = 0.0;
  for (int it = 0; it < 2000; ++it) {
    const double before = norm(x);
    if (before == 0.0) return 0.0;
    for (double& e : x) e /= before;
    std::vector<double> y = d.apply(d.apply(x));
    const double growth = std::sqrt(norm(y));
    x = std::move(y);
    if (it > 10 && std::abs(growth - estimate) < 1e-15) return growth;
    estimate = growth;
  }
  return estimate;
}

// ---------------------------------------------------------------------------
// Gibbs pressure bound

struct GibbsBound {
  double measure = 0.0;
  /// max over admissible n-words of the (n-1)-term Birkhoff sum
  double sup_birkhoff = 0.0;
  /// m_n exp(-P n + sup_birkhoff)
  double bound = 0.0;
  bool holds = false;
  /// c2 * bound, the form that carries the Gibbs constant
  double bound_with_constant = 0.0;
  bool holds_with_constant = false;
};

/// Max-plus (Viterbi) recursion for max over admissible words of length n of
/// sum_{k<n-1} phi(w_k, w_{k+1}).
inline double max_birkhoff_sum(const LocallyConstantPotential& phi, int length) {
  const int a = phi.base().size();
  const double neg_inf = -std::numeric_limits<double>::infinity();
  std::vector<double> best(static_cast<std::size_t>(a), 0.0);
  for (int step = 1; step < length; ++step) {
    std::vector<double> next(static_cast<std::size_t>(a), neg_inf);
    for (int i = 0; i < a; ++i)
      for (int j = 0; j < a; ++j)
        if (phi.base().allowed(i, j)) next[j] = std::max(next[j], best[i] + phi(i, j));
    best = std::move(next);
  }
  return *std::max_element(best.begin(), best.end());
}

inline GibbsBound gibbs_bound(const GibbsData& g, const WindowSet& u) {
  GibbsBound out;
  const int n = u.length();
  out.measure = set_measure(g.measure, u);
  out.sup_birkhoff = max_birkhoff_sum(g.potential, n);
  out.bound = static_cast<double>(u.cardinality()) * std::exp(-g.pressure * n + out.sup_birkhoff);
  out.holds = out.measure <= out.bound + 1e-12;
  out.bound_with_constant = g.c2 * out.bound;
  out.holds_with_constant = out.measure <= out.bound_with_constant + 1e-12;
  return out;
}

}  // namespace hitlaw
