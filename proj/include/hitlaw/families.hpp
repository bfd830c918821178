#pragma once

// Target families {U_n}: descriptors, instantiation, return times, nesting
// checks and envelope sets.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "hitlaw/error.hpp"
#include "hitlaw/measures.hpp"
#include "hitlaw/sft.hpp"
#include "hitlaw/window_set.hpp"

namespace hitlaw {

/// A two-sided symbol sequence x, read through slices x_[start, start+len).
class PointStream {
 public:
  enum class Kind { Periodic, Fibonacci, Explicit, Asymptotic };

  /// x_k = pattern[k mod p] for every integer k.
  static PointStream periodic(Word pattern) {
    if (pattern.empty()) fail(ErrorCode::DescriptorInvalid, "periodic pattern is empty");
    return PointStream(Kind::Periodic, std::move(pattern), 0);
  }

  /// Fibonacci word 0100101001001... (fixed point of 0->01, 1->0) on k >= 0,
  /// mirrored to negative coordinates by x_{-k} = x_{k-1}. Aperiodic and
  /// admissible for the golden mean shift.
  static PointStream fibonacci() { return PointStream(Kind::Fibonacci, {}, 0); }

  /// x_k = right[k mod p] for k >= 0 and x_k = left[k mod q] for k < 0, so
  /// left's last symbol sits at -1. asymptotic({1}, {0}) is 1^inf . 0^inf.
  static PointStream asymptotic(Word left, Word right) {
    if (left.empty() || right.empty()) fail(ErrorCode::DescriptorInvalid, "asymptotic point needs two patterns");
    PointStream p(Kind::Asymptotic, std::move(right), 0);
    p.left_ = std::move(left);
    return p;
  }

  /// x_k = symbols[origin + k]; slices outside the stored range are not
  /// instantiable.
  static PointStream explicit_symbols(Word symbols, int origin) {
    if (symbols.empty()) fail(ErrorCode::DescriptorInvalid, "explicit point has no symbols");
    return PointStream(Kind::Explicit, std::move(symbols), origin);
  }

  Kind kind() const noexcept { return kind_; }
  const Word& pattern() const noexcept { return pattern_; }
  const Word& left_pattern() const noexcept { return left_; }
  int origin() const noexcept { return origin_; }

  bool covers(long start, int len) const noexcept {
    if (kind_ != Kind::Explicit) return true;
    return start + origin_ >= 0 && start + origin_ + len <= static_cast<long>(pattern_.size());
  }

  Word slice(long start, int len) const {
    if (!covers(start, len)) fail(ErrorCode::NotInstantiable, "slice outside the explicit point");
    Word out(static_cast<std::size_t>(len));
    if (kind_ == Kind::Fibonacci) {
      const long need = std::max(std::abs(start), std::abs(start + len)) + 2;
      const Word f = fibonacci_prefix(static_cast<std::size_t>(need));
      for (int i = 0; i < len; ++i) {
        const long k = start + i;
        out[static_cast<std::size_t>(i)] = k >= 0 ? f[static_cast<std::size_t>(k)] : f[static_cast<std::size_t>(-k - 1)];
      }
      return out;
    }
    const long p = static_cast<long>(pattern_.size());
    if (kind_ == Kind::Asymptotic) {
      const long q = static_cast<long>(left_.size());
      for (int i = 0; i < len; ++i) {
        const long k = start + i;
        out[static_cast<std::size_t>(i)] = k >= 0 ? pattern_[static_cast<std::size_t>(k % p)]
                                                  : left_[static_cast<std::size_t>(((k % q) + q) % q)];
      }
      return out;
    }
    for (int i = 0; i < len; ++i) {
      const long k = start + i;
      out[static_cast<std::size_t>(i)] =
          kind_ == Kind::Periodic ? pattern_[static_cast<std::size_t>(((k % p) + p) % p)]
                                  : pattern_[static_cast<std::size_t>(k + origin_)];
    }
    return out;
  }

  static Word fibonacci_prefix(std::size_t len) {
    Word f{0};
    while (f.size() < len) {
      Word next;
      next.reserve(f.size() * 2);
      for (Symbol s : f) {
        next.push_back(0);
        if (s == 0) next.push_back(1);
      }
      f = std::move(next);
    }
    f.resize(len);
    return f;
  }

 private:
  PointStream(Kind kind, Word pattern, int origin) : kind_(kind), pattern_(std::move(pattern)), origin_(origin) {}

  Kind kind_;
  Word pattern_;
  int origin_;
  Word left_;
};

enum class Anchor { OneSided, Centered, Custom };

inline std::string_view to_string(Anchor a) {
  switch (a) {
    case Anchor::OneSided: return "one_sided";
    case Anchor::Centered: return "centered";
    case Anchor::Custom: return "custom";
  }
  return "custom";
}

struct FixedPointFamily {
  PointStream point;
};

/// Words head t_1 ... t_{n-1} with every t_i in tail (admissible ones only).
struct PrefixFamily {
  Symbol head = 0;
  std::vector<Symbol> tail;
};

/// Words entry x_1 ... x_{n-1} with x_i drawn from the block symbols.
struct SubmatrixFamily {
  std::vector<Symbol> block;
  Symbol entry = 0;
};

struct ExplicitEntry {
  int offset = 0;
  int length = 0;
  std::vector<Word> words;
};

struct ExplicitFamily {
  std::map<int, ExplicitEntry> entries;
};

using FamilyKind = std::variant<FixedPointFamily, PrefixFamily, SubmatrixFamily, ExplicitFamily>;

inline constexpr std::uint64_t kFamilyWordCap = 1'000'000;

class FamilyDescriptor {
 public:
  static FamilyDescriptor fixed_point(const TransitionMatrix& base, PointStream point, Anchor anchor) {
    if (anchor == Anchor::Custom) fail(ErrorCode::DescriptorInvalid, "fixed-point families are one-sided or centered");
    return FamilyDescriptor(base, FixedPointFamily{std::move(point)}, anchor);
  }

  static FamilyDescriptor prefix(const TransitionMatrix& base, Symbol head, std::vector<Symbol> tail) {
    if (head >= base.size()) fail(ErrorCode::DescriptorInvalid, "head symbol out of range");
    if (tail.empty()) fail(ErrorCode::DescriptorInvalid, "tail alphabet is empty");
    std::sort(tail.begin(), tail.end());
    tail.erase(std::unique(tail.begin(), tail.end()), tail.end());
    for (Symbol s : tail)
      if (s >= base.size()) fail(ErrorCode::DescriptorInvalid, "tail symbol out of range");
    return FamilyDescriptor(base, PrefixFamily{head, std::move(tail)}, Anchor::OneSided);
  }

  /// Requires a > 2, 2 <= |block| <= a-1, entry outside the block, and a
  /// primitive principal submatrix on the block.
  static FamilyDescriptor submatrix(const TransitionMatrix& base, std::vector<Symbol> block, Symbol entry) {
    const int a = base.size();
    if (a <= 2) fail(ErrorCode::DescriptorInvalid, "submatrix families need an alphabet larger than 2");
    std::sort(block.begin(), block.end());
    block.erase(std::unique(block.begin(), block.end()), block.end());
    if (block.size() < 2 || static_cast<int>(block.size()) > a - 1)
      fail(ErrorCode::DescriptorInvalid, "block size must lie in [2, a-1]");
    for (Symbol s : block)
      if (s >= a) fail(ErrorCode::DescriptorInvalid, "block symbol out of range");
    if (entry >= a) fail(ErrorCode::DescriptorInvalid, "entry symbol out of range");
    if (std::find(block.begin(), block.end(), entry) != block.end())
      fail(ErrorCode::DescriptorInvalid, "entry symbol must lie outside the block");
    try {
      (void)TransitionMatrix::validate(base.principal_submatrix(block));
    } catch (const Error& e) {
      fail(ErrorCode::SubmatrixNotPrimitive, e.what());
    }
    return FamilyDescriptor(base, SubmatrixFamily{std::move(block), entry}, Anchor::OneSided);
  }

  static FamilyDescriptor explicit_list(const TransitionMatrix& base, ExplicitFamily family) {
    if (family.entries.empty()) fail(ErrorCode::DescriptorInvalid, "explicit family has no entries");
    bool one_sided = true;
    bool centered = true;
    for (const auto& [n, e] : family.entries) {
      if (n < 1) fail(ErrorCode::DescriptorInvalid, "family index must be >= 1");
      if (e.length < 1) fail(ErrorCode::DescriptorInvalid, "entry length must be >= 1");
      one_sided = one_sided && e.offset == 0 && e.length == n;
      centered = centered && e.offset == -n && e.length == 2 * n;
    }
    const Anchor anchor = one_sided ? Anchor::OneSided : centered ? Anchor::Centered : Anchor::Custom;
    return FamilyDescriptor(base, std::move(family), anchor);
  }

  const TransitionMatrix& base() const noexcept { return base_; }
  const FamilyKind& kind() const noexcept { return kind_; }
  Anchor anchor() const noexcept { return anchor_; }

  std::string kind_name() const {
    switch (kind_.index()) {
      case 0: return "fixed_point_cylinders";
      case 1: return "prefix_family";
      case 2: return "submatrix_family";
      default: return "explicit";
    }
  }

  bool instantiable(int n) const {
    if (n < 1) return false;
    if (const auto* e = std::get_if<ExplicitFamily>(&kind_)) return e->entries.count(n) > 0;
    if (const auto* f = std::get_if<FixedPointFamily>(&kind_)) {
      const auto [offset, length] = window_of(n);
      return f->point.covers(offset, length);
    }
    return true;
  }

  /// Window [offset, offset + length) used for index n.
  std::pair<int, int> window_of(int n) const {
    if (const auto* e = std::get_if<ExplicitFamily>(&kind_)) {
      const auto it = e->entries.find(n);
      if (it == e->entries.end()) fail(ErrorCode::NotInstantiable, "no entry for n = " + std::to_string(n));
      return {it->second.offset, it->second.length};
    }
    return anchor_ == Anchor::Centered ? std::pair{-n, 2 * n} : std::pair{0, n};
  }

  WindowSet instantiate(int n) const {
    if (!instantiable(n)) fail(ErrorCode::NotInstantiable, "family is not defined at n = " + std::to_string(n));
    const auto [offset, length] = window_of(n);
    std::vector<Word> words;
    if (const auto* f = std::get_if<FixedPointFamily>(&kind_)) {
      words.push_back(f->point.slice(offset, length));
    } else if (const auto* p = std::get_if<PrefixFamily>(&kind_)) {
      words = constrained_words(p->head, p->tail, n);
    } else if (const auto* s = std::get_if<SubmatrixFamily>(&kind_)) {
      words = constrained_words(s->entry, s->block, n);
    } else {
      words = std::get<ExplicitFamily>(kind_).entries.at(n).words;
    }
    WindowSet u = WindowSet::from_words(base_, offset, length, words);
    if (u.empty()) fail(ErrorCode::EmptySet, "no admissible words at n = " + std::to_string(n));
    return u;
  }

 private:
  FamilyDescriptor(const TransitionMatrix& base, FamilyKind kind, Anchor anchor)
      : base_(base), kind_(std::move(kind)), anchor_(anchor) {}

  /// Admissible words first t_1 ... t_{n-1} with t_i in symbols, by DFS.
  std::vector<Word> constrained_words(Symbol first, const std::vector<Symbol>& symbols, int n) const {
    const long double count = std::pow(static_cast<long double>(symbols.size()), n - 1);
    if (count > static_cast<long double>(kFamilyWordCap))
      fail(ErrorCode::CapExceeded, "family would materialise more than 1e6 words");
    std::vector<Word> out;
    Word w{first};
    std::vector<std::size_t> next(static_cast<std::size_t>(n), 0);
    if (n == 1) return {w};
    int depth = 1;
    while (depth >= 1) {
      std::size_t& idx = next[static_cast<std::size_t>(depth)];
      bool advanced = false;
      while (idx < symbols.size()) {
        const Symbol s = symbols[idx++];
        if (!base_.allowed(w[static_cast<std::size_t>(depth - 1)], s)) continue;
        w.resize(static_cast<std::size_t>(depth));
        w.push_back(s);
        advanced = true;
        break;
      }
      if (!advanced) {
        idx = 0;
        --depth;
        continue;
      }
      if (depth + 1 == n) {
        out.push_back(w);
      } else {
        ++depth;
      }
    }
    return out;
  }

  TransitionMatrix base_;
  FamilyKind kind_;
  Anchor anchor_;
};

// ---------------------------------------------------------------------------
// Return times

enum class ReturnRegime { Overlap, Bridge };

inline std::string_view to_string(ReturnRegime r) { return r == ReturnRegime::Overlap ? "overlap" : "bridge"; }

struct ReturnTimeRecord {
  int eta = 0;
  Word first;   // member word at [0, L)
  Word second;  // member word at [eta, eta + L)
  Word bridge;  // symbols strictly between the two windows (bridge regime)
  ReturnRegime regime = ReturnRegime::Overlap;

  /// Admissible word on [0, eta + L) carrying both memberships.
  Word configuration() const {
    Word out = first;
    if (regime == ReturnRegime::Overlap) {
      const std::size_t overlap = first.size() - static_cast<std::size_t>(eta);
      out.insert(out.end(), second.begin() + static_cast<long>(overlap), second.end());
    } else {
      out.insert(out.end(), bridge.begin(), bridge.end());
      out.insert(out.end(), second.begin(), second.end());
    }
    return out;
  }
};

/// Least k >= 1 with U cap sigma^{-k} U nonempty, with a witness. Overlap
/// shifts k < L are scanned exhaustively by suffix/prefix matching; for
/// k >= L a layered search over the transition graph finds the shortest
/// bridge from a last symbol to a first symbol.
inline ReturnTimeRecord return_time(const WindowSet& u) {
  if (u.empty()) fail(ErrorCode::EmptySet, "return time of an empty set");
  const int len = u.length();
  const WordCodec& codec = u.codec();
  for (int k = 1; k < len; ++k) {
    const int overlap = len - k;
    std::unordered_map<std::uint64_t, std::uint64_t> prefixes;
    for (auto c : u.codes()) prefixes.emplace(codec.slice(c, 0, overlap), c);
    for (auto c : u.codes()) {
      const auto it = prefixes.find(codec.slice(c, k, overlap));
      if (it != prefixes.end())
        return ReturnTimeRecord{k, codec.decode(c), codec.decode(it->second), {}, ReturnRegime::Overlap};
    }
  }

  const TransitionMatrix& a = u.base();
  std::uint64_t sources = 0;
  std::uint64_t targets = 0;
  for (auto c : u.codes()) {
    sources |= std::uint64_t{1} << codec.symbol_at(c, len - 1);
    targets |= std::uint64_t{1} << codec.symbol_at(c, 0);
  }
  const int cap = 2 * len + (a.size() - 1) * (a.size() - 1) + 1;
  std::vector<std::uint64_t> layers{sources};
  for (int g = 1; len + g - 1 <= cap; ++g) {
    std::uint64_t next = 0;
    std::uint64_t bits = layers.back();
    while (bits) {
      next |= a.successors(std::countr_zero(bits));
      bits &= bits - 1;
    }
    layers.push_back(next);
    if (!(next & targets)) continue;
    // Walk back through the layers to recover one path.
    std::vector<int> path(static_cast<std::size_t>(g) + 1);
    path[static_cast<std::size_t>(g)] = std::countr_zero(next & targets);
    for (int step = g - 1; step >= 0; --step) {
      std::uint64_t cand = layers[static_cast<std::size_t>(step)];
      while (cand) {
        const int p = std::countr_zero(cand);
        if (a.allowed(p, path[static_cast<std::size_t>(step) + 1])) {
          path[static_cast<std::size_t>(step)] = p;
          break;
        }
        cand &= cand - 1;
      }
    }
    ReturnTimeRecord rec;
    rec.eta = len + g - 1;
    rec.regime = ReturnRegime::Bridge;
    for (auto c : u.codes())
      if (codec.symbol_at(c, len - 1) == path.front()) {
        rec.first = codec.decode(c);
        break;
      }
    for (auto c : u.codes())
      if (codec.symbol_at(c, 0) == path.back()) {
        rec.second = codec.decode(c);
        break;
      }
    for (int step = 1; step < g; ++step) rec.bridge.push_back(static_cast<Symbol>(path[static_cast<std::size_t>(step)]));
    return rec;
  }
  fail(ErrorCode::Internal, "return time exceeded the primitivity cap " + std::to_string(cap));
}

// ---------------------------------------------------------------------------
// Nesting

enum class NestingAlignment {
  /// U_{n+1} subset of U_n as sets of points (absolute coordinates).
  SetInclusion,
  /// sigma^{-(n+1)} U_{n+1} subset of sigma^{-n} U_n: both windows are moved
  /// to start at coordinate 0 before comparing.
  Literal,
};

struct NestingResult {
  bool holds = true;
  std::optional<Word> witness;  // word of U_{n+1} whose restriction is not in U_n
};

/// Compares W_{n+1} against W_n. Both alignments agree for one-sided
/// families; for centered families SetInclusion reads w[1, 2n+1) and Literal
/// reads w[0, 2n).
inline NestingResult check_nested(const WindowSet& larger_n, const WindowSet& smaller_n, NestingAlignment alignment) {
  int shift = 0;
  if (alignment == NestingAlignment::SetInclusion) {
    shift = smaller_n.offset() - larger_n.offset();
    if (shift < 0 || shift + smaller_n.length() > larger_n.length())
      fail(ErrorCode::DescriptorInvalid, "window of U_n is not inside the window of U_{n+1}");
  } else if (smaller_n.length() > larger_n.length()) {
    fail(ErrorCode::DescriptorInvalid, "U_{n+1} fixes fewer coordinates than U_n");
  }
  NestingResult r;
  for (auto c : larger_n.codes()) {
    if (!smaller_n.contains_code(larger_n.codec().slice(c, shift, smaller_n.length()))) {
      r.holds = false;
      r.witness = larger_n.codec().decode(c);
      return r;
    }
  }
  return r;
}

inline NestingResult check_nested(const FamilyDescriptor& f, int n, NestingAlignment alignment) {
  return check_nested(f.instantiate(n + 1), f.instantiate(n), alignment);
}

/// Containment U_outer superset of U_inner in absolute coordinates.
inline bool contains_set(const WindowSet& outer, const WindowSet& inner) {
  const int shift = outer.offset() - inner.offset();
  if (shift < 0 || shift + outer.length() > inner.length()) return false;
  for (auto c : inner.codes())
    if (!outer.contains_code(inner.codec().slice(c, shift, outer.length()))) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Envelopes

enum class EnvelopeSide { Prefix, Suffix };

inline std::string_view to_string(EnvelopeSide s) { return s == EnvelopeSide::Prefix ? "prefix" : "suffix"; }

struct Envelope {
  WindowSet set;
  EnvelopeSide side;
  int half = 0;  // floor(eta / 2)
  bool degenerate = false;
};

/// Projection of U onto its first (prefix) or last (suffix) floor(eta/2)+1
/// coordinates: the smallest superset of U measurable there.
inline Envelope envelope(const WindowSet& u, int eta, EnvelopeSide side) {
  if (eta < 1) fail(ErrorCode::InvalidShape, "eta must be >= 1");
  const int half = eta / 2;
  const int len = half + 1;
  if (len > u.length()) fail(ErrorCode::InvalidShape, "envelope longer than the window");
  const int start = side == EnvelopeSide::Prefix ? 0 : u.length() - len;
  std::vector<std::uint64_t> codes;
  codes.reserve(u.cardinality());
  for (auto c : u.codes()) codes.push_back(u.codec().slice(c, start, len));
  WindowSet v = WindowSet::from_codes(u.base(), u.offset() + start, len, std::move(codes));
  const bool degenerate = v.cardinality() == word_count(u.base(), len);
  return Envelope{std::move(v), side, half, degenerate};
}

// ---------------------------------------------------------------------------
// Family report

struct FamilyRow {
  int n = 0;
  double eps = 0.0;
  std::size_t m = 0;
  int eta = 0;
  ReturnRegime regime = ReturnRegime::Overlap;
  std::optional<bool> nested;  // U_{n+1} subset of U_n; empty when n+1 is not instantiable
  int half = 0;
  std::optional<double> n_mu_half;  // n * mu(U_{floor(eta/2)}); empty when out of range
};

inline std::vector<FamilyRow> family_report(const FamilyDescriptor& f, const MarkovMeasure& m, int n_min, int n_max) {
  std::vector<FamilyRow> rows;
  for (int n = n_min; n <= n_max; ++n) {
    if (!f.instantiable(n)) continue;
    const WindowSet u = f.instantiate(n);
    FamilyRow row;
    row.n = n;
    row.eps = set_measure(m, u);
    row.m = u.cardinality();
    const ReturnTimeRecord rt = return_time(u);
    row.eta = rt.eta;
    row.regime = rt.regime;
    if (f.instantiable(n + 1)) row.nested = check_nested(f.instantiate(n + 1), u, NestingAlignment::SetInclusion).holds;
    row.half = rt.eta / 2;
    if (row.half >= 1 && f.instantiable(row.half))
      row.n_mu_half = n * set_measure(m, f.instantiate(row.half));
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Constructed families

/// Single one-sided cylinder: the length-n prefix of (0^{r-1} 1)^infinity
/// with r = floor(log2 n) + floor(sqrt n) on the full 2-shift. Its return
/// time is r whenever r < n.
inline FamilyDescriptor log_return_family(int n_min, int n_max) {
  const TransitionMatrix full2 = TransitionMatrix::full_shift(2);
  ExplicitFamily fam;
  for (int n = std::max(n_min, 1); n <= n_max; ++n) {
    const int r = std::bit_width(static_cast<unsigned>(n)) - 1 + static_cast<int>(std::sqrt(static_cast<double>(n)));
    Word block(static_cast<std::size_t>(r), 0);
    block.back() = 1;
    fam.entries[n] = ExplicitEntry{0, n, {PointStream::periodic(block).slice(0, n)}};
  }
  return FamilyDescriptor::explicit_list(full2, std::move(fam));
}

/// Centered single cylinders 1^o 0^{2n-2o} 1^o with o = floor(n/2) - 1
/// (o = 0 gives 1 0^{2n-1}) on the full 2-shift: eta_n = n + ceil(n/2) + 1.
inline FamilyDescriptor late_return_family(int n_min, int n_max) {
  const TransitionMatrix full2 = TransitionMatrix::full_shift(2);
  ExplicitFamily fam;
  for (int n = std::max(n_min, 2); n <= n_max; ++n) {
    const int o = n / 2 - 1;
    Word w(static_cast<std::size_t>(2 * n), 0);
    if (o == 0) {
      w[0] = 1;
    } else {
      for (int i = 0; i < o; ++i) w[static_cast<std::size_t>(i)] = w[static_cast<std::size_t>(2 * n - 1 - i)] = 1;
    }
    fam.entries[n] = ExplicitEntry{-n, 2 * n, {w}};
  }
  return FamilyDescriptor::explicit_list(full2, std::move(fam));
}

/// Centered single cylinders (1 0^{n-1})^2 on the full 2-shift: eta_n = n.
inline FamilyDescriptor early_return_family(int n_min, int n_max) {
  const TransitionMatrix full2 = TransitionMatrix::full_shift(2);
  ExplicitFamily fam;
  for (int n = std::max(n_min, 2); n <= n_max; ++n) {
    Word w(static_cast<std::size_t>(2 * n), 0);
    w[0] = 1;
    w[static_cast<std::size_t>(n)] = 1;
    fam.entries[n] = ExplicitEntry{-n, 2 * n, {w}};
  }
  return FamilyDescriptor::explicit_list(full2, std::move(fam));
}

/// Centered single cylinders 1^n 0^n for even n and 0^n 1^n for odd n on the
/// full 2-shift. Unbordered, so eta_n = 2n; consecutive members are not nested.
inline FamilyDescriptor alternating_block_family(int n_min, int n_max) {
  const TransitionMatrix full2 = TransitionMatrix::full_shift(2);
  ExplicitFamily fam;
  for (int n = std::max(n_min, 1); n <= n_max; ++n) {
    Word w(static_cast<std::size_t>(2 * n), 0);
    const std::size_t ones = n % 2 == 0 ? 0 : static_cast<std::size_t>(n);
    for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) w[ones + i] = 1;
    fam.entries[n] = ExplicitEntry{-n, 2 * n, {w}};
  }
  return FamilyDescriptor::explicit_list(full2, std::move(fam));
}

}  // namespace hitlaw
