#pragma once

// Subshifts of finite type: transition matrices, admissible words,
// Perron-Frobenius data and topological entropy.

#include <bit>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "hitlaw/error.hpp"
#include "hitlaw/numeric.hpp"

namespace hitlaw {

/// Symbols are 0-based. Alphabets are limited to 64 symbols so that a row of
/// a boolean matrix fits in one machine word.
using Symbol = std::uint8_t;
using Word = std::vector<Symbol>;

inline constexpr int kMaxAlphabet = 64;

/// Renders a word as digits (alphabet <= 10) or comma-separated integers.
inline std::string word_to_string(const Word& w, int alphabet) {
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (alphabet <= 10) {
      out.push_back(static_cast<char>('0' + w[i]));
    } else {
      if (i) out.push_back(',');
      out += std::to_string(static_cast<int>(w[i]));
    }
  }
  return out;
}

/// Inverse of word_to_string. Digit strings are accepted when the alphabet has
/// at most 10 symbols; comma-separated integers are always accepted.
inline Word word_from_string(const std::string& text, int alphabet) {
  Word w;
  if (text.find(',') == std::string::npos && alphabet <= 10) {
    for (char c : text) {
      if (c < '0' || c > '9') fail(ErrorCode::ParseError, "bad symbol in word '" + text + "'");
      w.push_back(static_cast<Symbol>(c - '0'));
    }
  } else {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        w.push_back(static_cast<Symbol>(std::stoi(item)));
      } catch (const std::exception&) {
        fail(ErrorCode::ParseError, "bad symbol in word '" + text + "'");
      }
    }
  }
  for (Symbol s : w)
    if (s >= alphabet) fail(ErrorCode::ParseError, "symbol out of range in '" + text + "'");
  return w;
}

namespace detail {

using BoolRows = std::vector<std::uint64_t>;

inline BoolRows bool_product(const BoolRows& lhs, const BoolRows& rhs) {
  BoolRows out(lhs.size(), 0);
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    std::uint64_t bits = lhs[i];
    while (bits) {
      const int l = std::countr_zero(bits);
      out[i] |= rhs[static_cast<std::size_t>(l)];
      bits &= bits - 1;
    }
  }
  return out;
}

inline bool all_positive(const BoolRows& m, int a) {
  const std::uint64_t full = a == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << a) - 1);
  for (auto r : m)
    if (r != full) return false;
  return true;
}

}  // namespace detail

/// Certified primitive 0/1 incidence matrix.
class TransitionMatrix {
 public:
  /// Validates a raw 0/1 array and certifies primitivity. The search for the
  /// aperiodicity exponent stops at the Wielandt bound (a-1)^2 + 1.
  static TransitionMatrix validate(const std::vector<std::vector<int>>& raw) {
    const std::size_t a = raw.size();
    if (a < 2) fail(ErrorCode::InvalidShape, "transition matrix needs at least 2 symbols");
    if (a > static_cast<std::size_t>(kMaxAlphabet))
      fail(ErrorCode::InvalidShape, "alphabet larger than 64 symbols");
    TransitionMatrix m;
    m.size_ = static_cast<int>(a);
    m.rows_.assign(a, 0);
    for (std::size_t i = 0; i < a; ++i) {
      if (raw[i].size() != a) fail(ErrorCode::InvalidShape, "transition matrix is not square");
      for (std::size_t j = 0; j < a; ++j) {
        const int e = raw[i][j];
        if (e != 0 && e != 1)
          fail(ErrorCode::NonBinaryEntry, "entry (" + std::to_string(i) + "," + std::to_string(j) +
                                              ") is " + std::to_string(e));
        if (e) m.rows_[i] |= std::uint64_t{1} << j;
      }
    }
    std::uint64_t column_union = 0;
    for (std::size_t i = 0; i < a; ++i) {
      if (m.rows_[i] == 0) fail(ErrorCode::EmptyRowOrColumn, "row " + std::to_string(i) + " is empty");
      column_union |= m.rows_[i];
    }
    for (std::size_t j = 0; j < a; ++j)
      if (!(column_union >> j & 1U))
        fail(ErrorCode::EmptyRowOrColumn, "column " + std::to_string(j) + " is empty");

    const int cap = (m.size_ - 1) * (m.size_ - 1) + 1;
    detail::BoolRows power = m.rows_;
    for (int d = 1; d <= cap; ++d) {
      if (detail::all_positive(power, m.size_)) {
        m.exponent_ = d;
        return m;
      }
      power = detail::bool_product(power, m.rows_);
    }
    fail(ErrorCode::NotPrimitive, "no power up to the Wielandt bound " + std::to_string(cap) +
                                      " is strictly positive");
  }

  static TransitionMatrix full_shift(int a) {
    return validate(std::vector<std::vector<int>>(static_cast<std::size_t>(a),
                                                  std::vector<int>(static_cast<std::size_t>(a), 1)));
  }

  /// A = [[1,1],[1,0]]: the word 11 is forbidden.
  static TransitionMatrix golden_mean() { return validate({{1, 1}, {1, 0}}); }

  int size() const noexcept { return size_; }
  int aperiodicity_exponent() const noexcept { return exponent_; }

  bool allowed(int i, int j) const noexcept { return rows_[static_cast<std::size_t>(i)] >> j & 1U; }

  /// Row i as a bitmask of allowed successors.
  std::uint64_t successors(int i) const noexcept { return rows_[static_cast<std::size_t>(i)]; }

  std::vector<std::vector<int>> entries() const {
    std::vector<std::vector<int>> out(static_cast<std::size_t>(size_),
                                      std::vector<int>(static_cast<std::size_t>(size_), 0));
    for (int i = 0; i < size_; ++i)
      for (int j = 0; j < size_; ++j) out[i][j] = allowed(i, j) ? 1 : 0;
    return out;
  }

  Matrix as_real() const {
    Matrix m(static_cast<std::size_t>(size_), static_cast<std::size_t>(size_));
    for (int i = 0; i < size_; ++i)
      for (int j = 0; j < size_; ++j) m(i, j) = allowed(i, j) ? 1.0 : 0.0;
    return m;
  }

  bool admissible(const Word& w) const noexcept {
    for (Symbol s : w)
      if (s >= size_) return false;
    for (std::size_t k = 0; k + 1 < w.size(); ++k)
      if (!allowed(w[k], w[k + 1])) return false;
    return true;
  }

  /// Principal submatrix on the given symbols, re-indexed 0..b-1 in order.
  std::vector<std::vector<int>> principal_submatrix(const std::vector<Symbol>& symbols) const {
    std::vector<std::vector<int>> out(symbols.size(), std::vector<int>(symbols.size(), 0));
    for (std::size_t i = 0; i < symbols.size(); ++i)
      for (std::size_t j = 0; j < symbols.size(); ++j)
        out[i][j] = allowed(symbols[i], symbols[j]) ? 1 : 0;
    return out;
  }

  bool operator==(const TransitionMatrix&) const = default;

 private:
  TransitionMatrix() = default;

  int size_ = 0;
  int exponent_ = 0;
  std::vector<std::uint64_t> rows_;
};

/// Perron eigendata of a primitive nonnegative matrix.
/// Normalisation: sum(right) = 1 and dot(left, right) = 1.
struct PerronData {
  double eigenvalue = 0.0;
  std::vector<double> right;
  std::vector<double> left;
  double right_residual = 0.0;
  double left_residual = 0.0;
  long iterations = 0;
};

inline constexpr long kPerronIterationCap = 1'000'000;

namespace detail {

inline std::vector<double> dominant_vector(const Matrix& m, double tol, double& eigenvalue,
                                           long& iterations) {
  const std::size_t n = m.rows();
  std::vector<double> v(n, 1.0 / static_cast<double>(n));
  for (long it = 1; it <= kPerronIterationCap; ++it) {
    std::vector<double> w = m.apply(v);
    double total = 0.0;
    for (double x : w) total += x;
    for (double& x : w) x /= total;
    const double diff = max_abs_diff(w, v);
    v = std::move(w);
    eigenvalue = total;
    if (diff < tol) {
      iterations = it;
      return v;
    }
  }
  fail(ErrorCode::NoConvergence,
       "power iteration did not converge within 1e6 iterations; tolerance too small");
}

inline double eigen_residual(const Matrix& m, std::span<const double> v, double lambda) {
  const std::vector<double> mv = m.apply(v);
  double r = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) r = std::max(r, std::abs(mv[i] - lambda * v[i]));
  return r;
}

}  // namespace detail

/// Perron data of a primitive nonnegative real matrix by power iteration on
/// the matrix and its transpose, started from the uniform vector.
inline PerronData perron(const Matrix& m, double tol) {
  if (!(tol > 0.0)) fail(ErrorCode::InvalidShape, "perron tolerance must be positive");
  PerronData out;
  long right_iters = 0;
  long left_iters = 0;
  double left_lambda = 0.0;
  out.right = detail::dominant_vector(m, tol, out.eigenvalue, right_iters);
  out.left = detail::dominant_vector(m.transposed(), tol, left_lambda, left_iters);
  double dot = 0.0;
  for (std::size_t i = 0; i < out.right.size(); ++i) dot += out.left[i] * out.right[i];
  for (double& x : out.left) x /= dot;
  out.iterations = std::max(right_iters, left_iters);
  out.right_residual = detail::eigen_residual(m, out.right, out.eigenvalue);
  out.left_residual = detail::eigen_residual(m.transposed(), out.left, out.eigenvalue);
  return out;
}

inline PerronData perron(const TransitionMatrix& a, double tol) { return perron(a.as_real(), tol); }

/// Topological entropy log(lambda).
inline double entropy(const TransitionMatrix& a) { return std::log(perron(a, 1e-14).eigenvalue); }

/// Number of admissible words of length L (saturating at uint64 max).
inline std::uint64_t word_count(const TransitionMatrix& a, int length) {
  if (length <= 0) return length == 0 ? 1 : 0;
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  std::vector<std::uint64_t> ending(static_cast<std::size_t>(a.size()), 1);
  for (int step = 1; step < length; ++step) {
    std::vector<std::uint64_t> next(ending.size(), 0);
    for (int i = 0; i < a.size(); ++i)
      for (int j = 0; j < a.size(); ++j)
        if (a.allowed(i, j)) next[j] = ending[i] > kMax - next[j] ? kMax : next[j] + ending[i];
    ending = std::move(next);
  }
  std::uint64_t total = 0;
  for (auto c : ending) total = c > kMax - total ? kMax : total + c;
  return total;
}

/// All admissible words of length L in lexicographic order.
inline std::vector<Word> enumerate_words(const TransitionMatrix& a, int length, std::uint64_t cap) {
  if (length < 1) fail(ErrorCode::InvalidShape, "word length must be at least 1");
  const std::uint64_t count = word_count(a, length);
  if (count > cap)
    fail(ErrorCode::CapExceeded, std::to_string(count) + " words of length " +
                                     std::to_string(length) + " exceed cap " + std::to_string(cap));
  std::vector<Word> out;
  out.reserve(static_cast<std::size_t>(count));
  Word w(static_cast<std::size_t>(length), 0);
  // Iterative depth-first search in lexicographic order.
  std::vector<int> next_symbol(static_cast<std::size_t>(length), 0);
  int depth = 0;
  while (depth >= 0) {
    int& s = next_symbol[static_cast<std::size_t>(depth)];
    bool advanced = false;
    while (s < a.size()) {
      const int cand = s++;
      if (depth > 0 && !a.allowed(w[static_cast<std::size_t>(depth - 1)], cand)) continue;
      w[static_cast<std::size_t>(depth)] = static_cast<Symbol>(cand);
      advanced = true;
      break;
    }
    if (!advanced) {
      s = 0;
      --depth;
      continue;
    }
    if (depth + 1 == length) {
      out.push_back(w);
    } else {
      ++depth;
    }
  }
  return out;
}

/// True iff (A^steps)(i, j) > 0, evaluated over booleans.
inline bool connection_exists(const TransitionMatrix& a, int i, int j, int steps) {
  std::uint64_t reach = std::uint64_t{1} << i;
  for (int s = 0; s < steps; ++s) {
    std::uint64_t next = 0;
    std::uint64_t bits = reach;
    while (bits) {
      next |= a.successors(std::countr_zero(bits));
      bits &= bits - 1;
    }
    reach = next;
  }
  return reach >> j & 1U;
}

/// Plain-text matrix format: first line "a", then a rows of a 0/1 digits
/// separated by spaces.
inline TransitionMatrix parse_transition_matrix(std::istream& in) {
  int a = 0;
  if (!(in >> a) || a < 1) fail(ErrorCode::ParseError, "expected alphabet size on the first line");
  std::vector<std::vector<int>> raw(static_cast<std::size_t>(a), std::vector<int>(static_cast<std::size_t>(a)));
  for (int i = 0; i < a; ++i)
    for (int j = 0; j < a; ++j)
      if (!(in >> raw[i][j])) fail(ErrorCode::ParseError, "matrix file truncated");
  return TransitionMatrix::validate(raw);
}

inline std::string format_transition_matrix(const TransitionMatrix& a) {
  std::ostringstream os;
  os << a.size() << '\n';
  for (int i = 0; i < a.size(); ++i) {
    for (int j = 0; j < a.size(); ++j) os << (j ? " " : "") << (a.allowed(i, j) ? 1 : 0);
    os << '\n';
  }
  return os.str();
}

}  // namespace hitlaw
