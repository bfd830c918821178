#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "hitlaw/error.hpp"
#include "hitlaw/sft.hpp"

namespace hitlaw {

/// Big-endian base-a encoding of fixed-length words. Numeric order of codes
/// equals lexicographic order of words.
class WordCodec {
 public:
  WordCodec(int alphabet, int length) : alphabet_(alphabet), length_(length) {
    if (length < 0) fail(ErrorCode::InvalidShape, "negative word length");
    // Keep a^L below 2^62 so codes and intermediate products never overflow.
    long double span = 1.0L;
    for (int i = 0; i < length; ++i) span *= alphabet;
    if (span > 4.0e18L)
      fail(ErrorCode::WindowTooLong, "a^L exceeds the 64-bit code range (L = " + std::to_string(length) + ")");
    power_.assign(static_cast<std::size_t>(length) + 1, 1);
    for (int i = 1; i <= length; ++i) power_[i] = power_[i - 1] * static_cast<std::uint64_t>(alphabet);
  }

  int alphabet() const noexcept { return alphabet_; }
  int length() const noexcept { return length_; }

  /// a^k for 0 <= k <= length.
  std::uint64_t power(int k) const noexcept { return power_[static_cast<std::size_t>(k)]; }

  std::uint64_t encode(const Word& w) const noexcept {
    std::uint64_t c = 0;
    for (Symbol s : w) c = c * static_cast<std::uint64_t>(alphabet_) + s;
    return c;
  }

  Word decode(std::uint64_t code) const {
    Word w(static_cast<std::size_t>(length_), 0);
    for (int i = length_ - 1; i >= 0; --i) {
      w[static_cast<std::size_t>(i)] = static_cast<Symbol>(code % static_cast<std::uint64_t>(alphabet_));
      code /= static_cast<std::uint64_t>(alphabet_);
    }
    return w;
  }

  Symbol symbol_at(std::uint64_t code, int position) const noexcept {
    return static_cast<Symbol>(code / power_[static_cast<std::size_t>(length_ - 1 - position)] %
                               static_cast<std::uint64_t>(alphabet_));
  }

  /// Code of the sub-word at positions [start, start + len).
  std::uint64_t slice(std::uint64_t code, int start, int len) const noexcept {
    return code / power_[static_cast<std::size_t>(length_ - start - len)] % power_[static_cast<std::size_t>(len)];
  }

 private:
  int alphabet_;
  int length_;
  std::vector<std::uint64_t> power_;
};

/// A finite union of cylinders: admissible words of a common length L fixed at
/// absolute coordinates [offset, offset + L). A point x lies in the set iff
/// x restricted to those coordinates is one of the words; sigma^k x lies in it
/// iff x restricted to [k + offset, k + offset + L) is.
class WindowSet {
 public:
  static WindowSet from_words(const TransitionMatrix& base, int offset, int length,
                              const std::vector<Word>& words) {
    if (length < 1) fail(ErrorCode::InvalidShape, "window length must be at least 1");
    WindowSet u(base, offset, length);
    u.codes_.reserve(words.size());
    for (const Word& w : words) {
      if (static_cast<int>(w.size()) != length)
        fail(ErrorCode::MixedLength, "word '" + word_to_string(w, base.size()) + "' does not have length " +
                                         std::to_string(length));
      if (!base.admissible(w))
        fail(ErrorCode::InadmissibleWord, "word '" + word_to_string(w, base.size()) + "' is not admissible");
      u.codes_.push_back(u.codec_.encode(w));
    }
    std::sort(u.codes_.begin(), u.codes_.end());
    u.codes_.erase(std::unique(u.codes_.begin(), u.codes_.end()), u.codes_.end());
    return u;
  }

  /// Codes must be admissible and of this window's length; they are sorted and
  /// deduplicated here.
  static WindowSet from_codes(const TransitionMatrix& base, int offset, int length,
                              std::vector<std::uint64_t> codes) {
    WindowSet u(base, offset, length);
    std::sort(codes.begin(), codes.end());
    codes.erase(std::unique(codes.begin(), codes.end()), codes.end());
    u.codes_ = std::move(codes);
    return u;
  }

  const TransitionMatrix& base() const noexcept { return base_; }
  int offset() const noexcept { return offset_; }
  int length() const noexcept { return length_; }
  std::size_t cardinality() const noexcept { return codes_.size(); }
  bool empty() const noexcept { return codes_.empty(); }
  const WordCodec& codec() const noexcept { return codec_; }
  const std::vector<std::uint64_t>& codes() const noexcept { return codes_; }

  bool contains_code(std::uint64_t code) const {
    return std::binary_search(codes_.begin(), codes_.end(), code);
  }
  bool contains(const Word& w) const {
    return static_cast<int>(w.size()) == length_ && contains_code(codec_.encode(w));
  }

  std::vector<Word> words() const {
    std::vector<Word> out;
    out.reserve(codes_.size());
    for (auto c : codes_) out.push_back(codec_.decode(c));
    return out;
  }

  /// Coordinates fixed by the set: [offset, offset + length).
  int first_coordinate() const noexcept { return offset_; }
  int end_coordinate() const noexcept { return offset_ + length_; }

 private:
  WindowSet(const TransitionMatrix& base, int offset, int length)
      : base_(base), offset_(offset), length_(length), codec_(base.size(), length) {}

  TransitionMatrix base_;
  int offset_;
  int length_;
  WordCodec codec_;
  std::vector<std::uint64_t> codes_;
};

}  // namespace hitlaw
