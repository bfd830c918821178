#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "hitlaw/sft.hpp"
#include "oracles.hpp"

using namespace hitlaw;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Internal;
}

}  // namespace

TEST(TransitionMatrix, FullShiftIsPrimitiveAtOnce) {
  const auto a = TransitionMatrix::validate({{1, 1}, {1, 1}});
  EXPECT_EQ(a.size(), 2);
  EXPECT_EQ(a.aperiodicity_exponent(), 1);
}

TEST(TransitionMatrix, GoldenMeanNeedsSquare) {
  const auto a = TransitionMatrix::validate({{1, 1}, {1, 0}});
  EXPECT_EQ(a.aperiodicity_exponent(), 2);
  EXPECT_TRUE(a.allowed(0, 1));
  EXPECT_FALSE(a.allowed(1, 1));
}

TEST(TransitionMatrix, Rejections) {
  EXPECT_EQ(code_of([] { TransitionMatrix::validate({{0, 1}, {1, 0}}); }), ErrorCode::NotPrimitive);
  EXPECT_EQ(code_of([] { TransitionMatrix::validate({{1, 2}, {1, 1}}); }), ErrorCode::NonBinaryEntry);
  EXPECT_EQ(code_of([] { TransitionMatrix::validate({{1, 1}, {1}}); }), ErrorCode::InvalidShape);
  EXPECT_EQ(code_of([] { TransitionMatrix::validate({{1, 0}, {1, 0}}); }), ErrorCode::EmptyRowOrColumn);
}

TEST(TransitionMatrix, ParseRoundTrip) {
  std::istringstream in("2\n1 1\n1 0\n");
  const auto a = parse_transition_matrix(in);
  EXPECT_EQ(a.entries(), (std::vector<std::vector<int>>{{1, 1}, {1, 0}}));
  std::istringstream again(format_transition_matrix(a));
  EXPECT_EQ(parse_transition_matrix(again).entries(), a.entries());
}

TEST(Perron, KnownEigenvalues) {
  const auto p2 = perron(TransitionMatrix::full_shift(2), 1e-14);
  EXPECT_NEAR(p2.eigenvalue, 2.0, 1e-12);
  const auto p3 = perron(TransitionMatrix::full_shift(3), 1e-14);
  EXPECT_NEAR(p3.eigenvalue, 3.0, 1e-12);
  const auto g = perron(TransitionMatrix::golden_mean(), 1e-14);
  EXPECT_NEAR(g.eigenvalue, (1.0 + std::sqrt(5.0)) / 2.0, 1e-10);
}

TEST(Perron, Entropy) {
  EXPECT_NEAR(entropy(TransitionMatrix::full_shift(2)), std::log(2.0), 1e-12);
  EXPECT_NEAR(entropy(TransitionMatrix::full_shift(3)), std::log(3.0), 1e-12);
  EXPECT_NEAR(entropy(TransitionMatrix::golden_mean()), 0.4812118251, 1e-10);
}

TEST(Words, EnumerationMatchesBruteForce) {
  const auto full2 = enumerate_words(TransitionMatrix::full_shift(2), 2, 100);
  EXPECT_EQ(full2, (std::vector<Word>{{0, 0}, {0, 1}, {1, 0}, {1, 1}}));
  const auto golden = enumerate_words(TransitionMatrix::golden_mean(), 3, 100);
  EXPECT_EQ(golden, (std::vector<Word>{{0, 0, 0}, {0, 0, 1}, {0, 1, 0}, {1, 0, 0}, {1, 0, 1}}));
  const oracle::Adjacency g{{1, 1}, {1, 0}};
  for (int len = 1; len <= 10; ++len) {
    EXPECT_EQ(word_count(TransitionMatrix::golden_mean(), len), oracle::words(g, len).size());
    EXPECT_EQ(enumerate_words(TransitionMatrix::golden_mean(), len, 1u << 20).size(), oracle::words(g, len).size());
  }
}

TEST(Words, CapExceeded) {
  EXPECT_EQ(code_of([] { enumerate_words(TransitionMatrix::full_shift(2), 12, 100); }), ErrorCode::CapExceeded);
}

TEST(Words, StringForm) {
  EXPECT_EQ(word_to_string({0, 1, 2}, 3), "012");
  EXPECT_EQ(word_from_string("0110", 2), (Word{0, 1, 1, 0}));
}

TEST(Connection, GoldenMean) {
  const auto a = TransitionMatrix::golden_mean();
  EXPECT_FALSE(connection_exists(a, 1, 1, 1));
  EXPECT_TRUE(connection_exists(a, 1, 1, 2));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) EXPECT_TRUE(connection_exists(a, i, j, a.aperiodicity_exponent()));
}
