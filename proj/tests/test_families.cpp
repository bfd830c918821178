#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "hitlaw/experiment.hpp"
#include "oracles.hpp"

using namespace hitlaw;

namespace {

std::set<oracle::Word> as_oracle(const WindowSet& u) {
  std::set<oracle::Word> out;
  for (const Word& w : u.words()) out.insert(oracle::Word(w.begin(), w.end()));
  return out;
}

oracle::Adjacency adjacency(const TransitionMatrix& a) { return a.entries(); }

}  // namespace

TEST(PointStream, Slices) {
  EXPECT_EQ(PointStream::periodic({0, 1}).slice(-3, 5), (Word{1, 0, 1, 0, 1}));
  EXPECT_EQ(PointStream::fibonacci().slice(0, 8), (Word{0, 1, 0, 0, 1, 0, 1, 0}));
  EXPECT_EQ(PointStream::fibonacci().slice(-2, 2), (Word{1, 0}));
  EXPECT_EQ(PointStream::asymptotic({1}, {0}).slice(-2, 4), (Word{1, 1, 0, 0}));
  const auto e = PointStream::explicit_symbols({0, 1, 1, 0}, 1);
  EXPECT_TRUE(e.covers(-1, 4));
  EXPECT_FALSE(e.covers(-2, 2));
  EXPECT_EQ(e.slice(0, 2), (Word{1, 1}));
}

TEST(Families, PrefixExampleWords) {
  const auto f = FamilyDescriptor::prefix(TransitionMatrix::full_shift(3), 0, {1, 2});
  const auto u = f.instantiate(3);
  EXPECT_EQ(u.words(), (std::vector<Word>{{0, 1, 1}, {0, 1, 2}, {0, 2, 1}, {0, 2, 2}}));
  EXPECT_EQ(u.offset(), 0);
}

TEST(Families, FixedPointWindows) {
  const auto a = TransitionMatrix::full_shift(2);
  const auto one = FamilyDescriptor::fixed_point(a, PointStream::periodic({0}), Anchor::OneSided).instantiate(4);
  EXPECT_EQ(one.words(), (std::vector<Word>{{0, 0, 0, 0}}));
  const auto c = FamilyDescriptor::fixed_point(a, PointStream::periodic({0, 1}), Anchor::Centered).instantiate(2);
  EXPECT_EQ(c.offset(), -2);
  EXPECT_EQ(c.words(), (std::vector<Word>{{0, 1, 0, 1}}));
}

TEST(Families, SubmatrixNeedsThreeSymbols) {
  EXPECT_THROW(FamilyDescriptor::submatrix(TransitionMatrix::golden_mean(), {0}, 1), Error);
  const auto f = FamilyDescriptor::submatrix(TransitionMatrix::full_shift(3), {0, 1}, 2);
  const auto u = f.instantiate(3);
  EXPECT_EQ(u.cardinality(), 4u);
  for (const Word& w : u.words()) EXPECT_EQ(w[0], 2);
}

TEST(Families, InadmissibleWordsRejected) {
  const auto a = TransitionMatrix::golden_mean();
  EXPECT_THROW(WindowSet::from_words(a, 0, 2, {{1, 1}}), Error);
  EXPECT_THROW(WindowSet::from_words(a, 0, 2, {{0, 1, 0}}), Error);
}

TEST(ReturnTime, PrefixFamilyMatchesOracle) {
  const auto a = TransitionMatrix::full_shift(3);
  const auto f = FamilyDescriptor::prefix(a, 0, {1, 2});
  for (int n = 2; n <= 7; ++n) {
    const auto u = f.instantiate(n);
    const auto rt = return_time(u);
    EXPECT_EQ(rt.eta, n);
    EXPECT_EQ(oracle::return_time(adjacency(a), as_oracle(u), n, 3 * n), n);
  }
}

TEST(ReturnTime, PeriodicPoints) {
  const auto a = TransitionMatrix::full_shift(2);
  EXPECT_EQ(return_time(FamilyDescriptor::fixed_point(a, PointStream::periodic({0, 1}), Anchor::OneSided).instantiate(6)).eta, 2);
  for (int n = 1; n <= 6; ++n)
    EXPECT_EQ(return_time(FamilyDescriptor::fixed_point(a, PointStream::periodic({0}), Anchor::OneSided).instantiate(n)).eta, 1);
}

TEST(ReturnTime, WitnessIsReplayable) {
  const auto a = TransitionMatrix::golden_mean();
  const auto f = FamilyDescriptor::fixed_point(a, PointStream::fibonacci(), Anchor::OneSided);
  for (int n = 2; n <= 10; ++n) {
    const auto u = f.instantiate(n);
    const auto rt = return_time(u);
    EXPECT_EQ(rt.eta, oracle::return_time(adjacency(a), as_oracle(u), n, 4 * n));
    const Word x = rt.configuration();
    EXPECT_TRUE(a.admissible(x));
    EXPECT_TRUE(u.contains(Word(x.begin(), x.begin() + n)));
    EXPECT_TRUE(u.contains(Word(x.begin() + rt.eta, x.begin() + rt.eta + n)));
  }
}

TEST(ReturnTime, BuiltinFamiliesHaveTheirPrescribedValues) {
  const auto early = early_return_family(2, 10);
  const auto late = late_return_family(2, 10);
  const auto alt = alternating_block_family(2, 6);
  const auto lg = log_return_family(4, 14);
  const oracle::Adjacency full{{1, 1}, {1, 1}};
  for (int n = 2; n <= 10; ++n) {
    EXPECT_EQ(return_time(early.instantiate(n)).eta, n);
    EXPECT_EQ(return_time(late.instantiate(n)).eta, n + (n + 1) / 2 + 1);
  }
  for (int n = 2; n <= 6; ++n) {
    const auto u = alt.instantiate(n);
    EXPECT_EQ(return_time(u).eta, 2 * n);
    EXPECT_EQ(oracle::return_time(full, as_oracle(u), 2 * n, 4 * n), 2 * n);
  }
  for (int n = 4; n <= 14; ++n) {
    const int r = static_cast<int>(std::floor(std::log2(n))) + static_cast<int>(std::floor(std::sqrt(n)));
    EXPECT_EQ(return_time(lg.instantiate(n)).eta, std::min(r, n));
  }
}

TEST(Nesting, OneSidedFamiliesAreNested) {
  const auto a = TransitionMatrix::full_shift(3);
  const auto f = FamilyDescriptor::prefix(a, 0, {1, 2});
  const auto g = FamilyDescriptor::fixed_point(a, PointStream::periodic({0, 1, 2}), Anchor::OneSided);
  for (int n = 1; n <= 9; ++n) {
    EXPECT_TRUE(check_nested(f, n, NestingAlignment::SetInclusion).holds);
    EXPECT_TRUE(check_nested(g, n, NestingAlignment::SetInclusion).holds);
  }
}

TEST(Nesting, ExplicitCounterexample) {
  const auto a = TransitionMatrix::full_shift(2);
  ExplicitFamily e;
  e.entries[2] = ExplicitEntry{0, 2, {{0, 0}}};
  e.entries[3] = ExplicitEntry{0, 3, {{1, 1, 0}}};
  const auto f = FamilyDescriptor::explicit_list(a, e);
  const auto r = check_nested(f, 2, NestingAlignment::SetInclusion);
  EXPECT_FALSE(r.holds);
  ASSERT_TRUE(r.witness.has_value());
  EXPECT_EQ(*r.witness, (Word{1, 1, 0}));
}

TEST(Nesting, CenteredAlignments) {
  const auto a = TransitionMatrix::golden_mean();
  const auto f = FamilyDescriptor::fixed_point(a, PointStream::fibonacci(), Anchor::Centered);
  for (int n = 1; n <= 6; ++n) EXPECT_TRUE(check_nested(f, n, NestingAlignment::SetInclusion).holds);
}

TEST(Envelope, CenteredCylinderProjectsToPrefix) {
  const auto a = TransitionMatrix::full_shift(2);
  const int n = 4;
  const auto u = FamilyDescriptor::fixed_point(a, PointStream::asymptotic({1}, {0}), Anchor::Centered).instantiate(n);
  const auto v = envelope(u, 2 * n - 2, EnvelopeSide::Prefix);
  EXPECT_EQ(v.set.length(), n);
  EXPECT_EQ(v.set.offset(), -n);
  EXPECT_EQ(v.set.words(), (std::vector<Word>{{1, 1, 1, 1}}));
  EXPECT_FALSE(v.degenerate);
}

TEST(Envelope, DegenerateWhenEverythingProjects) {
  const auto a = TransitionMatrix::full_shift(2);
  const auto u = WindowSet::from_words(a, -2, 4, enumerate_words(a, 4, 100));
  const auto v = envelope(u, 2, EnvelopeSide::Prefix);
  EXPECT_TRUE(v.degenerate);
  EXPECT_NEAR(set_measure(bernoulli({0.5, 0.5}), v.set), 1.0, 1e-15);
}

TEST(Envelope, SidesDifferOnAsymmetricSets) {
  const auto a = TransitionMatrix::full_shift(3);
  const auto m = bernoulli({0.5, 0.3, 0.2});
  const auto u = WindowSet::from_words(a, 0, 4, {{0, 0, 1, 2}, {0, 1, 1, 2}});
  const auto pre = envelope(u, 2, EnvelopeSide::Prefix);
  const auto suf = envelope(u, 2, EnvelopeSide::Suffix);
  EXPECT_NEAR(set_measure(m, pre.set), 0.5 * 0.5 + 0.5 * 0.3, 1e-15);
  EXPECT_NEAR(set_measure(m, suf.set), 0.3 * 0.2, 1e-15);
  EXPECT_EQ(suf.set.offset(), 2);
}

TEST(FamilyReport, PrefixRow) {
  const auto a = TransitionMatrix::full_shift(3);
  const auto rows = family_report(FamilyDescriptor::prefix(a, 0, {1, 2}), bernoulli({1.0 / 3, 1.0 / 3, 1.0 / 3}), 6, 6);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_NEAR(rows[0].eps, (1.0 / 3) * std::pow(2.0 / 3, 5), 1e-15);
  EXPECT_EQ(rows[0].eta, 6);
  EXPECT_EQ(rows[0].m, 32u);
  ASSERT_TRUE(rows[0].nested.has_value());
  EXPECT_TRUE(*rows[0].nested);
}

TEST(FamilyReport, ZeroFixedPointFlagsHalfIndex) {
  const auto a = TransitionMatrix::full_shift(2);
  const auto rows = family_report(FamilyDescriptor::fixed_point(a, PointStream::periodic({0}), Anchor::OneSided),
                                  bernoulli({0.5, 0.5}), 2, 5);
  for (const auto& r : rows) {
    EXPECT_EQ(r.eta, 1);
    EXPECT_FALSE(r.n_mu_half.has_value());
  }
}
