#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "hitlaw/experiment.hpp"
#include "oracles.hpp"

using namespace hitlaw;

namespace {

struct System {
  const char* name;
  TransitionMatrix a;
  MarkovMeasure m;
};

std::vector<System> systems() {
  const auto full2 = TransitionMatrix::full_shift(2);
  const auto full3 = TransitionMatrix::full_shift(3);
  const auto golden = TransitionMatrix::golden_mean();
  return {{"full2-gibbs", full2, gibbs(full2, random_potential(full2, 3, 0.5)).measure},
          {"full3-bernoulli", full3, bernoulli({0.5, 0.3, 0.2})},
          {"golden-parry", golden, parry(golden)}};
}

oracle::Rows rows_of(const Matrix& m) {
  oracle::Rows r(m.rows(), std::vector<double>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) r[i][j] = m(i, j);
  return r;
}

std::set<oracle::Word> as_oracle(const WindowSet& u) {
  std::set<oracle::Word> out;
  for (const Word& w : u.words()) out.insert(oracle::Word(w.begin(), w.end()));
  return out;
}

// mu(U cap {tau > q}) by enumeration.
double conditional_brute(const System& s, const WindowSet& u, int q) {
  const auto target = as_oracle(u);
  const int len = u.length();
  double total = 0.0;
  for (const auto& w : oracle::words(s.a.entries(), len + q)) {
    if (!target.count(oracle::Word(w.begin(), w.begin() + len))) continue;
    bool hit = false;
    for (int k = 1; k <= q && !hit; ++k) hit = target.count(oracle::Word(w.begin() + k, w.begin() + k + len)) > 0;
    if (!hit) total += oracle::cylinder(s.m.stationary(), rows_of(s.m.kernel()), w);
  }
  return total;
}

std::vector<WindowSet> small_targets(const System& s) {
  std::vector<WindowSet> out;
  const int a = s.a.size();
  for (int len = 1; len <= 4; ++len) {
    const auto all = enumerate_words(s.a, len, 1000);
    out.push_back(WindowSet::from_words(s.a, 0, len, {all.front()}));
    out.push_back(WindowSet::from_words(s.a, 0, len, {all.back()}));
    if (all.size() > 2) out.push_back(WindowSet::from_words(s.a, -len / 2, len, {all[1], all[all.size() / 2]}));
  }
  if (a == 3) out.push_back(FamilyDescriptor::prefix(s.a, 0, {1, 2}).instantiate(4));
  return out;
}

}  // namespace

TEST(WindowChain, Sizes) {
  const auto full2 = TransitionMatrix::full_shift(2);
  const auto c1 = WindowChain::build(bernoulli({0.5, 0.5}), WindowSet::from_words(full2, 0, 1, {{1}}));
  EXPECT_EQ(c1.size(), 2u);
  EXPECT_DOUBLE_EQ(c1.initial()[0], 0.5);
  EXPECT_DOUBLE_EQ(c1.initial()[1], 0.5);
  const auto golden = TransitionMatrix::golden_mean();
  const auto c2 = WindowChain::build(parry(golden), WindowSet::from_words(golden, 0, 3, {{0, 1, 0}}));
  EXPECT_EQ(c2.size(), 5u);
  const auto full3 = TransitionMatrix::full_shift(3);
  const auto c3 = WindowChain::build(bernoulli({1.0 / 3, 1.0 / 3, 1.0 / 3}), FamilyDescriptor::prefix(full3, 0, {1, 2}).instantiate(4));
  EXPECT_EQ(c3.size(), 81u);
  EXPECT_EQ(c3.absorbing_count(), 8u);
}

TEST(WindowChain, StateSpaceGuard) {
  const auto full2 = TransitionMatrix::full_shift(2);
  const auto u = FamilyDescriptor::fixed_point(full2, PointStream::periodic({0, 1}), Anchor::OneSided).instantiate(21);
  try {
    WindowChain::build(bernoulli({0.5, 0.5}), u);
    FAIL() << "expected a guard";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::StateSpaceTooLarge);
  }
}

TEST(Survival, FairCoinGeometric) {
  const auto full2 = TransitionMatrix::full_shift(2);
  const auto c = survival(WindowChain::build(bernoulli({0.5, 0.5}), WindowSet::from_words(full2, 0, 1, {{1}})), 30);
  for (int q = 0; q <= 30; ++q) EXPECT_NEAR(c.values[static_cast<std::size_t>(q)], std::ldexp(1.0, -q), 1e-15);
}

TEST(Survival, MatchesEnumeration) {
  for (const auto& s : systems()) {
    const int qmax = s.a.size() == 3 ? 7 : 12;
    for (const auto& u : small_targets(s)) {
      const auto curve = survival(WindowChain::build(s.m, u), qmax);
      const auto target = as_oracle(u);
      for (int q = 0; q <= qmax; ++q)
        EXPECT_NEAR(curve.values[static_cast<std::size_t>(q)],
                    oracle::survival(s.a.entries(), s.m.stationary(), rows_of(s.m.kernel()), target, u.length(), q), 1e-12)
            << s.name << " L=" << u.length() << " q=" << q;
    }
  }
}

TEST(Survival, MonotoneTails) {
  for (const auto& s : systems())
    for (const auto& u : small_targets(s)) {
      const auto curve = survival(WindowChain::build(s.m, u), 200);
      for (std::size_t q = 1; q < curve.values.size(); ++q) EXPECT_LE(curve.values[q], curve.values[q - 1] + 1e-15);
    }
}

TEST(Survival, HorizonGuard) {
  const auto full2 = TransitionMatrix::full_shift(2);
  const auto chain = WindowChain::build(bernoulli({0.5, 0.5}), WindowSet::from_words(full2, 0, 1, {{1}}));
  EXPECT_THROW(survival(chain, kHorizonCap + 1), Error);
}

TEST(ConditionalSurvival, StartsAtMeasureAndMatchesEnumeration) {
  for (const auto& s : systems()) {
    for (const auto& u : small_targets(s)) {
      const auto chain = WindowChain::build(s.m, u);
      const auto cs = conditional_survival(chain, 6);
      EXPECT_NEAR(cs[0], set_measure(s.m, u), 1e-15);
      for (int q = 0; q <= 6; ++q) EXPECT_NEAR(cs[static_cast<std::size_t>(q)], conditional_brute(s, u, q), 1e-12);
    }
  }
}

TEST(RescaledLaw, GridLookup) {
  const auto full2 = TransitionMatrix::full_shift(2);
  const auto curve = survival(WindowChain::build(bernoulli({0.5, 0.5}), WindowSet::from_words(full2, 0, 2, {{1, 1}})), 40);
  EXPECT_EQ(rescaled_law(curve, 0.0), 1.0);
  EXPECT_EQ(rescaled_law(curve, 1.0), curve.values[4]);
  EXPECT_EQ(grid_index(1.0, 0.25), 4);
}

TEST(Ks, GeometricHalf) {
  const auto full2 = TransitionMatrix::full_shift(2);
  const auto curve = survival_to_ks_horizon(WindowChain::build(bernoulli({0.5, 0.5}), WindowSet::from_words(full2, 0, 1, {{1}})));
  const auto k = ks_vs_exponential(curve);
  EXPECT_NEAR(k.sup_grid, oracle::ks_grid(curve.values, 0.5), 1e-15);
  // The sup sits at q = 2 (e^-1 - 1/4 = 0.1179), above the q = 1 value 0.1065.
  EXPECT_NEAR(k.sup_grid, std::exp(-1.0) - 0.25, 1e-15);
  EXPECT_EQ(k.argmax, 2);
  EXPECT_GT(k.sup_grid, std::exp(-0.5) - 0.5);
  EXPECT_LT(k.tail_bound, 1e-4);
  EXPECT_NEAR(k.ks, k.sup_grid + k.tail_bound, 1e-15);
}

TEST(Ks, ImmediateAbsorption) {
  const auto full2 = TransitionMatrix::full_shift(2);
  const auto curve = survival_to_ks_horizon(WindowChain::build(bernoulli({0.5, 0.5}), WindowSet::from_words(full2, 0, 1, {{0}, {1}})));
  EXPECT_EQ(curve.eps, 1.0);
  for (std::size_t q = 1; q < curve.values.size(); ++q) EXPECT_EQ(curve.values[q], 0.0);
  EXPECT_NEAR(ks_vs_exponential(curve).sup_grid, std::exp(-1.0), 1e-15);
}

TEST(Ks, ShortCurveRejected) {
  const auto full2 = TransitionMatrix::full_shift(2);
  const auto curve = survival(WindowChain::build(bernoulli({0.5, 0.5}), WindowSet::from_words(full2, 0, 1, {{1}})), 3);
  EXPECT_THROW(ks_vs_exponential(curve), Error);
}

TEST(Ks, DecreasesAlongThePrefixFamily) {
  const auto full3 = TransitionMatrix::full_shift(3);
  const auto m = bernoulli({1.0 / 3, 1.0 / 3, 1.0 / 3});
  const auto f = FamilyDescriptor::prefix(full3, 0, {1, 2});
  double prev = 1.0;
  for (int n = 4; n <= 9; ++n) {
    const double ks = ks_vs_exponential(survival_to_ks_horizon(WindowChain::build(m, f.instantiate(n)), n)).ks;
    EXPECT_LT(ks, prev);
    prev = ks;
  }
}
