#include <gtest/gtest.h>

#include <cmath>

#include "hitlaw/experiment.hpp"

using namespace hitlaw;

namespace {

const LemmaReport& by_id(const std::vector<LemmaReport>& reps, const std::string& id) {
  for (const auto& r : reps)
    if (r.id == id) return r;
  throw std::runtime_error("no report " + id);
}

void expect_all_pass(const std::vector<LemmaReport>& reps) {
  for (const auto& r : reps)
    if (r.applicable && !r.diagnostic) {
      EXPECT_TRUE(r.pass) << r.id << " worst " << r.worst;
    }
}

SurvivalCurve prefix_curve(int n) {
  const auto full3 = TransitionMatrix::full_shift(3);
  const auto m = bernoulli({1.0 / 3, 1.0 / 3, 1.0 / 3});
  return survival_to_ks_horizon(WindowChain::build(m, FamilyDescriptor::prefix(full3, 0, {1, 2}).instantiate(n)), n);
}

}  // namespace

TEST(Telescoping, HoldsAtEveryN) {
  const auto c = prefix_curve(5);
  for (long n : {0L, 1L, 7L, 100L, static_cast<long>(c.horizon())}) {
    const auto r = telescoping_check(c, n);
    EXPECT_TRUE(r.pass) << n;
    EXPECT_LT(r.worst, 1e-10);
  }
  const auto zero = telescoping_check(c, 0);
  EXPECT_EQ(zero.traces.front().lhs, 0.0);
  EXPECT_EQ(zero.traces.front().rhs, 0.0);
  EXPECT_TRUE(telescoping_scan(c).pass);
}

TEST(Telescoping, BrokenSumIsCaught) {
  const auto c = prefix_curve(3);
  const auto r = telescoping_check(c, 20, dropping_sum);
  EXPECT_FALSE(r.pass);
  EXPECT_GT(r.worst, 1e-6);
}

TEST(Lemma3, PassesWithoutMixing) {
  const auto full3 = TransitionMatrix::full_shift(3);
  const auto full2 = TransitionMatrix::full_shift(2);
  EXPECT_TRUE(lemma3_check(WindowChain::build(bernoulli({1.0 / 3, 1.0 / 3, 1.0 / 3}), FamilyDescriptor::prefix(full3, 0, {1, 2}).instantiate(3)), 50).pass);
  const auto zero = FamilyDescriptor::fixed_point(full2, PointStream::periodic({0}), Anchor::OneSided).instantiate(4);
  EXPECT_TRUE(lemma3_check(WindowChain::build(bernoulli({0.5, 0.5}), zero), 50).pass);
}

TEST(Lemma3, PerturbedKernelIsDetected) {
  const auto golden = TransitionMatrix::golden_mean();
  const auto m = parry(golden);
  const auto u = FamilyDescriptor::prefix(golden, 1, {0}).instantiate(2);
  const auto clean = lemma3_check(WindowChain::build(m, u), 200);
  EXPECT_TRUE(clean.pass);
  const auto bad = lemma3_check(WindowChain::build(m, u, perturb_kernel(m, 1e-3)), 200);
  EXPECT_FALSE(bad.pass);
  EXPECT_GT(bad.worst, 1e-5);
}

TEST(Lemma4, IndependentWindowsGiveEquality) {
  const auto full2 = TransitionMatrix::full_shift(2);
  const auto m = bernoulli({0.6, 0.4});
  const auto chain = WindowChain::build(m, FamilyDescriptor::prefix(full2, 0, {1}).instantiate(3));
  const auto psi = psi_profile(m, 10, 3);
  const auto reps = lemma4_checks(chain, psi, 200, 6);
  const auto& eq13 = by_id(reps, "lemma4-eq13");
  const double eps = chain.epsilon();
  for (const auto& t : eq13.traces) EXPECT_NEAR(t.lhs, eps * eps, 1e-15) << "k = " << t.index;
  expect_all_pass(reps);
}

TEST(Lemma4, GoldenPrefixPassesAndWeakPsiFails) {
  const auto golden = TransitionMatrix::golden_mean();
  const auto m = parry(golden);
  const auto chain = WindowChain::build(m, FamilyDescriptor::prefix(golden, 1, {0}).instantiate(4));
  const auto psi = psi_profile(m, 12, 4);
  const auto reps = lemma4_checks(chain, psi, 300, 8);
  for (const char* id : {"lemma4-eq13", "lemma4-eq14", "lemma4-eq15", "lemma4-eq16"}) EXPECT_TRUE(by_id(reps, id).pass) << id;
  const auto weak = lemma4_checks(chain, psi.scaled(0.0), 300, 8);
  EXPECT_FALSE(by_id(weak, "lemma4-eq13").pass);
  EXPECT_FALSE(by_id(weak, "lemma4-eq16").pass);
}

TEST(S1S2, PrefixFamily) {
  const auto psi = psi_profile(bernoulli({1.0 / 3, 1.0 / 3, 1.0 / 3}), 10, 3);
  expect_all_pass(s1_s2_bounds(prefix_curve(6), psi, 6, 1.0, 6));
  const auto full2 = TransitionMatrix::full_shift(2);
  const auto m = bernoulli({0.5, 0.5});
  const auto c = survival(WindowChain::build(m, FamilyDescriptor::prefix(full2, 0, {1}).instantiate(2)), 40);
  const auto reps = s1_s2_bounds(c, psi_profile(m, 4, 3), 2, 5.0, 2);
  expect_all_pass(reps);
  EXPECT_TRUE(by_id(reps, "s2-bound").applicable);
  EXPECT_LT(by_id(reps, "s1-s2-decomposition").worst, 1e-10);
}

TEST(S1S2, S2NeedsEtaEqualN) {
  const auto full2 = TransitionMatrix::full_shift(2);
  const auto m = bernoulli({0.5, 0.5});
  const auto u = FamilyDescriptor::fixed_point(full2, PointStream::periodic({0, 1}), Anchor::OneSided).instantiate(4);
  const auto c = survival_to_ks_horizon(WindowChain::build(m, u), 4);
  const auto reps = s1_s2_bounds(c, psi_profile(m, 6, 3), 4, 1.0, 2);
  EXPECT_FALSE(by_id(reps, "s2-bound").applicable);
}

TEST(Section42, NoShortReturnMeansZero) {
  const auto full3 = TransitionMatrix::full_shift(3);
  const auto m = bernoulli({1.0 / 3, 1.0 / 3, 1.0 / 3});
  const auto f = FamilyDescriptor::prefix(full3, 0, {1, 2});
  const auto reps = section42_check(f, 4, m, psi_profile(m, 10, 3), 200);
  const auto& b = by_id(reps, "sec42-bound");
  EXPECT_TRUE(b.pass);
  for (const auto& t : b.traces) EXPECT_EQ(t.lhs, t.rhs);
}

TEST(Section42, PeriodicPointBoundHolds) {
  const auto full2 = TransitionMatrix::full_shift(2);
  const auto m = gibbs(full2, sticky_potential(full2, 0.5)).measure;
  const auto f = FamilyDescriptor::fixed_point(full2, PointStream::periodic({0, 1}), Anchor::OneSided);
  expect_all_pass(section42_check(f, 8, m, psi_profile(m, 20, 4), 300));
}

TEST(Section42, NonShrinkingFamilyRejected) {
  const auto m = bernoulli({0.5, 0.5});
  try {
    section42_check(log_return_family(1, 10), 8, m, psi_profile(m, 20, 3), 100);
    FAIL() << "expected FamilyNotShrinking";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::FamilyNotShrinking);
  }
}

TEST(Section43, LateAndEarlyReturns) {
  const auto m = gibbs(TransitionMatrix::full_shift(2), sticky_potential(TransitionMatrix::full_shift(2), 0.3)).measure;
  const auto psi = psi_profile(m, 30, 4);
  for (int n = 2; n <= 6; ++n) {
    const auto late = section43_check(late_return_family(2, 6), n, m, psi);
    EXPECT_TRUE(by_id(late, "sec43-eq1").pass) << n;
    EXPECT_TRUE(by_id(late, "sec43-case1-bound").pass) << n;
    const auto early = section43_check(early_return_family(2, 6), n, m, psi);
    EXPECT_TRUE(by_id(early, "sec43-eq2").pass) << n;
    EXPECT_FALSE(by_id(early, "sec43-eq1").applicable);
  }
}

TEST(Section43, IndependentCaseIsExact) {
  const auto m = bernoulli({0.5, 0.5});
  const auto psi = psi_profile(m, 30, 3);
  for (int n = 3; n <= 6; ++n) {
    const auto reps = section43_check(late_return_family(2, 6), n, m, psi);
    expect_all_pass(reps);
    for (const auto& t : by_id(reps, "sec43-eq1").traces) EXPECT_LE(t.lhs, t.rhs + 1e-15);
  }
}

TEST(Section43, NeedsCenteredFamily) {
  const auto full3 = TransitionMatrix::full_shift(3);
  const auto m = bernoulli({1.0 / 3, 1.0 / 3, 1.0 / 3});
  EXPECT_THROW(section43_check(FamilyDescriptor::prefix(full3, 0, {1, 2}), 3, m, psi_profile(m, 10, 3)), Error);
}
