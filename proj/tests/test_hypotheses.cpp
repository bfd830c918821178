#include <gtest/gtest.h>

#include <cmath>

#include "hitlaw/experiment.hpp"

using namespace hitlaw;

namespace {

bool applies(const HypothesisReport& r, const std::string& name) {
  for (const auto& res : r.results)
    if (res.name == name) return res.applies;
  throw std::runtime_error("no result " + name);
}

ConditionStatus status(const HypothesisReport& r, const std::string& id) {
  const Condition* c = r.find(id);
  if (!c) throw std::runtime_error("no condition " + id);
  return c->status;
}

std::vector<std::pair<int, double>> seq(std::initializer_list<double> ys) {
  std::vector<std::pair<int, double>> out;
  int n = 1;
  for (double y : ys) out.emplace_back(n++, y);
  return out;
}

}  // namespace

TEST(Trend, Verdicts) {
  EXPECT_EQ(trend_verdict(seq({0.9, 0.5, 0.3, 0.2, 0.08})).verdict, Trend::DecreasingBelowThreshold);
  EXPECT_EQ(trend_verdict(seq({0.9, 0.5, 0.3, 0.2, 0.15})).verdict, Trend::Inconclusive);
  EXPECT_EQ(trend_verdict(seq({1, 2, 3, 4})).verdict, Trend::Increasing);
  const auto plateau = trend_verdict(seq({0.5, 0.3, 0.05, 0.05}));
  EXPECT_EQ(plateau.verdict, Trend::Inconclusive);
  EXPECT_FALSE(plateau.witness.empty());
  EXPECT_EQ(trend_verdict(seq({0.01})).verdict, Trend::Inconclusive);
  EXPECT_TRUE(trend_verdict(seq({0.5, 0.01})).is_heuristic);
}

TEST(Proposition1, ExampleOneApplies) {
  const auto full3 = TransitionMatrix::full_shift(3);
  const auto r = check_proposition1(FamilyDescriptor::prefix(full3, 0, {1, 2}), bernoulli({1.0 / 3, 1.0 / 3, 1.0 / 3}), 2, 12);
  EXPECT_EQ(status(r, "eta-equals-n"), ConditionStatus::HoldsAtRange);
  EXPECT_EQ(status(r, "n-eps-to-zero"), ConditionStatus::HoldsAtRange);
  EXPECT_TRUE(applies(r, "Proposition 1"));
  EXPECT_EQ(r.exit_code(), 0);
}

TEST(Proposition1, ZeroFixedPointFailsWithReplayableWitness) {
  const auto full2 = TransitionMatrix::full_shift(2);
  const auto f = FamilyDescriptor::fixed_point(full2, PointStream::periodic({0}), Anchor::OneSided);
  const auto r = check_proposition1(f, bernoulli({0.5, 0.5}), 2, 12);
  const Condition* c = r.find("eta-equals-n");
  ASSERT_NE(c, nullptr);
  EXPECT_EQ(c->status, ConditionStatus::Fails);
  ASSERT_TRUE(c->witness_n.has_value());
  EXPECT_EQ(*c->witness_n, 2);
  EXPECT_NE(return_time(f.instantiate(*c->witness_n)).eta, *c->witness_n);
  EXPECT_FALSE(c->witness.empty());
  EXPECT_EQ(r.exit_code(), 2);
}

TEST(Proposition1, ConstantNTimesEpsDoesNotApply) {
  // eps_n = floor(2^n / n) 2^-n, within n 2^-n of 1/n: the first words starting with 1.
  const auto full2 = TransitionMatrix::full_shift(2);
  ExplicitFamily e;
  for (int n = 4; n <= 12; ++n) {
    const auto all = enumerate_words(full2, n, 1u << 13);
    ExplicitEntry entry{0, n, {}};
    for (std::size_t i = all.size() / 2; entry.words.size() < all.size() / static_cast<std::size_t>(n); ++i)
      entry.words.push_back(all[i]);
    e.entries[n] = entry;
  }
  const auto m = bernoulli({0.5, 0.5});
  const auto f = FamilyDescriptor::explicit_list(full2, e);
  for (int n = 4; n <= 12; ++n) EXPECT_NEAR(n * set_measure(m, f.instantiate(n)), 1.0, 0.25);
  const auto r = check_proposition1(f, m, 4, 12);
  EXPECT_NE(status(r, "n-eps-to-zero"), ConditionStatus::HoldsAtRange);
  EXPECT_FALSE(applies(r, "Proposition 1"));
}

TEST(Corollary1, AperiodicGoldenPoint) {
  const auto golden = TransitionMatrix::golden_mean();
  const auto r = check_corollary1(FamilyDescriptor::fixed_point(golden, PointStream::fibonacci(), Anchor::OneSided),
                                  parry(golden), 2, 16);
  EXPECT_EQ(status(r, "shrinking"), ConditionStatus::HoldsAtRange);
  const Condition* t = r.find("n-mu-half-to-zero");
  ASSERT_TRUE(t && t->trend.has_value());
  EXPECT_FALSE(t->trend->sequence.empty());
}

TEST(Corollary1, PeriodicPointFails) {
  const auto full2 = TransitionMatrix::full_shift(2);
  const auto m = bernoulli({0.5, 0.5});
  const auto r = check_corollary1(FamilyDescriptor::fixed_point(full2, PointStream::periodic({0, 1}), Anchor::OneSided), m, 2, 12);
  const Condition* t = r.find("n-mu-half-to-zero");
  ASSERT_TRUE(t && t->trend.has_value());
  EXPECT_EQ(t->status, ConditionStatus::Fails);
  EXPECT_EQ(t->trend->verdict, Trend::Increasing);
  for (const auto& [n, y] : t->trend->sequence) EXPECT_NEAR(y, n * 0.5, 1e-15);
  EXPECT_FALSE(applies(r, "Corollary 1"));
}

TEST(Corollary1, IndexUnderflowIsFlagged) {
  const auto full2 = TransitionMatrix::full_shift(2);
  const auto r = check_corollary1(FamilyDescriptor::fixed_point(full2, PointStream::periodic({0}), Anchor::OneSided),
                                  bernoulli({0.5, 0.5}), 2, 8);
  EXPECT_EQ(status(r, "n-mu-half-to-zero"), ConditionStatus::Unavailable);
  EXPECT_FALSE(applies(r, "Corollary 1"));
}

TEST(Theorem1, CenteredAsymptoticPoint) {
  const auto full2 = TransitionMatrix::full_shift(2);
  const auto r = check_theorem1(FamilyDescriptor::fixed_point(full2, PointStream::asymptotic({1}, {0}), Anchor::Centered),
                                parry(full2), 2, 7);
  EXPECT_TRUE(r.banner.empty());
  EXPECT_EQ(status(r, "case1-nested"), ConditionStatus::HoldsAtRange);
  EXPECT_TRUE(applies(r, "Theorem 1 case 1"));
}

TEST(Theorem1, AlternatingBlocksUseCaseTwo) {
  const auto r = check_theorem1(alternating_block_family(2, 8), parry(TransitionMatrix::full_shift(2)), 2, 7);
  EXPECT_EQ(status(r, "case1-nested"), ConditionStatus::Fails);
  EXPECT_FALSE(applies(r, "Theorem 1 case 1"));
  EXPECT_TRUE(applies(r, "Theorem 1 case 2"));
}

TEST(Theorem1, LateReturnsUseTheEnvelope) {
  const auto r = check_theorem1(late_return_family(2, 8), parry(TransitionMatrix::full_shift(2)), 2, 7);
  EXPECT_TRUE(applies(r, "Theorem 1 case 3"));
}

TEST(Theorem1, NonParryMeasureIsBannered) {
  const auto golden = TransitionMatrix::golden_mean();
  const auto m = gibbs(golden, random_potential(golden, 1, 0.5)).measure;
  const auto r = check_theorem1(FamilyDescriptor::fixed_point(golden, PointStream::fibonacci(), Anchor::Centered), m, 2, 5);
  EXPECT_FALSE(r.banner.empty());
}

TEST(Theorem1, NeedsCenteredFamily) {
  const auto full3 = TransitionMatrix::full_shift(3);
  EXPECT_THROW(check_theorem1(FamilyDescriptor::prefix(full3, 0, {1, 2}), parry(full3), 2, 5), Error);
}

TEST(Example2, EigenvalueGap) {
  const auto full3 = TransitionMatrix::full_shift(3);
  const auto m = parry(full3);
  const auto zero = check_example2(full3, {0, 1}, 2, LocallyConstantPotential::zero(full3), m, 2, 8);
  EXPECT_NEAR(zero.lambda_a - zero.lambda_b, 1.0, 1e-12);
  EXPECT_TRUE(zero.verbatim_holds);
  EXPECT_TRUE(zero.log_holds);
  EXPECT_EQ(zero.proposition1.find("eta-equals-n")->status, ConditionStatus::HoldsAtRange);

  Matrix v(3, 3);
  v(0, 0) = 0.4;
  v(1, 2) = -0.4;
  const auto big = check_example2(full3, {0, 1}, 2, LocallyConstantPotential(full3, v), m, 2, 4);
  EXPECT_NEAR(big.sup_phi, 0.4, 1e-15);
  EXPECT_FALSE(big.verbatim_holds);
  EXPECT_FALSE(big.log_holds);
}
