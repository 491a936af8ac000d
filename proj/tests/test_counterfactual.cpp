#include <gtest/gtest.h>

#include <random>

#include "counterfactual_oracle.hpp"
#include "ctxkit/counterfactual.hpp"
#include "oracles.hpp"

using namespace ctxkit;

TEST(Born, BasisAndSuperposition) {
  QubitState zero{{1, 0}, {0, 0}}, plus{{std::sqrt(0.5), 0}, {std::sqrt(0.5), 0}};
  EXPECT_NEAR(born_probability(zero, {zero}), 1.0, 1e-15);
  EXPECT_NEAR(born_probability(plus, {zero}), 0.5, 1e-15);
  QubitState one{{0, 0}, {1, 0}};
  EXPECT_NEAR(born_probability(one, {zero}), 0.0, 1e-15);
}

TEST(Born, FixtureMixturesAreMaximallyMixed) {
  auto f = six_state_fixture();
  for (const auto& [id, parts] : f.composites) {
    auto rho = f.density(parts);
    EXPECT_NEAR(std::abs(rho(0, 0) - 0.5), 0, 1e-12) << id;
    EXPECT_NEAR(std::abs(rho(1, 1) - 0.5), 0, 1e-12) << id;
    EXPECT_NEAR(std::abs(rho(0, 1)), 0, 1e-12) << id;
  }
}

TEST(OutcomeSpace, DecodeAndCap) {
  EXPECT_EQ(decode_outcome(5, {2, 2, 2}), (std::vector<int>{1, 0, 1}));
  EXPECT_EQ(decode_outcome(5, {3, 2}), (std::vector<int>{2, 1}));
  EXPECT_EQ(outcome_space_size({2, 3, 4}), 24u);
  try {
    outcome_space_size(std::vector<int>(30, 2), 1 << 20);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::too_large);
  }
}

TEST(Bias, ProductIsUnbiasedCorrelatedIsNot) {
  CounterfactualDistribution prod{{2, 2}, {}};
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) prod.weights[{a, b}] = (a ? 0.3 : 0.7) * (b ? 0.6 : 0.4);
  EXPECT_TRUE(is_unbiased(prod, 0).unbiased);
  EXPECT_TRUE(is_unbiased(prod, 1).unbiased);
  CounterfactualDistribution corr{{2, 2}, {{{0, 0}, 0.5}, {{1, 1}, 0.5}}};
  auto r = is_unbiased(corr, 0);
  EXPECT_FALSE(r.unbiased);
  EXPECT_EQ(r.conditioning[0], -1);
  EXPECT_EQ(r.marginal, (std::vector<double>{0.5, 0.5}));
}

TEST(SixState, AllFiveCompositesInfeasibleExactly) {
  auto r = feasibility_search(six_state_instance());
  EXPECT_FALSE(r.feasible);
  EXPECT_TRUE(r.exact);
  EXPECT_TRUE(r.certificate_verified);
  EXPECT_FALSE(r.certificate.empty());
  for (const auto& e : r.certificate) EXPECT_FALSE(e.exact.empty());
}

TEST(SixState, TargetsAreExactQuarters) {
  auto inst = six_state_instance();
  ASSERT_TRUE(inst.exact());
  ASSERT_EQ(inst.targets.size(), 18u);
  for (const auto& t : inst.targets) {
    Rational q = *t.marginal[0].exact * 4;
    EXPECT_EQ(q.get_den(), 1) << t.preparation;
  }
}

TEST(SixState, EverySubsetMatchesVertexEnumeration) {
  const std::vector<std::string> all = {"P12", "P34", "P56", "P135", "P246"};
  const auto& cm = oracle::six_state_composites();
  int feasible = 0;
  for (int mask = 0; mask < 32; ++mask) {
    std::vector<PreparationId> ids;
    std::vector<std::vector<int>> groups;
    for (int k = 0; k < 5; ++k)
      if (mask >> k & 1) {
        ids.push_back(all[static_cast<std::size_t>(k)]);
        groups.push_back(cm.at(all[static_cast<std::size_t>(k)]));
      }
    if (ids.size() < 2) continue;
    auto r = feasibility_search(six_state_instance(ids));
    auto o = oracle::six_state_feasible(groups);
    ASSERT_EQ(r.feasible, o.feasible) << "subset mask " << mask;
    if (!r.feasible) {
      EXPECT_TRUE(r.certificate_verified);
    }
    feasible += r.feasible;
  }
  EXPECT_EQ(feasible, 1);  // only {P135, P246}
}

TEST(SixState, FeasibleSolutionReproducesTargetsAndIdentity) {
  auto inst = six_state_instance({"P135", "P246"});
  auto r = feasibility_search(inst);
  ASSERT_TRUE(r.feasible);
  for (const auto& t : inst.targets) {
    auto m = r.distributions.at(t.preparation).marginal(t.context);
    for (std::size_t k = 0; k < m.size(); ++k) EXPECT_NEAR(m[k], t.marginal[k].value, 1e-12);
  }
  const auto& a = r.distributions.at("P135");
  const auto& b = r.distributions.at("P246");
  for (int c = 0; c < 8; ++c) {
    auto key = decode_outcome(static_cast<std::uint64_t>(c), {2, 2, 2});
    EXPECT_NEAR(a.weight(key), b.weight(key), 1e-12);
    EXPECT_GE(a.weight(key), 0);
  }
}

TEST(SixState, FloatingPathAgrees) {
  auto inst = six_state_instance();
  for (auto& t : inst.targets)
    for (auto& x : t.marginal) x = Number(x.value);
  ASSERT_FALSE(inst.exact());
  auto r = feasibility_search(inst);
  EXPECT_FALSE(r.feasible);
  EXPECT_FALSE(r.exact);
  EXPECT_TRUE(r.certificate_verified);
}

// Random two-preparation, two-context instances with exact eighths as
// targets; identifying the two preparations is feasible iff their
// marginals agree (a product distribution then works), which the
// enumeration confirms.
TEST(RandomInstances, IdentifyTwoPreparations) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> eighth(0, 8), coin(0, 3);
  for (int it = 0; it < 60; ++it) {
    CounterfactualInstance inst;
    inst.contexts = {"X", "Y"};
    int q[2][2];
    for (int j = 0; j < 2; ++j)
      for (int i = 0; i < 2; ++i) {
        q[j][i] = eighth(rng);
        if (j == 1 && coin(rng)) q[1][i] = q[0][i];
        inst.targets.push_back({"R" + std::to_string(j), static_cast<std::size_t>(i),
                                {Number(Rational(q[j][i], 8)), Number(Rational(8 - q[j][i], 8))}});
      }
    inst.identify.push_back({"R0", "R1"});
    auto r = feasibility_search(inst);
    bool expect = q[0][0] == q[1][0] && q[0][1] == q[1][1];
    EXPECT_EQ(r.feasible, expect) << it;
    if (!r.feasible) {
      EXPECT_TRUE(r.certificate_verified);
    }
  }
}

TEST(Instance, MixtureWeightsMustBeKnownPreparations) {
  auto inst = six_state_instance({"P12", "P34"});
  inst.mixtures[0].parts[0].first = "nope";
  EXPECT_THROW(feasibility_search(inst), Error);
}

TEST(SixState, SinglePureStateIsFeasible) {
  auto full = six_state_instance({"P12"});
  CounterfactualInstance inst;
  inst.contexts = full.contexts;
  for (const auto& t : full.targets)
    if (t.preparation == "P1") inst.targets.push_back(t);
  ASSERT_EQ(inst.targets.size(), 3u);
  auto r = feasibility_search(inst);
  EXPECT_TRUE(r.feasible);
  EXPECT_TRUE(r.exact);
}

// P1, P3 and P5 each rule out one outcome with certainty, so their mixture
// never assigns weight to (1, 1, 1).
TEST(SixState, OddMixtureAvoidsAllOnes) {
  auto r = feasibility_search(six_state_instance({"P135"}));
  ASSERT_TRUE(r.feasible);
  EXPECT_EQ(r.distributions.at("P135").weight({1, 1, 1}), 0.0);
  for (const auto& id : {"P1", "P3", "P5"}) EXPECT_EQ(r.distributions.at(id).weight({1, 1, 1}), 0.0) << id;
}
