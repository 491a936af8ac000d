#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ctxkit/graphinv.hpp"
#include "oracles.hpp"

using namespace ctxkit;

namespace {

ExclusivityGraph random_graph(std::mt19937_64& rng, std::size_t n, double p, bool weighted) {
  std::bernoulli_distribution edge(p);
  std::uniform_real_distribution<double> wd(0.1, 2.0);
  std::vector<std::string> ids;
  std::vector<double> w;
  std::vector<std::vector<std::size_t>> edges;
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back("v" + std::to_string(i));
    w.push_back(weighted ? wd(rng) : 1.0);
    for (std::size_t j = 0; j < i; ++j)
      if (edge(rng)) edges.push_back({j, i});
  }
  return ExclusivityGraph(ids, w, edges, false);
}

std::vector<std::vector<char>> adjacency(const ExclusivityGraph& g) {
  std::vector<std::vector<char>> a(g.size(), std::vector<char>(g.size(), 0));
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j) a[i][j] = g.adjacent(i, j) ? 1 : 0;
  return a;
}

}  // namespace

TEST(GraphInvariants, FiveCycle) {
  auto g = cycle_graph(5);
  auto inv = graph_invariants(g);
  EXPECT_EQ(inv.alpha.value, 2.0);
  EXPECT_TRUE(is_independent(g, inv.alpha.vertices));
  EXPECT_EQ(inv.vf.value, Rational(5, 2));
  EXPECT_NEAR(inv.theta.value, odd_cycle_theta(5), 1e-3);
  EXPECT_NEAR(odd_cycle_theta(5), std::sqrt(5.0), 1e-12);
  EXPECT_TRUE(packing_feasible(inv.vf));
}

TEST(GraphInvariants, OddCyclesMatchClosedForm) {
  for (int n : {3, 7, 9}) {
    auto g = cycle_graph(static_cast<std::size_t>(n));
    auto th = lovasz_number(g);
    EXPECT_NEAR(th.value, odd_cycle_theta(n), 1e-3) << n;
    EXPECT_LE(th.lower, th.upper + 1e-12);
  }
}

TEST(GraphInvariants, ThetaCertificateIsOrthonormal) {
  auto g = cycle_graph(5);
  auto th = lovasz_number(g);
  ASSERT_TRUE(th.certificate.has_value());
  const auto& c = *th.certificate;
  ASSERT_EQ(c.vertices.size(), 5u);
  EXPECT_NEAR(c.state.norm(), 1.0, 1e-9);
  double sum = 0;
  for (std::size_t i = 0; i < c.vertices.size(); ++i) {
    EXPECT_NEAR(c.labels[i].norm(), 1.0, 1e-9);
    sum += g.weights()[c.vertices[i]] * c.x[i];
    for (std::size_t j = 0; j < c.vertices.size(); ++j)
      if (g.adjacent(c.vertices[i], c.vertices[j]))
        EXPECT_NEAR(c.labels[i].dot(c.labels[j]), 0.0, 1e-4);
  }
  EXPECT_NEAR(sum, th.value, 1e-3);
}

TEST(GraphInvariants, AlphaAgreesWithBruteForce) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 100; ++t) {
    std::size_t n = 1 + rng() % 14;
    auto g = random_graph(rng, n, 0.35, t % 2 == 1);
    auto a = independence_number(g);
    EXPECT_NEAR(a.value, oracle::brute_force_alpha(adjacency(g), g.weights()), 1e-12) << t;
    EXPECT_TRUE(is_independent(g, a.vertices));
  }
}

TEST(GraphInvariants, SqueezeOnRandomGraphs) {
  std::mt19937_64 rng(2024);
  const double tol = 1e-4;
  for (int t = 0; t < 60; ++t) {
    std::size_t n = 2 + rng() % 12;
    auto g = random_graph(rng, n, 0.2 + 0.5 * (t % 3) / 2.0, t % 2 == 1);
    auto inv = graph_invariants(g, tol);
    EXPECT_LE(inv.alpha.value, inv.theta.value + tol) << t;
    EXPECT_LE(inv.theta.value, inv.vf.value_d + tol) << t;
  }
}

TEST(GraphInvariants, ZeroWeightVerticesAreIgnored) {
  auto g = cycle_graph(5).with_weights({1, 1, 1, 1, 0});
  auto th = lovasz_number(g);
  // C5 minus a vertex is the path P4, which is perfect: theta = alpha = 2.
  EXPECT_NEAR(th.value, 2.0, 1e-3);
  EXPECT_EQ(independence_number(g).value, 2.0);
}

TEST(GraphInvariants, EmptyAndCompleteGraphs) {
  ExclusivityGraph empty({"a", "b", "c"}, {1, 1, 1}, {}, false);
  EXPECT_EQ(independence_number(empty).value, 3.0);
  EXPECT_NEAR(lovasz_number(empty).value, 3.0, 1e-3);
  EXPECT_EQ(fractional_packing_number(empty).value, Rational(3));

  ExclusivityGraph k4({"a", "b", "c", "d"}, {1, 1, 1, 1}, {{0, 1, 2, 3}}, true);
  EXPECT_EQ(independence_number(k4).value, 1.0);
  EXPECT_NEAR(lovasz_number(k4).value, 1.0, 1e-3);
  EXPECT_EQ(fractional_packing_number(k4).value, Rational(1));
}

TEST(GraphInvariants, CapsAreEnforced) {
  auto g = cycle_graph(30);
  EXPECT_THROW(lovasz_number(g), Error);
  try {
    independence_number(cycle_graph(41));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::too_large);
  }
}

TEST(Nchv, MaximalOddCycleHasNoAssignment) {
  EXPECT_FALSE(nchv_exists(cycle_graph(5, 1.0, true)).exists);
  auto even = nchv_exists(cycle_graph(6, 1.0, true));
  ASSERT_TRUE(even.exists);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(even.assignment[i] + even.assignment[(i + 1) % 6], 1);
  // Without the exactly-one rule the all-zero assignment is always admissible.
  EXPECT_TRUE(nchv_exists(cycle_graph(5, 1.0, false)).exists);
}

TEST(ProbabilisticModel, KcbsWeightsAreValidAndBounded) {
  // Each vertex at 1/sqrt5 is the KCBS quantum point; sum over an edge is < 1.
  const double p = 1.0 / std::sqrt(5.0);
  auto g = cycle_graph(5, p);
  EXPECT_TRUE(is_probabilistic_model(g).valid);
  EXPECT_TRUE(exclusivity_check(g));
  EXPECT_NEAR(witness_sigma(g), std::sqrt(5.0), 1e-12);
  EXPECT_GT(witness_sigma(g), independence_number(g.with_unit_weights()).value);
  EXPECT_LE(witness_sigma(g), lovasz_number(g.with_unit_weights()).value + 1e-3);

  auto bad = cycle_graph(5, 0.6);
  auto mc = is_probabilistic_model(bad);
  EXPECT_FALSE(mc.valid);
  EXPECT_FALSE(mc.violations.empty());
  EXPECT_FALSE(is_probabilistic_model(cycle_graph(5, -0.1)).valid);
}

TEST(Dot, ListsEveryEdge) {
  auto dot = to_dot(cycle_graph(5));
  std::size_t count = 0;
  for (std::size_t pos = 0; (pos = dot.find(" -- ", pos)) != std::string::npos; ++pos) ++count;
  EXPECT_EQ(count, 5u);
}
