#include <gtest/gtest.h>

#include <random>

#include "ctxkit/empirical.hpp"
#include "ctxkit/fixtures.hpp"
#include "generators.hpp"

using namespace ctxkit;

namespace {

// p[x][y][a][b] from a Bell-scenario model.
struct BellTable {
  double p[2][2][2][2] = {};
  explicit BellTable(const EmpiricalModel& em) {
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y) {
        const auto& t = em.table("a" + std::to_string(x) + "b" + std::to_string(y));
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) p[x][y][a][b] = t.prob({a, b});
      }
  }
  double corr(int x, int y) const { return p[x][y][0][0] + p[x][y][1][1] - p[x][y][0][1] - p[x][y][1][0]; }
  // Fine: a no-signalling 2-2-2 table is local iff all eight CHSH forms are <= 2.
  double max_chsh() const {
    double best = -1e9;
    for (int k = 0; k < 4; ++k)
      for (int s : {1, -1}) {
        double v = 0;
        for (int x = 0; x < 2; ++x)
          for (int y = 0; y < 2; ++y) v += ((x * 2 + y) == k ? -1 : 1) * corr(x, y);
        best = std::max(best, s * v);
      }
    return best;
  }
  // support-only checks over the 16 deterministic assignments (a0, a1, b0, b1)
  bool assignment_supported(int g, int x, int y) const {
    int a = (g >> x) & 1, b = (g >> (2 + y)) & 1;
    return p[x][y][a][b] > 0;
  }
  bool strongly_contextual() const {
    for (int g = 0; g < 16; ++g) {
      bool ok = true;
      for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) ok = ok && assignment_supported(g, x, y);
      if (ok) return false;
    }
    return true;
  }
  bool possibilistically_contextual() const {
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y)
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) {
            if (p[x][y][a][b] <= 0) continue;
            bool extends = false;
            for (int g = 0; g < 16 && !extends; ++g) {
              if (((g >> x) & 1) != a || ((g >> (2 + y)) & 1) != b) continue;
              bool ok = true;
              for (int u = 0; u < 2; ++u)
                for (int v = 0; v < 2; ++v) ok = ok && assignment_supported(g, u, v);
              extends = ok;
            }
            if (!extends) return true;
          }
    return false;
  }
};

}  // namespace

TEST(Hierarchy, Fixtures) {
  EXPECT_EQ(classify_hierarchy(fixtures::pr_box()).level, Level::strong);
  EXPECT_EQ(classify_hierarchy(fixtures::chsh_tsirelson()).level, Level::probabilistic);
  EXPECT_EQ(classify_hierarchy(fixtures::classical_product()).level, Level::noncontextual);
  EXPECT_EQ(classify_hierarchy(fixtures::hardy()).level, Level::possibilistic);
}

TEST(Hierarchy, FixturesAgreeWithOracles) {
  BellTable pr(fixtures::pr_box()), q(fixtures::chsh_tsirelson()), c(fixtures::classical_product()),
      h(fixtures::hardy());
  EXPECT_NEAR(pr.max_chsh(), 4.0, 1e-12);
  EXPECT_NEAR(q.max_chsh(), 2 * std::sqrt(2.0), 1e-12);
  EXPECT_LE(c.max_chsh(), 2.0 + 1e-12);
  EXPECT_TRUE(pr.strongly_contextual());
  EXPECT_FALSE(q.possibilistically_contextual());
  EXPECT_TRUE(h.possibilistically_contextual());
  EXPECT_FALSE(h.strongly_contextual());
}

TEST(Hierarchy, CertificatesAreVerified) {
  auto pr = global_section_probabilistic(fixtures::pr_box());
  EXPECT_FALSE(pr.has_global_section);
  EXPECT_TRUE(pr.exact);
  EXPECT_TRUE(pr.certificate_verified);
  auto q = global_section_probabilistic(fixtures::chsh_tsirelson());
  EXPECT_FALSE(q.has_global_section);
  EXPECT_FALSE(q.exact);
  EXPECT_TRUE(q.certificate_verified);
}

TEST(Hierarchy, ClassicalSectionReproducesTables) {
  auto em = fixtures::classical_product();
  auto r = global_section_probabilistic(em);
  ASSERT_TRUE(r.has_global_section);
  ASSERT_TRUE(r.exact);
  const auto& s = em.scenario;
  for (const auto& c : s.contexts) {
    std::map<OutcomeTuple, double> m;
    for (const auto& [g, w] : r.weights) {
      OutcomeTuple t;
      for (const auto& mem : c.members) t.push_back(g[*s.measurement_index(mem)]);
      m[t] += w;
    }
    for (const auto& t : context_tuples(s, c)) EXPECT_NEAR(m[t], em.table(c.id).prob(t), 1e-12);
  }
}

TEST(Hierarchy, RandomNoSignallingNestingAndOracles) {
  std::mt19937_64 rng(21);
  auto bell = fixtures::bell_scenario();
  for (int i = 0; i < 200; ++i) {
    auto em = gen::random_no_signalling(rng, bell);
    ASSERT_TRUE(validate_no_disturbance(em, 1e-9).empty());
    auto v = classify_hierarchy(em);  // throws if the levels are not nested
    BellTable t(em);
    const double chsh = t.max_chsh();
    if (chsh > 2 + 1e-7) {
      EXPECT_FALSE(v.probabilistic.has_global_section) << i << " chsh " << chsh;
    }
    if (chsh < 2 - 1e-7) {
      EXPECT_TRUE(v.probabilistic.has_global_section) << i << " chsh " << chsh;
    }
    EXPECT_EQ(v.possibilistic.contextual, t.possibilistically_contextual()) << i;
    EXPECT_EQ(v.strong.strong, t.strongly_contextual()) << i;
    auto s = signed_global_section(em);
    EXPECT_TRUE(s.success) << i;
    EXPECT_LT(s.residual, 1e-8) << i;
  }
}

TEST(NoDisturbance, SignallingTableIsFlagged) {
  auto em = fixtures::classical_product();
  // Bob's marginal for b0 now depends on Alice's setting.
  auto& t = em.tables[2];  // a1b0
  ASSERT_EQ(t.context, "a1b0");
  double shift = 0.05;
  t.distribution[{0, 0}] = Number(t.prob({0, 0}) + shift);
  t.distribution[{0, 1}] = Number(t.prob({0, 1}) - shift);
  auto v = validate_no_disturbance(em);
  ASSERT_FALSE(v.empty());
  EXPECT_EQ(v[0].code, "disturbance");
  EXPECT_NEAR(v[0].gap, shift, 1e-12);
}

TEST(NoDisturbance, BadTables) {
  auto em = fixtures::pr_box();
  em.tables[0].distribution[{0, 0}] = Number(Rational(3, 4));
  auto v = validate_no_disturbance(em);
  ASSERT_FALSE(v.empty());
  EXPECT_EQ(v[0].code, "normalization");
  em = fixtures::pr_box();
  em.tables[0].distribution[{0, 2}] = Number(Rational(0));
  EXPECT_EQ(validate_no_disturbance(em)[0].code, "bad-table");
}

TEST(Format, TupleKeys) {
  EXPECT_EQ(tuple_key({0, 1, 2}), "0,1,2");
  EXPECT_EQ(tuple_key({}), "");
}

TEST(Caps, AssignmentCapIsEnforced) {
  try {
    classify_hierarchy(fixtures::pr_box(), 8);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::too_large);
  }
}

TEST(SignedSection, NegativeWeightsForContextualModels) {
  auto s = signed_global_section(fixtures::pr_box());
  ASSERT_TRUE(s.success);
  EXPECT_GT(s.negative, 0u);
  auto c = signed_global_section(fixtures::classical_product());
  ASSERT_TRUE(c.success);
  EXPECT_EQ(c.negative, 0u);
}

TEST(Induced, NoncontextualModelGivesNoncontextualTables) {
  auto m = fixtures::noncontextual_model();
  for (const auto& [p, mu] : m.preparations) {
    auto em = induced_empirical_model(m, p);
    ASSERT_TRUE(validate_no_disturbance(em).empty()) << p;
    EXPECT_EQ(classify_hierarchy(em).level, Level::noncontextual) << p;
  }
}
