#include <gtest/gtest.h>

#include <random>

#include "ctxkit/lp.hpp"
#include "oracles.hpp"

using ctxkit::Rational;
namespace lp = ctxkit::lp;

TEST(Simplex, SmallMaximisation) {
  // max 3x + 2y  s.t. x + y <= 4, x + 3y <= 6, x <= 3
  lp::Problem<Rational> p(2);
  p.objective = {3, 2};
  p.add_le({1, 1}, 4);
  p.add_le({1, 3}, 6);
  p.add_le({1, 0}, 3);
  auto r = lp::solve(p);
  ASSERT_EQ(r.status, lp::Status::optimal);
  EXPECT_EQ(r.value, Rational(11));
  EXPECT_EQ(r.x[0], Rational(3));
  EXPECT_EQ(r.x[1], Rational(1));
}

TEST(Simplex, EqualityWithNegativeRhs) {
  // -x - y = -1, x - y = 0  =>  x = y = 1/2
  lp::Problem<Rational> p(2);
  p.add_eq({-1, -1}, -1);
  p.add_eq({1, -1}, 0);
  auto r = lp::solve(p);
  ASSERT_EQ(r.status, lp::Status::optimal);
  EXPECT_EQ(r.x[0], Rational(1, 2));
  EXPECT_EQ(r.x[1], Rational(1, 2));
}

TEST(Simplex, InfeasibleCarriesFarkasCertificate) {
  // x + y = 1 and x + y = 2
  lp::Problem<Rational> p(2);
  p.add_eq({1, 1}, 1);
  p.add_eq({1, 1}, 2);
  auto r = lp::solve(p);
  ASSERT_EQ(r.status, lp::Status::infeasible);
  EXPECT_TRUE(lp::verify_farkas(p, r));

  // x >= 0 with x <= -1
  lp::Problem<Rational> q(1);
  q.add_le({1}, -1);
  auto s = lp::solve(q);
  ASSERT_EQ(s.status, lp::Status::infeasible);
  EXPECT_TRUE(lp::verify_farkas(q, s));
}

TEST(Simplex, Unbounded) {
  lp::Problem<double> p(2);
  p.objective = {1, 0};
  p.add_le({-1, 1}, 1);
  EXPECT_EQ(lp::solve(p).status, lp::Status::unbounded);
}

TEST(Simplex, RedundantRowsAreTolerated) {
  lp::Problem<Rational> p(3);
  p.add_eq({1, 1, 1}, 1);
  p.add_eq({2, 2, 2}, 2);
  p.add_eq({1, 0, 0}, Rational(1, 3));
  p.objective = {0, 1, 0};
  auto r = lp::solve(p);
  ASSERT_EQ(r.status, lp::Status::optimal);
  EXPECT_EQ(r.value, Rational(2, 3));
  EXPECT_EQ(lp::max_violation(p, r.x), Rational(0));
}

TEST(Simplex, RandomFeasibilityAgreesWithVertexEnumeration) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> coef(-2, 3);
  for (int trial = 0; trial < 300; ++trial) {
    std::size_t n = 2 + rng() % 5, m = 1 + rng() % 4;
    lp::Problem<Rational> p(n);
    lp::Problem<double> pd(n);
    oracle::RMatrix A;
    std::vector<Rational> b;
    for (std::size_t i = 0; i < m; ++i) {
      std::vector<Rational> row(n);
      std::vector<double> rowd(n);
      for (std::size_t j = 0; j < n; ++j) {
        row[j] = coef(rng);
        rowd[j] = row[j].get_d();
      }
      Rational rhs = coef(rng);
      A.push_back(row);
      b.push_back(rhs);
      p.add_eq(row, rhs);
      pd.add_eq(rowd, rhs.get_d());
    }
    auto exact = lp::solve(p);
    auto fl = lp::solve(pd);
    auto ve = oracle::enumerate_vertices(A, b);
    ASSERT_EQ(exact.status == lp::Status::optimal, ve.feasible) << "trial " << trial;
    ASSERT_EQ(fl.status == lp::Status::optimal, ve.feasible) << "trial " << trial;
    if (ve.feasible) {
      EXPECT_EQ(lp::max_violation(p, exact.x), Rational(0));
      EXPECT_LT(lp::max_violation(pd, fl.x), 1e-9);
    } else {
      EXPECT_TRUE(lp::verify_farkas(p, exact));
      EXPECT_TRUE(lp::verify_farkas(pd, fl, 1e-9));
    }
  }
}

TEST(Simplex, RowWidthIsChecked) {
  lp::Problem<double> p(2);
  EXPECT_THROW(p.add_eq({1.0}, 1.0), ctxkit::Error);
}
