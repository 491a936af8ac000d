#include <gtest/gtest.h>

#include <set>

#include "ctxkit/compress.hpp"
#include "ctxkit/fixtures.hpp"

using namespace ctxkit;

namespace {

std::size_t distinct_measurements(const OntologicalModel& m) {
  std::set<MeasurementId> s;
  for (const auto& r : m.responses) s.insert(r.event.measurement);
  return s.size();
}

}  // namespace

TEST(Compress, ContextualFixture) {
  auto m = fixtures::contextual_gleason_model();
  auto q = build_quasi_model(m);
  auto c = check_quasi_model(m, q);
  EXPECT_LT(c.prediction_error, 1e-10);
  EXPECT_LT(c.state_normalization, 1e-9);
  EXPECT_LT(c.response_completeness, 1e-9);
  EXPECT_EQ(q.responses.size(), distinct_measurements(m));
  EXPECT_FALSE(q.negativity.empty());
  EXPECT_EQ(q.num_quasi_states, 3u);
  ASSERT_EQ(q.eliminated.size(), 1u);
  EXPECT_EQ(q.eliminated[0].event.measurement, "A");
}

TEST(Compress, NoncontextualFixtureKeepsDimension) {
  auto m = fixtures::noncontextual_model();
  auto q = build_quasi_model(m);
  EXPECT_EQ(q.num_quasi_states, m.num_ontic_states);
  EXPECT_TRUE(q.negativity.empty());
  auto c = check_quasi_model(m, q);
  EXPECT_LT(c.prediction_error, 1e-10);
}

TEST(Compress, BasisIsOrthonormalAndOrthogonalToDifferences) {
  auto m = fixtures::contextual_gleason_model();
  auto sub = gleason_subspace(m);
  const auto& G = sub.basis.g;
  Eigen::MatrixXd I = G * G.transpose();
  EXPECT_LT((I - Eigen::MatrixXd::Identity(G.rows(), G.rows())).cwiseAbs().maxCoeff(), 1e-12);
  for (const auto& e : sub.eliminated) {
    Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(e.difference.data(), static_cast<Eigen::Index>(e.difference.size()));
    EXPECT_LT((G * d).cwiseAbs().maxCoeff(), 1e-12);
  }
  for (double s : sub.basis.entry_sums) EXPECT_GT(std::fabs(s), pivot_delta);
}

TEST(Compress, PreparationsLieInTheSubspace) {
  auto m = fixtures::contextual_gleason_model();
  auto sub = gleason_subspace(m);
  const auto& G = sub.basis.g;
  for (const auto& [p, mu] : m.preparations) {
    Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(mu.data(), static_cast<Eigen::Index>(mu.size()));
    EXPECT_LT((G.transpose() * (G * v) - v).norm(), 1e-12) << p;
  }
}

TEST(Compress, GleasonViolationIsPreconditionError) {
  auto m = fixtures::contextual_gleason_model();
  m.preparations["P5"] = {0.1, 0.2, 0.3, 0.4};
  try {
    build_quasi_model(m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::precondition);
    EXPECT_NE(std::string(e.what()).find("P5"), std::string::npos);
  }
}

TEST(Compress, InvalidModelIsRejected) {
  auto m = fixtures::contextual_gleason_model();
  m.responses[0].xi[0] = 0.5;
  EXPECT_THROW(build_quasi_model(m), Error);
}

// Six ontic states, A stored in three contexts with different responses;
// preparations are built inside the orthogonal complement of both
// differences so Gleason's property holds, and the compression drops two
// dimensions.
TEST(Compress, TwoIndependentDifferences) {
  OntologicalModel m;
  m.num_ontic_states = 6;
  std::vector<double> a1 = {1, 1, 0, 0, 1, 0}, a2 = {0, 1, 1, 0, 1, 0}, a3 = {1, 0, 1, 0, 1, 0};
  auto neg = [](std::vector<double> v) {
    for (auto& x : v) x = 1 - x;
    return v;
  };
  m.responses = {{{"A", 0}, "c1", a1}, {{"B", 0}, "c1", neg(a1)}, {{"A", 0}, "c2", a2},
                 {{"D", 0}, "c2", neg(a2)}, {{"A", 0}, "c3", a3}, {{"E", 0}, "c3", neg(a3)}};
  m.scenario = scenario_from_responses(m.responses);
  // a1 - a2 = (1,0,-1,0,0,0), a1 - a3 = (0,1,-1,0,0,0): mu_0 = mu_1 = mu_2.
  m.preparations = {{"P1", {0.1, 0.1, 0.1, 0.3, 0.2, 0.2}},
                    {"P2", {0.2, 0.2, 0.2, 0.0, 0.4, 0.0}},
                    {"P3", {0.0, 0.0, 0.0, 0.5, 0.0, 0.5}}};
  ASSERT_TRUE(validate_model(m).empty());
  ASSERT_TRUE(check_gleason_property(m).empty());
  auto q = build_quasi_model(m);
  EXPECT_EQ(q.num_quasi_states, 4u);
  EXPECT_EQ(q.eliminated.size(), 2u);
  auto c = check_quasi_model(m, q);
  EXPECT_LT(c.prediction_error, 1e-10);
  EXPECT_LT(c.state_normalization, 1e-9);
  EXPECT_LT(c.response_completeness, 1e-9);
  EXPECT_EQ(q.responses.size(), 4u);
}

TEST(Compress, Negativity) {
  QuasiModel q;
  q.preparations["P"] = {0.5, -0.25, 0.75};
  q.responses.push_back({{"A", 0}, {1.0, 0.0, -0.5}});
  auto n = detect_negativity(q);
  ASSERT_EQ(n.size(), 2u);
  EXPECT_EQ(n[0].vector, "P");
  EXPECT_EQ(n[0].index, 1u);
  EXPECT_EQ(n[1].vector, "A=0");
}
