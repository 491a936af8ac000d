#include <gtest/gtest.h>

#include <random>

#include "ctxkit/fixtures.hpp"
#include "ctxkit/ontmodel.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace ctxkit;

TEST(ValidateModel, FixturesAreValid) {
  EXPECT_TRUE(validate_model(fixtures::contextual_gleason_model()).empty());
  EXPECT_TRUE(validate_model(fixtures::noncontextual_model()).empty());
}

TEST(ValidateModel, RandomModelsPass) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 300; ++i) {
    auto m = gen::random_model(rng);
    auto r = validate_model(m);
    ASSERT_TRUE(r.empty()) << "model " << i << ": condition " << r[0].condition << " at " << r[0].location;
  }
}

TEST(ValidateModel, EachMutationReportsItsCondition) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 300; ++i)
    for (int c = 1; c <= 4; ++c) {
      auto m = gen::random_model(rng);
      gen::mutate(m, c, rng);
      auto r = validate_model(m);
      ASSERT_FALSE(r.empty()) << "condition " << c << " not detected";
      for (const auto& v : r) ASSERT_EQ(v.condition, c) << v.location << ": " << v.message;
    }
}

TEST(ValidateModel, Locations) {
  auto m = fixtures::contextual_gleason_model();
  m.preparations["P1"][1] = -0.5;
  m.preparations["P1"][0] = 1.0;
  auto r = validate_model(m);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].condition, 1);
  EXPECT_EQ(r[0].location, "P1[1]");

  m = fixtures::contextual_gleason_model();
  m.responses[1].xi[2] = 0.5;  // B@c1
  r = validate_model(m);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].condition, 4);
  EXPECT_EQ(r[0].location, "c1[2]");
}

TEST(ValidateModel, LengthMismatchIsStructural) {
  auto m = fixtures::contextual_gleason_model();
  m.preparations["P1"].push_back(0);
  try {
    validate_model(m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::structural);
  }
}

TEST(Predict, MatchesDotProduct) {
  auto m = fixtures::contextual_gleason_model();
  EXPECT_DOUBLE_EQ(predict(m, "P1", {"A", 0}, "c1"), 0.5);
  EXPECT_DOUBLE_EQ(predict(m, "P1", {"A", 0}, "c2"), 0.5);
  EXPECT_DOUBLE_EQ(predict(m, "P4", {"D", 0}, "c2"), 0.5);
  EXPECT_THROW(predict(m, "P9", {"A", 0}, "c1"), Error);
  EXPECT_THROW(predict(m, "P1", {"B", 0}, "c2"), Error);
}

TEST(Predict, LinearUnderMixing) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    auto m = gen::random_model(rng);
    if (m.preparations.size() < 2) continue;
    auto a = m.preparations.begin()->first, b = std::next(m.preparations.begin())->first;
    double w = std::uniform_real_distribution<double>(0, 1)(rng);
    m.preparations["mix"] = convex_mixture(m, {{a, w}, {b, 1 - w}});
    for (const auto& r : m.responses)
      EXPECT_NEAR(predict(m, "mix", r.event, r.context),
                  w * predict(m, a, r.event, r.context) + (1 - w) * predict(m, b, r.event, r.context), 1e-12);
  }
}

TEST(Mixture, BadWeightsAreContractErrors) {
  auto m = fixtures::contextual_gleason_model();
  try {
    convex_mixture(m, {{"P1", 0.5}, {"P2", 0.6}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::contract);
  }
  EXPECT_THROW(convex_mixture(m, {{"P1", 1.5}, {"P2", -0.5}}), Error);
}

TEST(MeasurementContextuality, DetectsSharedMeasurement) {
  auto d = detect_measurement_contextuality(fixtures::contextual_gleason_model());
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].measurement, "A");
  EXPECT_EQ(d[0].first, "c1");
  EXPECT_EQ(d[0].second, "c2");
  EXPECT_DOUBLE_EQ(d[0].deviation, 1.0);
  EXPECT_TRUE(detect_measurement_contextuality(fixtures::noncontextual_model()).empty());
}

TEST(GleasonProperty, HoldsOnContextualFixture) {
  EXPECT_TRUE(check_gleason_property(fixtures::contextual_gleason_model()).empty());
  auto m = fixtures::contextual_gleason_model();
  m.preparations["P5"] = {0.1, 0.2, 0.3, 0.4};
  auto g = check_gleason_property(m);
  ASSERT_EQ(g.size(), 1u);
  EXPECT_EQ(g[0].preparation, "P5");
  // (1,1,0,0).mu = 0.3 against (0,0,1,1).mu = 0.7
  EXPECT_NEAR(g[0].gap, 0.4, 1e-12);
}

TEST(PreparationContextuality, DeclaredClasses) {
  auto m = fixtures::noncontextual_model();
  // P2 = (.5,0,0,.5) and P3 = (0,.5,.5,0) give 1/2 on every response.
  std::vector<std::vector<PreparationId>> classes = {{"P2", "P3"}};
  auto d = detect_preparation_contextuality(m, classes);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_DOUBLE_EQ(d[0].deviation, 0.5);
  EXPECT_TRUE(detect_preparation_contextuality(m, {{"P1", "P1"}}).empty());
  EXPECT_THROW(detect_preparation_contextuality(m, {{"P1", "nope"}}), Error);
}

TEST(PreparationContextuality, InferredClassesAgreeOnStatistics) {
  auto m = fixtures::noncontextual_model();
  auto classes = infer_equivalence_classes(m);
  ASSERT_EQ(classes.size(), 1u);
  EXPECT_EQ(classes[0], (std::vector<PreparationId>{"P2", "P3"}));
  for (const auto& cls : classes)
    for (const auto& r : m.responses)
      for (const auto& p : cls)
        EXPECT_NEAR(predict(m, p, r.event, r.context), predict(m, cls[0], r.event, r.context), 1e-9);
}

TEST(Export, PredictionCsv) {
  auto csv = prediction_table_csv(fixtures::contextual_gleason_model());
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "preparation,context,measurement,outcome,probability");
  EXPECT_NE(csv.find("P1,c1,A,0,0.5"), std::string::npos);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 4 * 4);
}
