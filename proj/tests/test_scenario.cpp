#include <gtest/gtest.h>

#include "ctxkit/graphinv.hpp"
#include "ctxkit/scenario.hpp"

using namespace ctxkit;

namespace {
Scenario make(std::vector<std::string> ms, std::vector<Context> cs) {
  Scenario s;
  s.measurements = std::move(ms);
  s.contexts = std::move(cs);
  return s;
}
}  // namespace

TEST(ValidateScenario, SingleContextIsClean) {
  auto s = make({"A", "B", "C"}, {{"c1", {"A", "B", "C"}, true}});
  EXPECT_TRUE(validate_scenario(s).empty());
}

TEST(ValidateScenario, UnknownMemberIsReported) {
  auto s = make({"A", "B", "C"}, {{"c1", {"A", "B", "D"}, false}});
  auto r = validate_scenario(s);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].code, "unknown-member");
  EXPECT_NE(r[0].subject.find("D"), std::string::npos);
}

TEST(ValidateScenario, SubsetOfMaximalContext) {
  auto s = make({"A", "B", "C"}, {{"c1", {"A", "B", "C"}, true}, {"c2", {"A", "B"}, true}});
  auto r = validate_scenario(s);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].code, "subset-of-maximal");
  EXPECT_EQ(r[0].subject, "c2<c1");
}

TEST(ValidateScenario, StructuralProblems) {
  auto s = make({"A", "A"}, {{"c1", {}, false}, {"c1", {"A", "A"}, false}});
  auto r = validate_scenario(s);
  std::vector<std::string> codes;
  for (const auto& v : r) codes.push_back(v.code);
  EXPECT_NE(std::find(codes.begin(), codes.end(), "duplicate-measurement"), codes.end());
  EXPECT_NE(std::find(codes.begin(), codes.end(), "empty-context"), codes.end());
  EXPECT_NE(std::find(codes.begin(), codes.end(), "duplicate-context"), codes.end());
  EXPECT_NE(std::find(codes.begin(), codes.end(), "duplicate-member"), codes.end());
  EXPECT_EQ(validate_scenario(make({"A"}, {})).front().code, "no-contexts");
}

TEST(SharedMeasurements, TwoContextsShareOne) {
  auto s = make({"A", "B", "C", "D", "E"},
                {{"c1", {"A", "B", "C"}, true}, {"c2", {"A", "D", "E"}, true}});
  auto sh = shared_measurements(s);
  ASSERT_EQ(sh.size(), 1u);
  EXPECT_EQ(sh[0].first, "A");
  EXPECT_EQ(sh[0].second, (std::vector<ContextId>{"c1", "c2"}));
}

TEST(SharedMeasurements, SingleContextSharesNothing) {
  auto s = make({"A", "B"}, {{"c1", {"A", "B"}, true}});
  EXPECT_TRUE(shared_measurements(s).empty());
}

TEST(SharedMeasurements, TriangleSharesEverything) {
  auto s = make({"A", "B", "C"}, {{"c1", {"A", "B"}}, {"c2", {"B", "C"}}, {"c3", {"C", "A"}}});
  auto sh = shared_measurements(s);
  ASSERT_EQ(sh.size(), 3u);
  EXPECT_EQ(sh[0].second, (std::vector<ContextId>{"c1", "c3"}));
  EXPECT_EQ(sh[1].second, (std::vector<ContextId>{"c1", "c2"}));
  EXPECT_EQ(sh[2].second, (std::vector<ContextId>{"c2", "c3"}));
}

TEST(ExclusivityGraphFromScenario, KcbsCycle) {
  auto s = make({"1", "2", "3", "4", "5"}, {{"c1", {"1", "2"}, true},
                                            {"c2", {"2", "3"}, true},
                                            {"c3", {"3", "4"}, true},
                                            {"c4", {"4", "5"}, true},
                                            {"c5", {"5", "1"}, true}});
  auto g = derive_exclusivity_graph(s);
  EXPECT_EQ(g.size(), 5u);
  EXPECT_EQ(g.edge_count(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_TRUE(g.adjacent(i, (i + 1) % 5));
    EXPECT_FALSE(g.adjacent(i, (i + 2) % 5));
    EXPECT_FALSE(g.adjacent(i, i));
  }
  EXPECT_TRUE(g.maximal_scenario());
  EXPECT_EQ(g, derive_exclusivity_graph(s));
}

TEST(ExclusivityGraphFromScenario, TriangleAndDisjointContexts) {
  auto tri = derive_exclusivity_graph(make({"A", "B", "C"}, {{"c1", {"A", "B", "C"}}}));
  EXPECT_EQ(tri.edge_count(), 3u);
  EXPECT_EQ(tri.hyperedges().size(), 1u);

  auto two = derive_exclusivity_graph(
      make({"A", "B", "C", "D"}, {{"c1", {"A", "B"}}, {"c2", {"C", "D"}}}));
  EXPECT_EQ(two.edge_count(), 2u);
  EXPECT_FALSE(two.adjacent(0, 2));
  EXPECT_FALSE(two.adjacent(1, 3));
}

TEST(ExclusivityGraphFromScenario, RejectsHigherArity) {
  auto s = make({"P", "Q"}, {{"c1", {"P", "Q"}}});
  s.arity["P"] = 3;
  try {
    derive_exclusivity_graph(s);
    FAIL() << "expected unsupported arity";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::contract);
    EXPECT_NE(std::string(e.what()).find("unsupported arity"), std::string::npos);
  }
  auto expanded = expand_to_two_outcome(s);
  EXPECT_EQ(expanded.measurements, (std::vector<MeasurementId>{"P#0", "P#1", "P#2", "Q"}));
  EXPECT_EQ(expanded.contexts[0].members, (std::vector<MeasurementId>{"P#0", "P#1", "P#2", "Q"}));
  EXPECT_TRUE(validate_scenario(expanded).empty());
  EXPECT_NO_THROW(derive_exclusivity_graph(expanded));
}
