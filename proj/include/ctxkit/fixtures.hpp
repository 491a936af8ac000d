#pragma once

// Bundled instances used by the command-line tool and the tests.

#include <cmath>
#include <string>
#include <vector>

#include "ctxkit/causal.hpp"
#include "ctxkit/counterfactual.hpp"
#include "ctxkit/empirical.hpp"
#include "ctxkit/graphinv.hpp"
#include "ctxkit/ontmodel.hpp"
#include "ctxkit/rational.hpp"
#include "ctxkit/scenario.hpp"

namespace ctxkit::fixtures {

/// Two parties, two binary measurements each: a0 a1 for Alice, b0 b1 for Bob.
inline Scenario bell_scenario() {
  Scenario s;
  s.measurements = {"a0", "a1", "b0", "b1"};
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      auto a = "a" + std::to_string(x), b = "b" + std::to_string(y);
      s.contexts.push_back({a + b, {a, b}, true});
    }
  return s;
}

namespace detail {
template <class F>
EmpiricalModel bell_model(F entry) {
  EmpiricalModel em;
  em.scenario = bell_scenario();
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      EmpiricalTable t{"a" + std::to_string(x) + "b" + std::to_string(y), {}};
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) t.distribution[{a, b}] = entry(x, y, a, b);
      em.tables.push_back(std::move(t));
    }
  return em;
}
}  // namespace detail

/// p(a, b | x, y) = 1/2 when a xor b = x and y.
inline EmpiricalModel pr_box() {
  return detail::bell_model([](int x, int y, int a, int b) {
    return Number(((a ^ b) == (x & y)) ? Rational(1, 2) : Rational(0));
  });
}

/// Quantum correlations at the Tsirelson bound: (2 + sqrt2)/8 on the PR
/// pattern and (2 - sqrt2)/8 off it.
inline EmpiricalModel chsh_tsirelson() {
  const double hi = (2 + std::sqrt(2.0)) / 8, lo = (2 - std::sqrt(2.0)) / 8;
  return detail::bell_model(
      [=](int x, int y, int a, int b) { return Number(((a ^ b) == (x & y)) ? hi : lo); });
}

/// Independent local coins: a_x = 0 with probability pa[x], b_y = 0 with pb[y].
inline EmpiricalModel classical_product(Rational pa0 = Rational(1, 2), Rational pa1 = Rational(1, 3),
                                        Rational pb0 = Rational(1, 4), Rational pb1 = Rational(2, 3)) {
  Rational pa[2] = {pa0, pa1}, pb[2] = {pb0, pb1};
  return detail::bell_model([&](int x, int y, int a, int b) {
    Rational p = (a == 0 ? pa[x] : 1 - pa[x]) * (b == 0 ? pb[y] : 1 - pb[y]);
    return Number(p);
  });
}

/// No-signalling table with the Hardy support pattern: every outcome of
/// a0b0, no 00 in a0b1 or a1b0, no 11 in a1b1.
inline EmpiricalModel hardy() {
  static const int table[2][2][4] = {{{1, 1, 1, 4}, {0, 2, 4, 1}}, {{0, 4, 2, 1}, {1, 3, 3, 0}}};
  return detail::bell_model([](int x, int y, int a, int b) {
    return Number(Rational(table[x][y][2 * a + b], 7));
  });
}

/// Five events on a cycle, adjacent ones exclusive; each pair is a context.
inline Scenario kcbs_scenario() {
  Scenario s;
  for (int i = 1; i <= 5; ++i) s.measurements.push_back(std::to_string(i));
  for (int i = 0; i < 5; ++i)
    s.contexts.push_back({"c" + std::to_string(i + 1),
                          {s.measurements[static_cast<std::size_t>(i)],
                           s.measurements[static_cast<std::size_t>((i + 1) % 5)]},
                          true});
  return s;
}

inline ExclusivityGraph kcbs_graph() { return derive_exclusivity_graph(kcbs_scenario()); }

/// Four ontic states; A shares contexts c1 = {A, B} and c2 = {A, D} with
/// different responses, and every preparation is orthogonal to the
/// difference (1, 1, -1, -1). The four preparations are the extreme rays
/// of the allowed cone.
inline OntologicalModel contextual_gleason_model() {
  OntologicalModel m;
  m.num_ontic_states = 4;
  m.preparations = {{"P1", {0.5, 0, 0.5, 0}},
                    {"P2", {0.5, 0, 0, 0.5}},
                    {"P3", {0, 0.5, 0.5, 0}},
                    {"P4", {0, 0.5, 0, 0.5}}};
  m.responses = {{{"A", 0}, "c1", {1, 1, 0, 0}},
                 {{"B", 0}, "c1", {0, 0, 1, 1}},
                 {{"A", 0}, "c2", {0, 0, 1, 1}},
                 {{"D", 0}, "c2", {1, 1, 0, 0}}};
  m.scenario.measurements = {"A", "B", "D"};
  m.scenario.contexts = {{"c1", {"A", "B"}, true}, {"c2", {"A", "D"}, true}};
  return m;
}

/// Same scenario with context-independent responses for A.
inline OntologicalModel noncontextual_model() {
  OntologicalModel m = contextual_gleason_model();
  m.preparations["P5"] = {0.1, 0.2, 0.3, 0.4};
  m.responses = {{{"A", 0}, "c1", {1, 0, 1, 0}},
                 {{"B", 0}, "c1", {0, 1, 0, 1}},
                 {{"A", 0}, "c2", {1, 0, 1, 0}},
                 {{"D", 0}, "c2", {0, 1, 0, 1}}};
  return m;
}


/// Latent model of the six-state fixture: lambda ranges over outcome
/// triples c in {0,1}^3 for M1..M3, xi^{k,Mi}(c) = [c_i = k], each pure
/// state is the product of its Born marginals and the five composites are
/// equal-weight mixtures of their pure parts.
inline LatentModel six_state_latent_model() {
  auto f = six_state_fixture();
  LatentModel m;
  m.num_states = 8;
  m.xi.assign(3, std::vector<std::vector<double>>(2, std::vector<double>(8, 0.0)));
  for (std::size_t c = 0; c < 8; ++c)
    for (std::size_t i = 0; i < 3; ++i) m.xi[i][(c >> i) & 1][c] = 1.0;
  for (std::size_t j = 0; j < f.states.size(); ++j) {
    std::vector<double> mu(8, 1.0);
    for (std::size_t c = 0; c < 8; ++c)
      for (std::size_t i = 0; i < 3; ++i) {
        double p0 = born_probability(f.states[j], f.measurements[i]);
        mu[c] *= ((c >> i) & 1) ? 1 - p0 : p0;
      }
    m.components.push_back({f.ids[j], mu});
  }
  for (const auto& [id, parts] : f.composites) {
    std::vector<double> w(f.states.size(), 0.0), mu(8, 0.0);
    for (auto j : parts) w[j] = 1.0 / static_cast<double>(parts.size());
    for (std::size_t j = 0; j < w.size(); ++j)
      for (std::size_t c = 0; c < 8; ++c) mu[c] += w[j] * m.components[j].mu[c];
    m.mu.push_back(mu);
    m.decomposition.push_back(w);
  }
  return m;
}

/// Same responses with every preparation assigned the uniform prior.
inline LatentModel identical_prior_model() {
  auto m = six_state_latent_model();
  for (auto& mu : m.mu) mu.assign(8, 1.0 / 8);
  m.components.clear();
  m.decomposition.clear();
  return m;
}

}  // namespace ctxkit::fixtures
