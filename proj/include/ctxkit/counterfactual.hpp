#pragma once

// Counterfactual outcomes: a preparation induces a distribution over vectors
// c = (c_1, ..., c_m), one outcome per context. feasibility_search asks
// whether per-preparation distributions exist that reproduce given
// marginals while declared mixtures share one distribution.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ctxkit/error.hpp"
#include "ctxkit/lp.hpp"
#include "ctxkit/rational.hpp"
#include "ctxkit/scenario.hpp"

namespace ctxkit {

struct QubitState {
  std::complex<double> a0{1.0, 0.0}, a1{0.0, 0.0};

  double norm2() const { return std::norm(a0) + std::norm(a1); }
  bool valid(double tol = 1e-12) const { return std::fabs(norm2() - 1) <= tol; }
  Eigen::Matrix2cd density() const {
    Eigen::Vector2cd v(a0, a1);
    return v * v.adjoint();
  }
};

/// Two-outcome qubit measurement; outcome 0 is the projector onto `direction`.
struct QubitMeasurement {
  QubitState direction;
};

inline double born_probability(const QubitState& s, const QubitMeasurement& m) {
  return std::norm(std::conj(m.direction.a0) * s.a0 + std::conj(m.direction.a1) * s.a1);
}

inline double born_probability(const Eigen::Matrix2cd& rho, const QubitMeasurement& m) {
  return (m.direction.density() * rho).trace().real();
}

/// Outcome vectors in mixed radix over `arities`, first entry fastest.
inline std::vector<int> decode_outcome(std::uint64_t index, const std::vector<int>& arities) {
  std::vector<int> c(arities.size());
  for (std::size_t i = 0; i < arities.size(); ++i) {
    c[i] = static_cast<int>(index % static_cast<std::uint64_t>(arities[i]));
    index /= static_cast<std::uint64_t>(arities[i]);
  }
  return c;
}

inline std::uint64_t outcome_space_size(const std::vector<int>& arities,
                                        std::uint64_t cap = std::uint64_t{1} << 20) {
  std::uint64_t n = 1;
  for (int k : arities) {
    if (k < 1) fail(ErrorKind::contract, "context with no outcomes");
    n *= static_cast<std::uint64_t>(k);
    if (n > cap)
      fail(ErrorKind::too_large, "instance too large: counterfactual outcome space exceeds " +
                                     std::to_string(cap));
  }
  return n;
}

struct CounterfactualDistribution {
  std::vector<int> arities;
  std::map<std::vector<int>, double> weights;  // absent outcomes have weight 0

  double weight(const std::vector<int>& c) const {
    auto it = weights.find(c);
    return it == weights.end() ? 0.0 : it->second;
  }

  std::vector<double> marginal(std::size_t i) const {
    std::vector<double> m(static_cast<std::size_t>(arities.at(i)), 0.0);
    for (const auto& [c, w] : weights) m[static_cast<std::size_t>(c[i])] += w;
    return m;
  }
};

struct BiasResult {
  bool unbiased = true;
  std::vector<int> conditioning;  // other entries; -1 at the tested index
  std::vector<double> conditional, marginal;
};

/// mu is unbiased at i when the distribution of c_i does not depend on the
/// other entries: every conditional given an assignment of positive
/// probability matches the marginal within tol.
inline BiasResult is_unbiased(const CounterfactualDistribution& d, std::size_t i,
                              double tol = 1e-9) {
  BiasResult out;
  out.marginal = d.marginal(i);
  std::map<std::vector<int>, std::vector<double>> cond;
  for (const auto& [c, w] : d.weights) {
    auto key = c;
    key[i] = -1;
    auto& v = cond[key];
    v.resize(out.marginal.size(), 0.0);
    v[static_cast<std::size_t>(c[i])] += w;
  }
  for (auto& [key, v] : cond) {
    double total = 0;
    for (double x : v) total += x;
    if (total <= tol) continue;
    for (auto& x : v) x /= total;
    for (std::size_t k = 0; k < v.size(); ++k)
      if (std::fabs(v[k] - out.marginal[k]) > tol) {
        out.unbiased = false;
        out.conditioning = key;
        out.conditional = v;
        return out;
      }
  }
  return out;
}

struct CounterfactualInstance {
  struct Target {
    PreparationId preparation;
    std::size_t context = 0;  // index into contexts
    std::vector<Number> marginal;
  };
  struct Mixture {
    PreparationId id;
    std::vector<std::pair<PreparationId, Number>> parts;
  };

  std::vector<ContextId> contexts;
  std::vector<int> arities;  // per context; empty means all two-outcome
  std::vector<Target> targets;
  std::vector<Mixture> mixtures;
  std::vector<std::vector<PreparationId>> identify;  // groups sharing one distribution

  int arity(std::size_t i) const { return arities.empty() ? 2 : arities.at(i); }
  std::vector<int> arity_vector() const {
    std::vector<int> a;
    for (std::size_t i = 0; i < contexts.size(); ++i) a.push_back(arity(i));
    return a;
  }

  /// Preparations carrying targets, in order of first appearance.
  std::vector<PreparationId> pure_preparations() const {
    std::vector<PreparationId> out;
    for (const auto& t : targets)
      if (std::find(out.begin(), out.end(), t.preparation) == out.end())
        out.push_back(t.preparation);
    return out;
  }

  bool exact() const {
    for (const auto& t : targets)
      if (!all_exact(t.marginal)) return false;
    for (const auto& m : mixtures)
      for (const auto& [p, w] : m.parts)
        if (!w.is_exact()) return false;
    return true;
  }
};

template <class T>
struct CounterfactualLp {
  lp::Problem<T> problem;
  std::vector<std::pair<std::size_t, std::vector<int>>> variables;  // (preparation index, c)
  std::vector<std::string> row_labels;
  std::vector<PreparationId> preparations;
  std::vector<int> arities;
  std::size_t outcome_space = 0;
  std::size_t pruned = 0;
};

namespace detail {

template <class T>
T as_scalar(const Number& n) {
  if constexpr (lp::ScalarTraits<T>::exact) {
    return *n.exact;
  } else {
    return n.value;
  }
}

template <class T>
bool is_exact_zero(const Number& n) {
  if constexpr (lp::ScalarTraits<T>::exact) {
    return sgn(*n.exact) == 0;
  } else {
    return n.value == 0.0;
  }
}

inline bool is_one(const Rational& x) { return x == 1; }
inline bool is_one(double x) { return std::fabs(x - 1) <= 1e-9; }

inline std::string outcome_label(const std::vector<int>& c) {
  std::string s = "[";
  for (std::size_t i = 0; i < c.size(); ++i) s += (i ? "," : "") + std::to_string(c[i]);
  return s + "]";
}

}  // namespace detail

/// Builds the feasibility LP. Variables are nu_P(c) for each preparation
/// with targets and each counterfactual outcome c not excluded by a target
/// entry of exactly 0. Rows: normalization, the remaining target entries,
/// and for each identified group nu_A(c) = nu_B(c) for consecutive members,
/// where mixtures expand into their weighted parts.
template <class T>
CounterfactualLp<T> build_counterfactual_lp(const CounterfactualInstance& inst,
                                            std::uint64_t cap = std::uint64_t{1} << 20) {
  CounterfactualLp<T> out;
  out.arities = inst.arity_vector();
  const std::uint64_t omega = outcome_space_size(out.arities, cap);
  out.outcome_space = static_cast<std::size_t>(omega);
  out.preparations = inst.pure_preparations();
  const std::size_t np = out.preparations.size();
  auto prep_index = [&](const PreparationId& p) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < np; ++i)
      if (out.preparations[i] == p) return i;
    return std::nullopt;
  };

  for (const auto& t : inst.targets) {
    if (t.context >= inst.contexts.size())
      fail(ErrorKind::lookup, "target for \"" + t.preparation + "\" names context index " +
                                  std::to_string(t.context));
    if (t.marginal.size() != static_cast<std::size_t>(inst.arity(t.context)))
      fail(ErrorKind::structural, "target for \"" + t.preparation + "\" in \"" +
                                      inst.contexts[t.context] + "\" has wrong length");
    T sum(0);
    for (const auto& v : t.marginal) {
      if (v.value < 0) fail(ErrorKind::contract, "negative target for \"" + t.preparation + "\"");
      sum += detail::as_scalar<T>(v);
    }
    if (!detail::is_one(sum))
      fail(ErrorKind::contract, "target for \"" + t.preparation + "\" in \"" +
                                    inst.contexts[t.context] + "\" does not sum to 1");
  }

  // Support pruning.
  std::vector<std::vector<std::vector<char>>> allowed(
      np, std::vector<std::vector<char>>(inst.contexts.size()));
  for (std::size_t j = 0; j < np; ++j)
    for (std::size_t i = 0; i < inst.contexts.size(); ++i)
      allowed[j][i].assign(static_cast<std::size_t>(inst.arity(i)), 1);
  for (const auto& t : inst.targets) {
    auto j = *prep_index(t.preparation);
    for (std::size_t k = 0; k < t.marginal.size(); ++k)
      if (detail::is_exact_zero<T>(t.marginal[k])) allowed[j][t.context][k] = 0;
  }
  std::vector<std::vector<std::size_t>> var_of(np, std::vector<std::size_t>(omega, SIZE_MAX));
  for (std::size_t j = 0; j < np; ++j)
    for (std::uint64_t w = 0; w < omega; ++w) {
      auto c = decode_outcome(w, out.arities);
      bool ok = true;
      for (std::size_t i = 0; i < c.size() && ok; ++i)
        if (!allowed[j][i][static_cast<std::size_t>(c[i])]) ok = false;
      if (!ok) {
        ++out.pruned;
        continue;
      }
      var_of[j][w] = out.variables.size();
      out.variables.emplace_back(j, std::move(c));
    }

  const std::size_t nv = out.variables.size();
  out.problem = lp::Problem<T>(nv);
  auto row_for = [&](std::size_t j, auto pred) {
    std::vector<T> row(nv, T(0));
    for (std::uint64_t w = 0; w < omega; ++w)
      if (var_of[j][w] != SIZE_MAX && pred(out.variables[var_of[j][w]].second))
        row[var_of[j][w]] = T(1);
    return row;
  };
  for (std::size_t j = 0; j < np; ++j) {
    out.problem.add_eq(row_for(j, [](const auto&) { return true; }), T(1));
    out.row_labels.push_back("normalization " + out.preparations[j]);
  }
  for (const auto& t : inst.targets) {
    auto j = *prep_index(t.preparation);
    for (std::size_t k = 0; k < t.marginal.size(); ++k) {
      if (detail::is_exact_zero<T>(t.marginal[k])) continue;
      out.problem.add_eq(row_for(j, [&](const std::vector<int>& c) {
                           return c[t.context] == static_cast<int>(k);
                         }),
                         detail::as_scalar<T>(t.marginal[k]));
      out.row_labels.push_back("marginal " + t.preparation + " " + inst.contexts[t.context] +
                               "=" + std::to_string(k));
    }
  }

  // Each identified preparation as a weight vector over pure preparations.
  auto expand = [&](const PreparationId& id) {
    std::vector<T> w(np, T(0));
    if (auto j = prep_index(id)) {
      w[*j] = T(1);
      return w;
    }
    for (const auto& m : inst.mixtures) {
      if (m.id != id) continue;
      T total(0);
      for (const auto& [p, wt] : m.parts) {
        auto j = prep_index(p);
        if (!j) fail(ErrorKind::lookup, "mixture \"" + id + "\" uses unknown preparation \"" + p + "\"");
        w[*j] += detail::as_scalar<T>(wt);
        total += detail::as_scalar<T>(wt);
      }
      if (!detail::is_one(total))
        fail(ErrorKind::contract, "mixture \"" + id + "\" weights do not sum to 1");
      return w;
    }
    fail(ErrorKind::lookup, "unknown preparation \"" + id + "\"");
  };
  for (const auto& group : inst.identify) {
    for (std::size_t g = 0; g + 1 < group.size(); ++g) {
      auto wa = expand(group[g]);
      auto wb = expand(group[g + 1]);
      for (std::uint64_t w = 0; w < omega; ++w) {
        std::vector<T> row(nv, T(0));
        bool any = false;
        for (std::size_t j = 0; j < np; ++j) {
          if (var_of[j][w] == SIZE_MAX) continue;
          T coef = wa[j] - wb[j];
          if (coef == T(0)) continue;
          row[var_of[j][w]] = coef;
          any = true;
        }
        if (!any) continue;
        out.problem.add_eq(std::move(row), T(0));
        out.row_labels.push_back("identify " + group[g] + "=" + group[g + 1] + " at " +
                                 detail::outcome_label(decode_outcome(w, out.arities)));
      }
    }
  }
  return out;
}

struct CertificateEntry {
  std::string row;
  double value = 0;
  std::string exact;  // rational string when solved exactly
};

struct FeasibilityResult {
  bool feasible = false;
  bool exact = false;
  std::map<PreparationId, CounterfactualDistribution> distributions;
  std::vector<CertificateEntry> certificate;  // Farkas multipliers, nonzero rows only
  bool certificate_verified = false;
  std::size_t variables = 0, constraints = 0, outcome_space = 0, pruned = 0;
  std::size_t iterations = 0;
};

namespace detail {

template <class T>
FeasibilityResult run_counterfactual(const CounterfactualInstance& inst, std::uint64_t cap) {
  auto built = build_counterfactual_lp<T>(inst, cap);
  FeasibilityResult out;
  out.exact = lp::ScalarTraits<T>::exact;
  out.variables = built.variables.size();
  out.constraints = built.problem.eq.size();
  out.outcome_space = built.outcome_space;
  out.pruned = built.pruned;
  auto res = lp::solve(built.problem);
  out.iterations = res.iterations;
  if (res.status != lp::Status::optimal) {
    for (std::size_t i = 0; i < res.farkas_eq.size(); ++i) {
      if (res.farkas_eq[i] == T(0)) continue;
      CertificateEntry e{built.row_labels[i], 0.0, ""};
      if constexpr (lp::ScalarTraits<T>::exact) {
        e.value = res.farkas_eq[i].get_d();
        e.exact = to_string(res.farkas_eq[i]);
      } else {
        e.value = res.farkas_eq[i];
      }
      out.certificate.push_back(std::move(e));
    }
    out.certificate_verified =
        lp::verify_farkas(built.problem, res, T(lp::ScalarTraits<T>::exact ? 0 : 1e-9));
    return out;
  }
  out.feasible = true;
  for (std::size_t j = 0; j < built.preparations.size(); ++j)
    out.distributions[built.preparations[j]].arities = built.arities;
  for (std::size_t v = 0; v < built.variables.size(); ++v) {
    double w;
    if constexpr (lp::ScalarTraits<T>::exact) {
      w = res.x[v].get_d();
    } else {
      w = res.x[v];
    }
    if (w == 0.0) continue;
    const auto& [j, c] = built.variables[v];
    out.distributions[built.preparations[j]].weights[c] = w;
  }
  for (const auto& m : inst.mixtures) {
    CounterfactualDistribution d{built.arities, {}};
    for (const auto& [p, w] : m.parts)
      for (const auto& [c, x] : out.distributions[p].weights) d.weights[c] += w.value * x;
    out.distributions[m.id] = std::move(d);
  }
  return out;
}

}  // namespace detail

/// Exact rational LP when every target and mixture weight is rational,
/// floating LP otherwise. Infeasible results carry a Farkas vector over the
/// labelled rows, re-verified before returning.
inline FeasibilityResult feasibility_search(const CounterfactualInstance& inst,
                                            std::uint64_t cap = std::uint64_t{1} << 20) {
  if (inst.exact()) return detail::run_counterfactual<Rational>(inst, cap);
  return detail::run_counterfactual<double>(inst, cap);
}

struct SixStateFixture {
  std::vector<PreparationId> ids;  // P1..P6
  std::vector<QubitState> states;
  std::vector<ContextId> measurement_ids;  // M1..M3
  std::vector<QubitMeasurement> measurements;
  std::vector<std::pair<PreparationId, std::vector<std::size_t>>> composites;  // equal weights

  Eigen::Matrix2cd density(const std::vector<std::size_t>& parts) const {
    Eigen::Matrix2cd rho = Eigen::Matrix2cd::Zero();
    for (auto i : parts) rho += states[i].density();
    return rho / static_cast<double>(parts.size());
  }
};

/// Six qubit states, three two-outcome measurements and five composite
/// preparations that all give the maximally mixed state.
inline SixStateFixture six_state_fixture() {
  const double h = 0.5, r = std::sqrt(3.0) / 2;
  SixStateFixture f;
  f.ids = {"P1", "P2", "P3", "P4", "P5", "P6"};
  f.states = {{{1, 0}, {0, 0}}, {{0, 0}, {1, 0}}, {{h, 0}, {r, 0}},
              {{r, 0}, {-h, 0}}, {{h, 0}, {-r, 0}}, {{r, 0}, {h, 0}}};
  f.measurement_ids = {"M1", "M2", "M3"};
  f.measurements = {{{{1, 0}, {0, 0}}}, {{{h, 0}, {r, 0}}}, {{{h, 0}, {-r, 0}}}};
  f.composites = {{"P12", {0, 1}}, {"P34", {2, 3}}, {"P56", {4, 5}},
                  {"P135", {0, 2, 4}}, {"P246", {1, 3, 5}}};
  return f;
}

/// Counterfactual instance for the fixture: Born-rule marginals for the six
/// pure preparations (recognized as exact rationals) and every listed
/// composite identified with every other. `composites` selects a subset by
/// id; empty means all five.
inline CounterfactualInstance six_state_instance(const std::vector<PreparationId>& composites = {}) {
  auto f = six_state_fixture();
  CounterfactualInstance inst;
  inst.contexts = f.measurement_ids;
  for (std::size_t j = 0; j < f.states.size(); ++j)
    for (std::size_t i = 0; i < f.measurements.size(); ++i) {
      double p0 = born_probability(f.states[j], f.measurements[i]);
      auto q0 = recognize_rational(p0);
      if (!q0) fail(ErrorKind::internal, "fixture probability is not rational");
      inst.targets.push_back({f.ids[j], i, {Number(*q0), Number(Rational(1) - *q0)}});
    }
  std::vector<PreparationId> group;
  for (const auto& [id, parts] : f.composites) {
    if (!composites.empty() &&
        std::find(composites.begin(), composites.end(), id) == composites.end())
      continue;
    CounterfactualInstance::Mixture m{id, {}};
    for (auto j : parts) m.parts.emplace_back(f.ids[j], Number(Rational(1, static_cast<int>(parts.size()))));
    inst.mixtures.push_back(std::move(m));
    group.push_back(id);
  }
  if (group.size() >= 2) inst.identify.push_back(group);
  return inst;
}

}  // namespace ctxkit
