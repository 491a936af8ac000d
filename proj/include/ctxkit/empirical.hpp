#pragma once

// Empirical models: one joint outcome table per context. Global sections,
// the probabilistic / possibilistic / strong hierarchy, and signed
// (quasi-probability) global sections.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ctxkit/error.hpp"
#include "ctxkit/lp.hpp"
#include "ctxkit/ontmodel.hpp"
#include "ctxkit/rational.hpp"
#include "ctxkit/scenario.hpp"

namespace ctxkit {

using OutcomeTuple = std::vector<int>;

struct EmpiricalTable {
  ContextId context;
  std::map<OutcomeTuple, Number> distribution;  // missing tuples have probability 0

  double prob(const OutcomeTuple& t) const {
    auto it = distribution.find(t);
    return it == distribution.end() ? 0.0 : it->second.value;
  }
  bool supported(const OutcomeTuple& t) const { return prob(t) > 0; }
};

struct EmpiricalModel {
  Scenario scenario;
  std::vector<EmpiricalTable> tables;

  const EmpiricalTable& table(const ContextId& c) const {
    for (const auto& t : tables)
      if (t.context == c) return t;
    fail(ErrorKind::lookup, "no table for context \"" + c + "\"");
  }

  bool exact() const {
    for (const auto& t : tables)
      for (const auto& [k, v] : t.distribution)
        if (!v.is_exact()) return false;
    return true;
  }
};

inline std::string tuple_key(const OutcomeTuple& t) {
  std::string s;
  for (std::size_t i = 0; i < t.size(); ++i) s += (i ? "," : "") + std::to_string(t[i]);
  return s;
}

/// Every outcome tuple of a context, first member slowest.
inline std::vector<OutcomeTuple> context_tuples(const Scenario& s, const Context& c) {
  std::vector<OutcomeTuple> out{{}};
  for (const auto& m : c.members) {
    std::vector<OutcomeTuple> next;
    for (const auto& prefix : out)
      for (int k = 0; k < s.arity_of(m); ++k) {
        auto t = prefix;
        t.push_back(k);
        next.push_back(std::move(t));
      }
    out = std::move(next);
  }
  return out;
}

struct DisturbanceViolation {
  std::string code;  // "bad-table", "negative", "normalization", "disturbance"
  ContextId first, second;
  std::vector<MeasurementId> shared;
  double gap = 0;
  std::string message;
};

/// Table sanity (entries within arity, nonnegative, summing to 1) followed
/// by marginal agreement on every pair of intersecting contexts.
inline std::vector<DisturbanceViolation> validate_no_disturbance(const EmpiricalModel& em,
                                                                 double eps = 1e-9) {
  std::vector<DisturbanceViolation> out;
  const auto& s = em.scenario;
  for (const auto& c : s.contexts) {
    const EmpiricalTable* t = nullptr;
    for (const auto& tt : em.tables)
      if (tt.context == c.id) t = &tt;
    if (!t) {
      out.push_back({"bad-table", c.id, "", {}, 0, "no table for context \"" + c.id + "\""});
      continue;
    }
    double sum = 0;
    for (const auto& [k, v] : t->distribution) {
      bool ok = k.size() == c.members.size();
      for (std::size_t i = 0; ok && i < k.size(); ++i)
        if (k[i] < 0 || k[i] >= s.arity_of(c.members[i])) ok = false;
      if (!ok) out.push_back({"bad-table", c.id, "", {}, 0, "outcome \"" + tuple_key(k) + "\" out of range"});
      if (v.value < 0)
        out.push_back({"negative", c.id, "", {}, -v.value, "negative entry at \"" + tuple_key(k) + "\""});
      sum += v.value;
    }
    if (std::fabs(sum - 1) > eps)
      out.push_back({"normalization", c.id, "", {}, std::fabs(sum - 1), "table sums to " + std::to_string(sum)});
  }
  for (const auto& t : em.tables)
    if (!s.find_context(t.context))
      out.push_back({"bad-table", t.context, "", {}, 0, "table for undeclared context"});
  if (!out.empty()) return out;

  for (std::size_t a = 0; a < s.contexts.size(); ++a)
    for (std::size_t b = a + 1; b < s.contexts.size(); ++b) {
      const auto& ca = s.contexts[a];
      const auto& cb = s.contexts[b];
      std::vector<MeasurementId> shared;
      for (const auto& m : ca.members)
        if (cb.contains(m)) shared.push_back(m);
      if (shared.empty()) continue;
      auto marginal = [&](const Context& c) {
        std::vector<std::size_t> pos;
        for (const auto& m : shared)
          pos.push_back(static_cast<std::size_t>(
              std::find(c.members.begin(), c.members.end(), m) - c.members.begin()));
        std::map<OutcomeTuple, double> mg;
        for (const auto& [k, v] : em.table(c.id).distribution) {
          OutcomeTuple r;
          for (auto p : pos) r.push_back(k[p]);
          mg[r] += v.value;
        }
        return mg;
      };
      auto ma = marginal(ca), mb = marginal(cb);
      double gap = 0;
      for (const auto& [k, v] : ma) gap = std::max(gap, std::fabs(v - (mb.count(k) ? mb[k] : 0.0)));
      for (const auto& [k, v] : mb) gap = std::max(gap, std::fabs(v - (ma.count(k) ? ma[k] : 0.0)));
      if (gap > eps)
        out.push_back({"disturbance", ca.id, cb.id, shared, gap,
                       "marginals of \"" + ca.id + "\" and \"" + cb.id + "\" differ by " +
                           std::to_string(gap)});
    }
  return out;
}

using GlobalAssignment = std::vector<int>;  // outcome per scenario measurement

inline constexpr std::uint64_t default_assignment_cap = std::uint64_t{1} << 24;

inline std::uint64_t assignment_count(const Scenario& s, std::uint64_t cap = default_assignment_cap) {
  std::uint64_t n = 1;
  for (const auto& m : s.measurements) {
    n *= static_cast<std::uint64_t>(s.arity_of(m));
    if (n > cap)
      fail(ErrorKind::too_large, "instance too large: global assignments exceed " + std::to_string(cap));
  }
  return n;
}

namespace detail {

inline GlobalAssignment decode_assignment(const Scenario& s, std::uint64_t index) {
  GlobalAssignment g(s.measurements.size());
  for (std::size_t i = s.measurements.size(); i-- > 0;) {
    auto k = static_cast<std::uint64_t>(s.arity_of(s.measurements[i]));
    g[i] = static_cast<int>(index % k);
    index /= k;
  }
  return g;
}

struct ContextIndex {
  std::vector<std::vector<std::size_t>> members;  // scenario measurement index per member
};

inline ContextIndex index_contexts(const Scenario& s) {
  ContextIndex ci;
  for (const auto& c : s.contexts) {
    std::vector<std::size_t> idx;
    for (const auto& m : c.members) {
      auto i = s.measurement_index(m);
      if (!i) fail(ErrorKind::lookup, "context \"" + c.id + "\" references unknown measurement \"" + m + "\"");
      idx.push_back(*i);
    }
    ci.members.push_back(std::move(idx));
  }
  return ci;
}

inline OutcomeTuple restrict(const GlobalAssignment& g, const std::vector<std::size_t>& idx) {
  OutcomeTuple t;
  for (auto i : idx) t.push_back(g[i]);
  return t;
}

// Backtracking search for an assignment whose restriction to every context
// is supported. `fixed` pins some measurements (-1 = free).
inline std::optional<GlobalAssignment> find_consistent(const EmpiricalModel& em,
                                                       const ContextIndex& ci,
                                                       GlobalAssignment fixed,
                                                       std::uint64_t& nodes) {
  const auto& s = em.scenario;
  const std::size_t n = s.measurements.size();
  // Contexts become checkable once their last member (in measurement order) is set.
  std::vector<std::vector<std::size_t>> closes(n);
  for (std::size_t c = 0; c < ci.members.size(); ++c) {
    if (ci.members[c].empty()) continue;
    closes[*std::max_element(ci.members[c].begin(), ci.members[c].end())].push_back(c);
  }
  std::vector<const EmpiricalTable*> tabs;
  for (const auto& c : s.contexts) tabs.push_back(&em.table(c.id));
  GlobalAssignment g(n, 0);
  std::function<bool(std::size_t)> rec = [&](std::size_t i) -> bool {
    if (i == n) return true;
    int lo = 0, hi = s.arity_of(s.measurements[i]) - 1;
    if (fixed[i] >= 0) lo = hi = fixed[i];
    for (int k = lo; k <= hi; ++k) {
      ++nodes;
      g[i] = k;
      bool ok = true;
      for (auto c : closes[i])
        if (!tabs[c]->supported(restrict(g, ci.members[c]))) {
          ok = false;
          break;
        }
      if (ok && rec(i + 1)) return true;
    }
    return false;
  };
  if (rec(0)) return g;
  return std::nullopt;
}

}  // namespace detail

struct ProbabilisticResult {
  bool has_global_section = false;
  bool exact = false;
  std::map<GlobalAssignment, double> weights;  // nonzero weights only
  std::vector<std::pair<std::string, double>> certificate;  // Farkas rows "context:tuple"
  bool certificate_verified = false;
  std::uint64_t assignments = 0, columns = 0;
};

namespace detail {

template <class T>
T entry_as(const Number& n) {
  if constexpr (lp::ScalarTraits<T>::exact) {
    return *n.exact;
  } else {
    return n.value;
  }
}

template <class T>
ProbabilisticResult global_section_lp(const EmpiricalModel& em, std::uint64_t cap) {
  const auto& s = em.scenario;
  ProbabilisticResult out;
  out.exact = lp::ScalarTraits<T>::exact;
  out.assignments = assignment_count(s, cap);
  auto ci = index_contexts(s);

  // Columns: assignments whose every restriction is supported.
  std::vector<GlobalAssignment> cols;
  for (std::uint64_t a = 0; a < out.assignments; ++a) {
    auto g = decode_assignment(s, a);
    bool ok = true;
    for (std::size_t c = 0; c < s.contexts.size() && ok; ++c)
      if (!em.table(s.contexts[c].id).supported(restrict(g, ci.members[c]))) ok = false;
    if (ok) cols.push_back(std::move(g));
  }
  out.columns = cols.size();

  std::vector<std::string> labels;
  std::vector<std::vector<T>> rows;
  std::vector<T> rhs;
  for (std::size_t c = 0; c < s.contexts.size(); ++c) {
    const auto& tab = em.table(s.contexts[c].id);
    for (const auto& [k, v] : tab.distribution) {
      if (!(v.value > 0)) continue;
      std::vector<T> row(cols.size(), T(0));
      for (std::size_t j = 0; j < cols.size(); ++j)
        if (restrict(cols[j], ci.members[c]) == k) row[j] = T(1);
      rows.push_back(std::move(row));
      rhs.push_back(entry_as<T>(v));
      labels.push_back(s.contexts[c].id + ":" + tuple_key(k));
    }
  }
  if (static_cast<double>(rows.size()) * static_cast<double>(cols.size() + rows.size()) > 4e7)
    fail(ErrorKind::too_large, "instance too large: global-section LP has " +
                                   std::to_string(rows.size()) + " rows and " +
                                   std::to_string(cols.size()) + " columns");
  lp::Problem<T> p(cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i) p.add_eq(std::move(rows[i]), rhs[i]);
  auto r = lp::solve(p);
  if (r.status == lp::Status::optimal) {
    out.has_global_section = true;
    for (std::size_t j = 0; j < cols.size(); ++j) {
      double w;
      if constexpr (lp::ScalarTraits<T>::exact) {
        w = r.x[j].get_d();
      } else {
        w = r.x[j];
      }
      if (w != 0.0) out.weights[cols[j]] = w;
    }
    return out;
  }
  for (std::size_t i = 0; i < r.farkas_eq.size(); ++i) {
    if (r.farkas_eq[i] == T(0)) continue;
    double v;
    if constexpr (lp::ScalarTraits<T>::exact) {
      v = r.farkas_eq[i].get_d();
    } else {
      v = r.farkas_eq[i];
    }
    out.certificate.emplace_back(labels[i], v);
  }
  out.certificate_verified = lp::verify_farkas(p, r, T(lp::ScalarTraits<T>::exact ? 0 : 1e-9));
  return out;
}

}  // namespace detail

/// LP over global assignments. Assignments that restrict to an unsupported
/// outcome of some context are dropped first: a global section can never
/// weight them. Exact arithmetic when every table entry is rational.
inline ProbabilisticResult global_section_probabilistic(const EmpiricalModel& em,
                                                        std::uint64_t cap = default_assignment_cap) {
  if (em.exact()) return detail::global_section_lp<Rational>(em, cap);
  return detail::global_section_lp<double>(em, cap);
}

struct PossibilisticResult {
  bool contextual = false;
  std::optional<std::pair<ContextId, OutcomeTuple>> witness;  // supported event with no extension
  std::vector<GlobalAssignment> cover;  // consistent assignments covering every supported event
  std::uint64_t nodes = 0;
};

/// Possibilistically non-contextual iff every supported outcome of every
/// context extends to a global assignment consistent with all supports.
inline PossibilisticResult classify_possibilistic(const EmpiricalModel& em,
                                                  std::uint64_t cap = default_assignment_cap) {
  const auto& s = em.scenario;
  assignment_count(s, cap);
  auto ci = detail::index_contexts(s);
  PossibilisticResult out;
  for (std::size_t c = 0; c < s.contexts.size(); ++c)
    for (const auto& [k, v] : em.table(s.contexts[c].id).distribution) {
      if (!(v.value > 0)) continue;
      bool covered = false;
      for (const auto& g : out.cover)
        if (detail::restrict(g, ci.members[c]) == k) covered = true;
      if (covered) continue;
      GlobalAssignment fixed(s.measurements.size(), -1);
      for (std::size_t i = 0; i < k.size(); ++i) fixed[ci.members[c][i]] = k[i];
      auto g = detail::find_consistent(em, ci, fixed, out.nodes);
      if (!g) {
        out.contextual = true;
        out.witness = std::make_pair(s.contexts[c].id, k);
        out.cover.clear();
        return out;
      }
      out.cover.push_back(std::move(*g));
    }
  return out;
}

struct StrongResult {
  bool strong = false;
  std::optional<GlobalAssignment> consistent;  // witness when not strong
  std::uint64_t nodes = 0;
};

inline StrongResult classify_strong(const EmpiricalModel& em,
                                    std::uint64_t cap = default_assignment_cap) {
  const auto& s = em.scenario;
  assignment_count(s, cap);
  auto ci = detail::index_contexts(s);
  StrongResult out;
  out.consistent = detail::find_consistent(em, ci, GlobalAssignment(s.measurements.size(), -1),
                                           out.nodes);
  out.strong = !out.consistent.has_value();
  return out;
}

struct SignedSection {
  bool success = false;
  bool incident = false;  // validated model without a signed section
  std::map<GlobalAssignment, double> weights;
  double residual = 0;
  std::size_t negative = 0;
};

/// Minimum-norm real solution of "weights sum to 1 and marginals reproduce
/// every table" over all global assignments.
inline SignedSection signed_global_section(const EmpiricalModel& em, double tol = 1e-8,
                                           std::uint64_t cap = std::uint64_t{1} << 14) {
  const auto& s = em.scenario;
  const auto n = assignment_count(s, cap);
  auto ci = detail::index_contexts(s);
  std::vector<GlobalAssignment> cols;
  for (std::uint64_t a = 0; a < n; ++a) cols.push_back(detail::decode_assignment(s, a));

  std::vector<std::vector<std::size_t>> row_cols;
  std::vector<double> rhs;
  row_cols.emplace_back();
  for (std::size_t j = 0; j < cols.size(); ++j) row_cols.back().push_back(j);
  rhs.push_back(1.0);
  for (std::size_t c = 0; c < s.contexts.size(); ++c) {
    const auto& tab = em.table(s.contexts[c].id);
    std::map<OutcomeTuple, std::vector<std::size_t>> by;
    for (std::size_t j = 0; j < cols.size(); ++j)
      by[detail::restrict(cols[j], ci.members[c])].push_back(j);
    for (auto& [k, js] : by) {
      row_cols.push_back(std::move(js));
      rhs.push_back(tab.prob(k));
    }
  }
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(row_cols.size()),
                                            static_cast<Eigen::Index>(cols.size()));
  Eigen::VectorXd b(static_cast<Eigen::Index>(rhs.size()));
  for (std::size_t i = 0; i < row_cols.size(); ++i) {
    b(static_cast<Eigen::Index>(i)) = rhs[i];
    for (auto j : row_cols[i]) A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0;
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
  Eigen::VectorXd x = cod.solve(b);

  SignedSection out;
  out.residual = (A * x - b).cwiseAbs().maxCoeff();
  out.success = out.residual < tol;
  out.incident = !out.success && validate_no_disturbance(em).empty();
  if (!out.success) return out;
  for (std::size_t j = 0; j < cols.size(); ++j) {
    double w = x(static_cast<Eigen::Index>(j));
    if (std::fabs(w) < 1e-15) w = 0;
    if (w < 0) ++out.negative;
    if (w != 0) out.weights[cols[j]] = w;
  }
  return out;
}

enum class Level { noncontextual, probabilistic, possibilistic, strong };

inline const char* to_string(Level l) {
  switch (l) {
    case Level::noncontextual: return "noncontextual";
    case Level::probabilistic: return "probabilistic";
    case Level::possibilistic: return "possibilistic";
    case Level::strong: return "strong";
  }
  return "?";
}

struct HierarchyVerdict {
  Level level = Level::noncontextual;
  ProbabilisticResult probabilistic;
  PossibilisticResult possibilistic;
  StrongResult strong;
};

inline HierarchyVerdict classify_hierarchy(const EmpiricalModel& em,
                                           std::uint64_t cap = default_assignment_cap) {
  HierarchyVerdict v;
  v.probabilistic = global_section_probabilistic(em, cap);
  v.possibilistic = classify_possibilistic(em, cap);
  v.strong = classify_strong(em, cap);
  const bool prob = !v.probabilistic.has_global_section;
  const bool poss = v.possibilistic.contextual;
  const bool strong = v.strong.strong;
  if ((strong && !poss) || (poss && !prob))
    fail(ErrorKind::internal, "hierarchy verdicts are not nested");
  v.level = strong ? Level::strong
                   : poss ? Level::possibilistic
                          : prob ? Level::probabilistic : Level::noncontextual;
  return v;
}

/// Empirical model of one preparation of an ontological model. For a context
/// whose members all store every outcome, outcomes are taken independent
/// given lambda. For a context storing only outcome 0 of each member (the
/// members then partition the context), the tuple with member j at 0 and the
/// others at 1 has probability mu . xi^{j}.
inline EmpiricalModel induced_empirical_model(const OntologicalModel& m, const PreparationId& p) {
  EmpiricalModel em;
  em.scenario = m.scenario.contexts.empty() ? scenario_from_responses(m.responses) : m.scenario;
  const auto& mu = m.mu(p);
  for (const auto& c : em.scenario.contexts) {
    EmpiricalTable tab{c.id, {}};
    bool full = true, positive_only = true;
    for (const auto& mem : c.members)
      for (int k = 0; k < em.scenario.arity_of(mem); ++k) {
        bool has = m.find_response({mem, k}, c.id) != nullptr;
        if (!has) full = false;
        if (has != (k == 0)) positive_only = false;
      }
    if (full) {
      for (const auto& t : context_tuples(em.scenario, c)) {
        double pr = 0;
        for (std::size_t l = 0; l < mu.size(); ++l) {
          double q = mu[l];
          for (std::size_t i = 0; i < t.size(); ++i)
            q *= m.find_response({c.members[i], t[i]}, c.id)->xi[l];
          pr += q;
        }
        tab.distribution[t] = Number(pr);
      }
    } else if (positive_only) {
      for (std::size_t j = 0; j < c.members.size(); ++j) {
        OutcomeTuple t(c.members.size(), 1);
        t[j] = 0;
        tab.distribution[t] = Number(predict(m, p, {c.members[j], 0}, c.id));
      }
    } else {
      fail(ErrorKind::contract, "context \"" + c.id + "\" stores an incomplete set of responses");
    }
    em.tables.push_back(std::move(tab));
  }
  return em;
}

}  // namespace ctxkit
