#pragma once

// Finite ontological models: epistemic vectors mu_P over N ontic states and
// response vectors xi^{k,M} per (event, context).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ctxkit/error.hpp"
#include "ctxkit/scenario.hpp"

namespace ctxkit {

struct Response {
  Event event;
  ContextId context;
  std::vector<double> xi;
};

struct OntologicalModel {
  std::size_t num_ontic_states = 0;
  std::map<PreparationId, std::vector<double>> preparations;
  std::vector<Response> responses;
  std::vector<std::vector<PreparationId>> equivalence_classes;
  Scenario scenario;

  const Response* find_response(const Event& e, const ContextId& c) const {
    for (const auto& r : responses)
      if (r.event == e && r.context == c) return &r;
    return nullptr;
  }

  const std::vector<double>& mu(const PreparationId& p) const {
    auto it = preparations.find(p);
    if (it == preparations.end()) fail(ErrorKind::lookup, "unknown preparation \"" + p + "\"");
    return it->second;
  }

  /// Context ids in order of first appearance among the responses.
  std::vector<ContextId> context_ids() const {
    std::vector<ContextId> out;
    for (const auto& r : responses)
      if (std::find(out.begin(), out.end(), r.context) == out.end()) out.push_back(r.context);
    return out;
  }
};

/// Builds a scenario from the responses when none was supplied: one context
/// per context id, members in order of first appearance.
inline Scenario scenario_from_responses(const std::vector<Response>& responses) {
  Scenario s;
  for (const auto& r : responses) {
    if (!s.has_measurement(r.event.measurement)) s.measurements.push_back(r.event.measurement);
    auto it = std::find_if(s.contexts.begin(), s.contexts.end(),
                           [&](const Context& c) { return c.id == r.context; });
    if (it == s.contexts.end()) {
      s.contexts.push_back({r.context, {}, false});
      it = std::prev(s.contexts.end());
    }
    if (!it->contains(r.event.measurement)) it->members.push_back(r.event.measurement);
  }
  return s;
}

struct ModelViolation {
  int condition = 0;     // 1..4
  std::string location;  // "P", "P[3]", "ctx[2]"
  std::string message;
};

using ModelReport = std::vector<ModelViolation>;

/// Conditions: 1 mu >= 0, 2 sum mu = 1, 3 xi >= 0, 4 per context and per
/// lambda the responses of all stored events of that context sum to 1.
inline ModelReport validate_model(const OntologicalModel& m, double eps_sum = 1e-9) {
  const std::size_t n = m.num_ontic_states;
  if (n == 0) fail(ErrorKind::structural, "model has no ontic states");
  for (const auto& [p, mu] : m.preparations)
    if (mu.size() != n)
      fail(ErrorKind::structural, "preparation \"" + p + "\" has length " +
                                      std::to_string(mu.size()) + ", expected " +
                                      std::to_string(n));
  for (const auto& r : m.responses)
    if (r.xi.size() != n)
      fail(ErrorKind::structural, "response " + r.event.measurement + "=" +
                                      std::to_string(r.event.outcome) + " in \"" + r.context +
                                      "\" has length " + std::to_string(r.xi.size()) +
                                      ", expected " + std::to_string(n));

  ModelReport out;
  auto num = [](double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
  };
  for (const auto& [p, mu] : m.preparations) {
    double sum = 0;
    for (std::size_t l = 0; l < n; ++l) {
      sum += mu[l];
      if (mu[l] < 0)
        out.push_back({1, p + "[" + std::to_string(l) + "]", "negative entry " + num(mu[l])});
    }
    if (std::fabs(sum - 1) > eps_sum) out.push_back({2, p, "sums to " + num(sum)});
  }
  for (const auto& r : m.responses)
    for (std::size_t l = 0; l < n; ++l)
      if (r.xi[l] < 0)
        out.push_back({3,
                       r.event.measurement + "=" + std::to_string(r.event.outcome) + "@" +
                           r.context + "[" + std::to_string(l) + "]",
                       "negative entry " + num(r.xi[l])});
  for (const auto& c : m.context_ids()) {
    std::vector<double> total(n, 0.0);
    for (const auto& r : m.responses)
      if (r.context == c)
        for (std::size_t l = 0; l < n; ++l) total[l] += r.xi[l];
    for (std::size_t l = 0; l < n; ++l)
      if (std::fabs(total[l] - 1) > eps_sum)
        out.push_back({4, c + "[" + std::to_string(l) + "]", "responses sum to " + num(total[l])});
  }
  return out;
}

inline double predict(const OntologicalModel& m, const PreparationId& p, const Event& e,
                      const ContextId& c) {
  const auto* r = m.find_response(e, c);
  if (!r)
    fail(ErrorKind::lookup, "no response for " + e.measurement + "=" + std::to_string(e.outcome) +
                                " in context \"" + c + "\"");
  const auto& mu = m.mu(p);
  double s = 0;
  for (std::size_t l = 0; l < mu.size(); ++l) s += mu[l] * r->xi[l];
  return s;
}

struct MeasurementDeviation {
  MeasurementId measurement;
  ContextId first, second;
  double deviation = 0;
};

namespace detail {
inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::fabs(a[i] - b[i]));
  return d;
}

// Responses for the positive outcome of each measurement, grouped by
// measurement, in order of first appearance.
inline std::vector<std::pair<MeasurementId, std::vector<const Response*>>> positive_responses(
    const OntologicalModel& m) {
  std::vector<std::pair<MeasurementId, std::vector<const Response*>>> out;
  for (const auto& r : m.responses) {
    if (r.event.outcome != 0) continue;
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const auto& g) { return g.first == r.event.measurement; });
    if (it == out.end()) {
      out.push_back({r.event.measurement, {}});
      it = std::prev(out.end());
    }
    it->second.push_back(&r);
  }
  return out;
}
}  // namespace detail

/// Shared measurements whose positive-outcome response differs between two
/// contexts by more than tol in some entry.
inline std::vector<MeasurementDeviation> detect_measurement_contextuality(
    const OntologicalModel& m, double tol = 1e-9) {
  std::vector<MeasurementDeviation> out;
  for (const auto& [meas, rs] : detail::positive_responses(m))
    for (std::size_t i = 0; i < rs.size(); ++i)
      for (std::size_t j = i + 1; j < rs.size(); ++j) {
        double d = detail::max_abs_diff(rs[i]->xi, rs[j]->xi);
        if (d > tol) out.push_back({meas, rs[i]->context, rs[j]->context, d});
      }
  return out;
}

struct PreparationDeviation {
  std::size_t class_index = 0;
  PreparationId first, second;
  double deviation = 0;
};

inline std::vector<PreparationDeviation> detect_preparation_contextuality(
    const OntologicalModel& m, const std::vector<std::vector<PreparationId>>& classes,
    double tol = 1e-9) {
  std::vector<PreparationDeviation> out;
  for (std::size_t k = 0; k < classes.size(); ++k) {
    const auto& cls = classes[k];
    for (const auto& p : cls) m.mu(p);
    for (std::size_t i = 0; i < cls.size(); ++i)
      for (std::size_t j = i + 1; j < cls.size(); ++j) {
        double d = detail::max_abs_diff(m.mu(cls[i]), m.mu(cls[j]));
        if (d > tol) out.push_back({k, cls[i], cls[j], d});
      }
  }
  return out;
}

struct GleasonGap {
  PreparationId preparation;
  MeasurementId measurement;
  ContextId first, second;
  double gap = 0;
};

/// Every (preparation, shared measurement, context pair) whose positive-outcome
/// probability depends on the context by more than tol.
inline std::vector<GleasonGap> check_gleason_property(const OntologicalModel& m,
                                                      double tol = 1e-9) {
  std::vector<GleasonGap> out;
  auto groups = detail::positive_responses(m);
  for (const auto& [p, mu] : m.preparations)
    for (const auto& [meas, rs] : groups)
      for (std::size_t i = 0; i < rs.size(); ++i)
        for (std::size_t j = i + 1; j < rs.size(); ++j) {
          double a = 0, b = 0;
          for (std::size_t l = 0; l < mu.size(); ++l) {
            a += mu[l] * rs[i]->xi[l];
            b += mu[l] * rs[j]->xi[l];
          }
          if (std::fabs(a - b) > tol) out.push_back({p, meas, rs[i]->context, rs[j]->context,
                                                      std::fabs(a - b)});
        }
  return out;
}

inline std::vector<double> convex_mixture(const OntologicalModel& m,
                                          const std::vector<std::pair<PreparationId, double>>& parts,
                                          double eps_sum = 1e-9) {
  double total = 0;
  for (const auto& [p, w] : parts) {
    if (w < 0) fail(ErrorKind::contract, "negative mixture weight for \"" + p + "\"");
    total += w;
  }
  if (std::fabs(total - 1) > eps_sum)
    fail(ErrorKind::contract, "mixture weights sum to " + std::to_string(total));
  std::vector<double> out(m.num_ontic_states, 0.0);
  for (const auto& [p, w] : parts) {
    const auto& mu = m.mu(p);
    for (std::size_t l = 0; l < out.size(); ++l) out[l] += w * mu[l];
  }
  return out;
}

/// Groups preparations whose predictions agree within tol on every stored
/// response. Only groups of two or more are returned. A convenience; the
/// analyses take declared classes.
inline std::vector<std::vector<PreparationId>> infer_equivalence_classes(const OntologicalModel& m,
                                                                         double tol = 1e-9) {
  std::vector<std::pair<PreparationId, std::vector<double>>> stats;
  for (const auto& [p, mu] : m.preparations) {
    std::vector<double> row;
    for (const auto& r : m.responses) row.push_back(predict(m, p, r.event, r.context));
    stats.emplace_back(p, std::move(row));
  }
  std::vector<std::vector<PreparationId>> groups;
  std::vector<const std::vector<double>*> reps;
  for (const auto& [p, row] : stats) {
    bool placed = false;
    for (std::size_t g = 0; g < groups.size() && !placed; ++g)
      if (detail::max_abs_diff(*reps[g], row) <= tol) {
        groups[g].push_back(p);
        placed = true;
      }
    if (!placed) {
      groups.push_back({p});
      reps.push_back(&row);
    }
  }
  std::vector<std::vector<PreparationId>> out;
  for (auto& g : groups)
    if (g.size() >= 2) out.push_back(std::move(g));
  return out;
}

/// Prediction table as CSV: preparation,context,measurement,outcome,probability.
inline std::string prediction_table_csv(const OntologicalModel& m) {
  std::ostringstream os;
  os.precision(17);
  os << "preparation,context,measurement,outcome,probability\n";
  for (const auto& [p, mu] : m.preparations)
    for (const auto& r : m.responses)
      os << p << "," << r.context << "," << r.event.measurement << "," << r.event.outcome << ","
         << predict(m, p, r.event, r.context) << "\n";
  return os.str();
}

}  // namespace ctxkit
