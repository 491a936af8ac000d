#pragma once

// Contextuality scenarios: measurements, outcome arities and contexts
// (hyperedges of jointly performable measurements).

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ctxkit/error.hpp"

namespace ctxkit {

using MeasurementId = std::string;
using ContextId = std::string;
using PreparationId = std::string;

struct Context {
  ContextId id;
  std::vector<MeasurementId> members;
  bool declared_maximal = false;

  bool contains(const MeasurementId& m) const {
    return std::find(members.begin(), members.end(), m) != members.end();
  }
};

/// A measurement outcome. Outcome 0 is the "positive" outcome of a two-outcome
/// test and is the one identified with a vertex of the exclusivity graph.
struct Event {
  MeasurementId measurement;
  int outcome = 0;

  friend bool operator==(const Event&, const Event&) = default;
  friend auto operator<=>(const Event&, const Event&) = default;
};

struct Scenario {
  std::vector<MeasurementId> measurements;  // declaration order
  std::vector<Context> contexts;            // declaration order
  std::map<MeasurementId, int> arity;       // absent => 2

  int arity_of(const MeasurementId& m) const {
    auto it = arity.find(m);
    return it == arity.end() ? 2 : it->second;
  }

  bool has_measurement(const MeasurementId& m) const {
    return std::find(measurements.begin(), measurements.end(), m) != measurements.end();
  }

  std::optional<std::size_t> measurement_index(const MeasurementId& m) const {
    auto it = std::find(measurements.begin(), measurements.end(), m);
    if (it == measurements.end()) return std::nullopt;
    return static_cast<std::size_t>(it - measurements.begin());
  }

  const Context* find_context(const ContextId& id) const {
    for (const auto& c : contexts)
      if (c.id == id) return &c;
    return nullptr;
  }

  const Context& context(const ContextId& id) const {
    if (const auto* c = find_context(id)) return *c;
    fail(ErrorKind::lookup, "unknown context \"" + id + "\"");
  }
};

struct Violation {
  std::string code;     // stable machine-readable tag, e.g. "unknown-member"
  std::string subject;  // offending context / measurement id(s)
  std::string message;
};

using ValidationReport = std::vector<Violation>;

namespace detail {
inline bool strict_subset(const std::vector<MeasurementId>& a,
                          const std::vector<MeasurementId>& b) {
  if (a.size() >= b.size()) return false;
  for (const auto& m : a)
    if (std::find(b.begin(), b.end(), m) == b.end()) return false;
  return true;
}
}  // namespace detail

inline ValidationReport validate_scenario(const Scenario& s) {
  ValidationReport out;
  std::set<MeasurementId> seen;
  for (const auto& m : s.measurements) {
    if (m.empty()) out.push_back({"empty-id", m, "measurement with empty id"});
    if (!seen.insert(m).second)
      out.push_back({"duplicate-measurement", m, "measurement \"" + m + "\" declared twice"});
  }
  for (const auto& [m, k] : s.arity) {
    if (!s.has_measurement(m))
      out.push_back({"unknown-arity", m, "arity given for undeclared measurement \"" + m + "\""});
    if (k < 1)
      out.push_back({"bad-arity", m, "measurement \"" + m + "\" has non-positive arity"});
  }
  if (s.contexts.empty()) out.push_back({"no-contexts", "", "scenario declares no contexts"});

  std::set<ContextId> ids;
  for (const auto& c : s.contexts) {
    if (!ids.insert(c.id).second)
      out.push_back({"duplicate-context", c.id, "context id \"" + c.id + "\" declared twice"});
    if (c.members.empty())
      out.push_back({"empty-context", c.id, "context \"" + c.id + "\" has no members"});
    std::set<MeasurementId> members;
    for (const auto& m : c.members) {
      if (!members.insert(m).second)
        out.push_back({"duplicate-member", c.id + ":" + m,
                       "context \"" + c.id + "\" lists \"" + m + "\" twice"});
      if (!s.has_measurement(m))
        out.push_back({"unknown-member", c.id + ":" + m,
                       "context \"" + c.id + "\" references unknown measurement \"" + m + "\""});
    }
  }
  for (const auto& big : s.contexts) {
    if (!big.declared_maximal) continue;
    for (const auto& small : s.contexts) {
      if (&small == &big) continue;
      if (detail::strict_subset(small.members, big.members))
        out.push_back({"subset-of-maximal", small.id + "<" + big.id,
                       "context \"" + small.id + "\" is a strict subset of maximal context \"" +
                           big.id + "\""});
    }
  }
  return out;
}

/// Measurements occurring in two or more contexts, with the ids of those
/// contexts in declaration order. Iteration order follows the measurement
/// declaration order of the scenario.
inline std::vector<std::pair<MeasurementId, std::vector<ContextId>>> shared_measurements(
    const Scenario& s) {
  std::vector<std::pair<MeasurementId, std::vector<ContextId>>> out;
  for (const auto& m : s.measurements) {
    std::vector<ContextId> where;
    for (const auto& c : s.contexts)
      if (c.contains(m)) where.push_back(c.id);
    if (where.size() >= 2) out.emplace_back(m, std::move(where));
  }
  return out;
}

/// Replaces every measurement of arity k > 2 by k two-outcome tests "m#j"
/// (outcome 0 of "m#j" is outcome j of m). Each context containing m receives
/// all k tests, so the tests of one measurement are mutually compatible.
inline Scenario expand_to_two_outcome(const Scenario& s) {
  Scenario out;
  std::map<MeasurementId, std::vector<MeasurementId>> repl;
  for (const auto& m : s.measurements) {
    int k = s.arity_of(m);
    if (k <= 2) {
      out.measurements.push_back(m);
      if (s.arity.count(m)) out.arity[m] = k;
      repl[m] = {m};
      continue;
    }
    for (int j = 0; j < k; ++j) {
      auto id = m + "#" + std::to_string(j);
      out.measurements.push_back(id);
      repl[m].push_back(id);
    }
  }
  for (const auto& c : s.contexts) {
    Context nc{c.id, {}, c.declared_maximal};
    for (const auto& m : c.members) {
      auto it = repl.find(m);
      if (it == repl.end()) {
        nc.members.push_back(m);
        continue;
      }
      for (const auto& r : it->second) nc.members.push_back(r);
    }
    out.contexts.push_back(std::move(nc));
  }
  return out;
}

}  // namespace ctxkit
