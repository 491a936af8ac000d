#pragma once

// Compression of a measurement-contextual model that satisfies Gleason's
// property into a non-contextual quasi model on fewer states. Epistemic
// vectors then live in S' = {v : v . (xi^{M,C1} - xi^{M,C2}) = 0 for all
// contextual pairs}; the quasi states are an orthonormal basis g_i of S'.
//
// States are scaled by the entry sums s_i = sum_j g_ij and responses by
// 1 / s_i, so that quasi states sum to 1, responses of each context sum to
// the all-ones vector and every prediction is preserved.

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ctxkit/error.hpp"
#include "ctxkit/ontmodel.hpp"

namespace ctxkit {

struct SubspaceBasis {
  std::size_t ambient = 0;
  Eigen::MatrixXd g;  // n x ambient, orthonormal rows
  std::vector<double> entry_sums;
  std::size_t size() const { return static_cast<std::size_t>(g.rows()); }
};

struct EliminatedPair {
  Event event;
  ContextId first, second;
  std::vector<double> difference;
};

struct SubspaceResult {
  SubspaceBasis basis;
  std::vector<EliminatedPair> eliminated;
};

namespace detail {

inline Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

// Responses grouped by event, in order of first appearance.
inline std::vector<std::pair<Event, std::vector<const Response*>>> responses_by_event(
    const OntologicalModel& m) {
  std::vector<std::pair<Event, std::vector<const Response*>>> out;
  for (const auto& r : m.responses) {
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& g) { return g.first == r.event; });
    if (it == out.end()) {
      out.push_back({r.event, {}});
      it = std::prev(out.end());
    }
    it->second.push_back(&r);
  }
  return out;
}

}  // namespace detail

inline constexpr double pivot_delta = 1e-8;

/// Orthonormal basis of S'. Contextual pairs are processed event by event
/// in declaration order; each pair whose difference still has a component
/// in the current subspace removes that direction.
inline SubspaceResult gleason_subspace(const OntologicalModel& m, double tol = 1e-9) {
  auto gaps = check_gleason_property(m, tol);
  if (!gaps.empty()) {
    const auto& g = gaps.front();
    fail(ErrorKind::precondition, "model violates Gleason's property: preparation \"" +
                                      g.preparation + "\", measurement \"" + g.measurement +
                                      "\", contexts \"" + g.first + "\"/\"" + g.second + "\"");
  }
  const auto x = static_cast<Eigen::Index>(m.num_ontic_states);
  Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(x, x);  // columns span the current subspace
  SubspaceResult out;
  for (const auto& [event, rs] : detail::responses_by_event(m))
    for (std::size_t i = 0; i < rs.size(); ++i)
      for (std::size_t j = i + 1; j < rs.size(); ++j) {
        Eigen::VectorXd d = detail::to_eigen(rs[i]->xi) - detail::to_eigen(rs[j]->xi);
        if (d.cwiseAbs().maxCoeff() <= tol || Q.cols() == 0) continue;
        Eigen::VectorXd coords = Q.transpose() * d;
        if (coords.norm() <= 1e-10 * d.norm()) continue;
        // Orthonormal complement of coords inside the current subspace.
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(coords);
        Eigen::MatrixXd H = qr.householderQ();
        Q = (Q * H.rightCols(Q.cols() - 1)).eval();
        out.eliminated.push_back({event, rs[i]->context, rs[j]->context, detail::to_std(d)});
      }

  Eigen::MatrixXd G = Q.transpose();
  const Eigen::Index n = G.rows();
  std::vector<double> s(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) s[static_cast<std::size_t>(i)] = G.row(i).sum();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::fabs(s[static_cast<std::size_t>(i)]) > pivot_delta) continue;
    Eigen::Index partner = -1;
    for (Eigen::Index j = 0; j < n; ++j)
      if (std::fabs(s[static_cast<std::size_t>(j)]) > pivot_delta) {
        partner = j;
        break;
      }
    if (partner < 0)
      fail(ErrorKind::degenerate, "degenerate basis: the all-ones vector is orthogonal to the "
                                  "compressed subspace, so no probability vector lies in it");
    const double c = std::sqrt(0.5);
    Eigen::VectorXd gi = G.row(i), gj = G.row(partner);
    G.row(i) = c * gi + c * gj;
    G.row(partner) = -c * gi + c * gj;
    s[static_cast<std::size_t>(i)] = G.row(i).sum();
    s[static_cast<std::size_t>(partner)] = G.row(partner).sum();
  }
  out.basis.ambient = static_cast<std::size_t>(x);
  out.basis.g = G;
  out.basis.entry_sums = s;
  return out;
}

struct ProjectedResponses {
  std::vector<std::pair<Event, std::vector<double>>> vectors;  // one per event
  double max_disagreement = 0;
  bool incident = false;  // projections of one event differ beyond tolerance
};

inline ProjectedResponses project_responses(const OntologicalModel& m, const SubspaceBasis& b,
                                            double tol = 1e-9) {
  ProjectedResponses out;
  for (const auto& [event, rs] : detail::responses_by_event(m)) {
    std::vector<Eigen::VectorXd> ps;
    for (const auto* r : rs) ps.push_back(b.g.transpose() * (b.g * detail::to_eigen(r->xi)));
    for (std::size_t i = 1; i < ps.size(); ++i)
      out.max_disagreement = std::max(out.max_disagreement, (ps[i] - ps[0]).cwiseAbs().maxCoeff());
    out.vectors.emplace_back(event, detail::to_std(ps[0]));
  }
  out.incident = out.max_disagreement > tol;
  return out;
}

struct NegativeEntry {
  std::string vector;  // preparation id or "measurement=outcome"
  std::size_t index = 0;
  double value = 0;
};

struct QuasiModel {
  std::size_t num_quasi_states = 0;
  std::size_t ambient = 0;
  std::map<PreparationId, std::vector<double>> preparations;
  std::vector<std::pair<Event, std::vector<double>>> responses;  // context-free
  std::map<ContextId, std::vector<Event>> contexts;              // events stored per context
  SubspaceBasis basis;
  std::vector<EliminatedPair> eliminated;
  std::vector<NegativeEntry> negativity;

  const std::vector<double>& response(const Event& e) const {
    for (const auto& [ev, v] : responses)
      if (ev == e) return v;
    fail(ErrorKind::lookup, "no quasi response for " + e.measurement + "=" + std::to_string(e.outcome));
  }

  double predict(const PreparationId& p, const Event& e) const {
    auto it = preparations.find(p);
    if (it == preparations.end()) fail(ErrorKind::lookup, "unknown preparation \"" + p + "\"");
    const auto& xi = response(e);
    double s = 0;
    for (std::size_t i = 0; i < xi.size(); ++i) s += it->second[i] * xi[i];
    return s;
  }
};

inline std::string event_label(const Event& e) {
  return e.measurement + "=" + std::to_string(e.outcome);
}

inline std::vector<NegativeEntry> detect_negativity(const QuasiModel& q, double tol = 1e-9) {
  std::vector<NegativeEntry> out;
  for (const auto& [p, mu] : q.preparations)
    for (std::size_t i = 0; i < mu.size(); ++i)
      if (mu[i] < -tol) out.push_back({p, i, mu[i]});
  for (const auto& [e, xi] : q.responses)
    for (std::size_t i = 0; i < xi.size(); ++i)
      if (xi[i] < -tol) out.push_back({event_label(e), i, xi[i]});
  return out;
}

inline QuasiModel build_quasi_model(const OntologicalModel& m, double tol = 1e-9) {
  auto report = validate_model(m);
  if (!report.empty())
    fail(ErrorKind::precondition, "invalid model: condition " + std::to_string(report[0].condition) +
                                      " at " + report[0].location);
  auto sub = gleason_subspace(m, tol);
  auto proj = project_responses(m, sub.basis);
  if (proj.incident) {
    std::ostringstream os;
    os << "projected responses disagree by " << proj.max_disagreement;
    fail(ErrorKind::incident, os.str());
  }
  QuasiModel q;
  q.basis = sub.basis;
  q.eliminated = std::move(sub.eliminated);
  q.ambient = m.num_ontic_states;
  q.num_quasi_states = q.basis.size();
  const auto& G = q.basis.g;
  for (const auto& [p, mu] : m.preparations) {
    Eigen::VectorXd c = G * detail::to_eigen(mu);
    for (Eigen::Index i = 0; i < c.size(); ++i) c(i) *= q.basis.entry_sums[static_cast<std::size_t>(i)];
    q.preparations[p] = detail::to_std(c);
  }
  for (const auto& [e, v] : proj.vectors) {
    Eigen::VectorXd c = G * detail::to_eigen(v);
    for (Eigen::Index i = 0; i < c.size(); ++i) c(i) /= q.basis.entry_sums[static_cast<std::size_t>(i)];
    q.responses.emplace_back(e, detail::to_std(c));
  }
  for (const auto& r : m.responses) q.contexts[r.context].push_back(r.event);
  q.negativity = detect_negativity(q, tol);
  return q;
}

struct QuasiChecks {
  double prediction_error = 0;     // max over stored (preparation, event, context)
  double state_normalization = 0;  // max |sum mu_n - 1|
  double response_completeness = 0;  // max over contexts and indices
};

inline QuasiChecks check_quasi_model(const OntologicalModel& m, const QuasiModel& q) {
  QuasiChecks c;
  for (const auto& [p, mu] : m.preparations)
    for (const auto& r : m.responses)
      c.prediction_error =
          std::max(c.prediction_error, std::fabs(q.predict(p, r.event) - predict(m, p, r.event, r.context)));
  for (const auto& [p, mu] : q.preparations) {
    double s = 0;
    for (double v : mu) s += v;
    c.state_normalization = std::max(c.state_normalization, std::fabs(s - 1));
  }
  for (const auto& [ctx, events] : q.contexts)
    for (std::size_t i = 0; i < q.num_quasi_states; ++i) {
      double s = 0;
      for (const auto& e : events) s += q.response(e)[i];
      c.response_completeness = std::max(c.response_completeness, std::fabs(s - 1));
    }
  return c;
}

}  // namespace ctxkit
