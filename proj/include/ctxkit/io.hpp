#pragma once

// JSON file formats. Readers report the offending field path; malformed
// text is reported with line and column.

#include "json.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ctxkit/causal.hpp"
#include "ctxkit/compress.hpp"
#include "ctxkit/counterfactual.hpp"
#include "ctxkit/empirical.hpp"
#include "ctxkit/error.hpp"
#include "ctxkit/graphinv.hpp"
#include "ctxkit/marbleworld.hpp"
#include "ctxkit/ontmodel.hpp"
#include "ctxkit/rational.hpp"
#include "ctxkit/scenario.hpp"

namespace ctxkit::io {

using Json = nlohmann::ordered_json;

inline Json parse_json(const std::string& text, const std::string& source = "<input>") {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string what = e.what();
    auto pos = what.find("; ");
    fail(ErrorKind::input, source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " +
                               (pos == std::string::npos ? what : what.substr(pos + 2)));
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::input, "cannot read \"" + path + "\"");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

namespace detail {

[[noreturn]] inline void field_error(const std::string& path, const std::string& what) {
  fail(ErrorKind::input, "field '" + path + "': " + what);
}

inline std::string sub(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}
inline std::string sub(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

inline const Json& req(const Json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) field_error(path.empty() ? "<root>" : path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) field_error(sub(path, key), "missing");
  return *it;
}

inline const Json& array(const Json& j, const std::string& path) {
  if (!j.is_array()) field_error(path, "expected an array");
  return j;
}

inline std::string str(const Json& j, const std::string& path) {
  if (!j.is_string()) field_error(path, "expected a string");
  return j.get<std::string>();
}

inline long long integer(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) field_error(path, "expected an integer");
  return j.get<long long>();
}

inline double real(const Json& j, const std::string& path) {
  if (!j.is_number()) field_error(path, "expected a number");
  return j.get<double>();
}

inline bool boolean(const Json& j, const std::string& path) {
  if (!j.is_boolean()) field_error(path, "expected true or false");
  return j.get<bool>();
}

inline std::vector<double> reals(const Json& j, const std::string& path) {
  std::vector<double> out;
  std::size_t i = 0;
  for (const auto& x : array(j, path)) out.push_back(real(x, sub(path, i++)));
  return out;
}

inline std::vector<std::string> strings(const Json& j, const std::string& path) {
  std::vector<std::string> out;
  std::size_t i = 0;
  for (const auto& x : array(j, path)) out.push_back(str(x, sub(path, i++)));
  return out;
}

}  // namespace detail

/// A probability: JSON integers and "p/q" strings are exact, other
/// numbers are floating.
inline Number number_from_json(const Json& j, const std::string& path) {
  if (j.is_number_integer()) return Number(Rational(j.get<long>()));
  if (j.is_number()) return Number(j.get<double>());
  if (j.is_string()) {
    try {
      return Number(parse_rational(j.get<std::string>()));
    } catch (const Error& e) {
      detail::field_error(path, e.what());
    }
  }
  detail::field_error(path, "expected a number or a \"p/q\" string");
}

inline Json number_to_json(const Number& n) {
  if (n.exact) {
    if (n.exact->get_den() == 1) return Json(n.exact->get_num().get_si());
    return Json(to_string(*n.exact));
  }
  return Json(n.value);
}

/// The declared "kind", or one inferred from the fields present.
inline std::string kind_of(const Json& j) {
  if (!j.is_object()) detail::field_error("<root>", "expected an object");
  if (auto it = j.find("kind"); it != j.end()) return detail::str(*it, "kind");
  if (j.contains("tables")) return "empirical";
  if (j.contains("num_ontic_states")) return "model";
  if (j.contains("vertices")) return "graph";
  if (j.contains("targets")) return "counterfactual";
  if (j.contains("measurements")) return "scenario";
  fail(ErrorKind::input, "cannot tell the file's kind; add a \"kind\" field");
}

// ---- scenario -------------------------------------------------------------

inline Scenario scenario_from_json(const Json& j, const std::string& path = "") {
  using namespace detail;
  Scenario s;
  s.measurements = strings(req(j, "measurements", path), sub(path, "measurements"));
  const auto cp = sub(path, "contexts");
  std::size_t i = 0;
  for (const auto& c : array(req(j, "contexts", path), cp)) {
    auto p = sub(cp, i++);
    Context ctx;
    ctx.id = str(req(c, "id", p), sub(p, "id"));
    ctx.members = strings(req(c, "members", p), sub(p, "members"));
    if (auto it = c.find("maximal"); it != c.end()) ctx.declared_maximal = boolean(*it, sub(p, "maximal"));
    s.contexts.push_back(std::move(ctx));
  }
  if (auto it = j.find("arity"); it != j.end()) {
    if (!it->is_object()) field_error(sub(path, "arity"), "expected an object");
    for (const auto& [m, a] : it->items()) s.arity[m] = static_cast<int>(integer(a, sub(sub(path, "arity"), m)));
  }
  return s;
}

inline Json to_json(const Scenario& s) {
  Json j;
  j["measurements"] = s.measurements;
  j["contexts"] = Json::array();
  for (const auto& c : s.contexts)
    j["contexts"].push_back({{"id", c.id}, {"members", c.members}, {"maximal", c.declared_maximal}});
  if (!s.arity.empty()) {
    Json a = Json::object();
    for (const auto& [m, k] : s.arity) a[m] = k;
    j["arity"] = a;
  }
  return j;
}

inline Json to_json(const ValidationReport& r) {
  Json a = Json::array();
  for (const auto& v : r) a.push_back({{"code", v.code}, {"subject", v.subject}, {"message", v.message}});
  return a;
}

// ---- ontological model ----------------------------------------------------

inline OntologicalModel model_from_json(const Json& j) {
  using namespace detail;
  OntologicalModel m;
  auto n = integer(req(j, "num_ontic_states", ""), "num_ontic_states");
  if (n < 1) field_error("num_ontic_states", "must be at least 1");
  m.num_ontic_states = static_cast<std::size_t>(n);
  const auto& preps = req(j, "preparations", "");
  if (!preps.is_object()) field_error("preparations", "expected an object");
  for (const auto& [id, v] : preps.items()) m.preparations[id] = reals(v, "preparations." + id);
  std::size_t i = 0;
  for (const auto& r : array(req(j, "responses", ""), "responses")) {
    auto p = sub("responses", i++);
    Response resp;
    resp.event.measurement = str(req(r, "measurement", p), sub(p, "measurement"));
    resp.context = str(req(r, "context", p), sub(p, "context"));
    resp.event.outcome = r.contains("outcome") ? static_cast<int>(integer(r["outcome"], sub(p, "outcome"))) : 0;
    resp.xi = reals(req(r, "xi", p), sub(p, "xi"));
    m.responses.push_back(std::move(resp));
  }
  if (auto it = j.find("equivalence_classes"); it != j.end()) {
    std::size_t k = 0;
    for (const auto& c : array(*it, "equivalence_classes"))
      m.equivalence_classes.push_back(strings(c, sub("equivalence_classes", k++)));
  }
  m.scenario = j.contains("scenario") ? scenario_from_json(j["scenario"], "scenario")
                                      : scenario_from_responses(m.responses);
  return m;
}

inline Json to_json(const OntologicalModel& m) {
  Json j;
  j["kind"] = "model";
  j["num_ontic_states"] = m.num_ontic_states;
  j["preparations"] = Json::object();
  for (const auto& [id, mu] : m.preparations) j["preparations"][id] = mu;
  j["responses"] = Json::array();
  for (const auto& r : m.responses)
    j["responses"].push_back(
        {{"measurement", r.event.measurement}, {"context", r.context}, {"outcome", r.event.outcome}, {"xi", r.xi}});
  j["equivalence_classes"] = m.equivalence_classes;
  j["scenario"] = to_json(m.scenario);
  return j;
}

inline Json to_json(const ModelReport& r) {
  Json a = Json::array();
  for (const auto& v : r) a.push_back({{"condition", v.condition}, {"location", v.location}, {"message", v.message}});
  return a;
}

inline Json to_json(const QuasiModel& q) {
  Json j;
  j["kind"] = "quasi_model";
  j["num_ontic_states"] = q.num_quasi_states;
  j["ambient_states"] = q.ambient;
  j["preparations"] = Json::object();
  for (const auto& [id, mu] : q.preparations) j["preparations"][id] = mu;
  j["responses"] = Json::array();
  for (const auto& [e, xi] : q.responses) {
    Json ctxs = Json::array();
    for (const auto& [c, evs] : q.contexts)
      if (std::find(evs.begin(), evs.end(), e) != evs.end()) ctxs.push_back(c);
    j["responses"].push_back({{"measurement", e.measurement}, {"outcome", e.outcome}, {"contexts", ctxs}, {"xi", xi}});
  }
  j["negativity"] = Json::array();
  for (const auto& n : q.negativity)
    j["negativity"].push_back({{"vector", n.vector}, {"index", n.index}, {"value", n.value}});
  j["basis"] = Json::array();
  for (Eigen::Index i = 0; i < q.basis.g.rows(); ++i) {
    std::vector<double> row;
    for (Eigen::Index k = 0; k < q.basis.g.cols(); ++k) row.push_back(q.basis.g(i, k));
    j["basis"].push_back(row);
  }
  j["entry_sums"] = q.basis.entry_sums;
  j["eliminated"] = Json::array();
  for (const auto& e : q.eliminated)
    j["eliminated"].push_back({{"measurement", e.event.measurement},
                               {"outcome", e.event.outcome},
                               {"contexts", {e.first, e.second}}});
  return j;
}

// ---- empirical model ------------------------------------------------------

inline OutcomeTuple parse_tuple(const std::string& key, std::size_t width, const std::string& path) {
  OutcomeTuple t;
  std::stringstream ss(key);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      int v = std::stoi(part, &used);
      if (used != part.size()) throw std::invalid_argument(part);
      t.push_back(v);
    } catch (const std::exception&) {
      detail::field_error(path, "bad outcome tuple \"" + key + "\"");
    }
  }
  if (t.size() != width)
    detail::field_error(path, "tuple \"" + key + "\" has " + std::to_string(t.size()) + " entries, context has " +
                                  std::to_string(width) + " members");
  return t;
}

inline EmpiricalModel empirical_from_json(const Json& j) {
  using namespace detail;
  EmpiricalModel em;
  em.scenario = scenario_from_json(req(j, "scenario", ""), "scenario");
  std::size_t i = 0;
  for (const auto& t : array(req(j, "tables", ""), "tables")) {
    auto p = sub("tables", i++);
    EmpiricalTable tab;
    tab.context = str(req(t, "context", p), sub(p, "context"));
    const auto* ctx = em.scenario.find_context(tab.context);
    if (!ctx) field_error(sub(p, "context"), "unknown context \"" + tab.context + "\"");
    const auto& d = req(t, "distribution", p);
    if (!d.is_object()) field_error(sub(p, "distribution"), "expected an object");
    for (const auto& [k, v] : d.items()) {
      auto kp = sub(p, "distribution") + "[\"" + k + "\"]";
      tab.distribution[parse_tuple(k, ctx->members.size(), kp)] = number_from_json(v, kp);
    }
    em.tables.push_back(std::move(tab));
  }
  return em;
}

inline Json to_json(const EmpiricalModel& em) {
  Json j;
  j["kind"] = "empirical";
  j["scenario"] = to_json(em.scenario);
  j["tables"] = Json::array();
  for (const auto& t : em.tables) {
    Json d = Json::object();
    for (const auto& [k, v] : t.distribution) d[tuple_key(k)] = number_to_json(v);
    j["tables"].push_back({{"context", t.context}, {"distribution", d}});
  }
  return j;
}

inline Json assignment_json(const Scenario& s, const GlobalAssignment& g) {
  Json o = Json::object();
  for (std::size_t i = 0; i < g.size(); ++i) o[s.measurements[i]] = g[i];
  return o;
}

inline Json to_json(const HierarchyVerdict& v, const Scenario& s) {
  Json j;
  j["level"] = to_string(v.level);
  Json p;
  p["global_section"] = v.probabilistic.has_global_section;
  p["exact"] = v.probabilistic.exact;
  p["assignments"] = v.probabilistic.assignments;
  p["columns"] = v.probabilistic.columns;
  if (v.probabilistic.has_global_section) {
    p["weights"] = Json::array();
    for (const auto& [g, w] : v.probabilistic.weights)
      p["weights"].push_back({{"assignment", assignment_json(s, g)}, {"weight", w}});
  } else {
    p["certificate"] = Json::array();
    for (const auto& [row, y] : v.probabilistic.certificate) p["certificate"].push_back({{"row", row}, {"value", y}});
    p["certificate_verified"] = v.probabilistic.certificate_verified;
  }
  j["probabilistic"] = p;
  Json q;
  q["contextual"] = v.possibilistic.contextual;
  if (v.possibilistic.witness)
    q["witness"] = {{"context", v.possibilistic.witness->first}, {"outcomes", tuple_key(v.possibilistic.witness->second)}};
  q["nodes"] = v.possibilistic.nodes;
  j["possibilistic"] = q;
  Json st;
  st["strong"] = v.strong.strong;
  if (v.strong.consistent) st["consistent_assignment"] = assignment_json(s, *v.strong.consistent);
  st["nodes"] = v.strong.nodes;
  j["strong"] = st;
  return j;
}

// ---- counterfactual -------------------------------------------------------

inline CounterfactualInstance counterfactual_from_json(const Json& j) {
  using namespace detail;
  CounterfactualInstance inst;
  inst.contexts = strings(req(j, "contexts", ""), "contexts");
  if (auto it = j.find("arities"); it != j.end()) {
    std::size_t k = 0;
    for (const auto& a : array(*it, "arities")) inst.arities.push_back(static_cast<int>(integer(a, sub("arities", k++))));
    if (inst.arities.size() != inst.contexts.size()) field_error("arities", "need one arity per context");
  }
  std::size_t i = 0;
  for (const auto& t : array(req(j, "targets", ""), "targets")) {
    auto p = sub("targets", i++);
    CounterfactualInstance::Target tg;
    tg.preparation = str(req(t, "preparation", p), sub(p, "preparation"));
    auto c = str(req(t, "context", p), sub(p, "context"));
    auto pos = std::find(inst.contexts.begin(), inst.contexts.end(), c);
    if (pos == inst.contexts.end()) field_error(sub(p, "context"), "unknown context \"" + c + "\"");
    tg.context = static_cast<std::size_t>(pos - inst.contexts.begin());
    std::size_t k = 0;
    for (const auto& x : array(req(t, "marginal", p), sub(p, "marginal")))
      tg.marginal.push_back(number_from_json(x, sub(sub(p, "marginal"), k++)));
    if (static_cast<int>(tg.marginal.size()) != inst.arity(tg.context))
      field_error(sub(p, "marginal"), "length does not match the context's arity");
    inst.targets.push_back(std::move(tg));
  }
  if (auto it = j.find("mixtures"); it != j.end()) {
    std::size_t k = 0;
    for (const auto& m : array(*it, "mixtures")) {
      auto p = sub("mixtures", k++);
      CounterfactualInstance::Mixture mx;
      mx.id = str(req(m, "id", p), sub(p, "id"));
      std::size_t q = 0;
      for (const auto& part : array(req(m, "parts", p), sub(p, "parts"))) {
        auto pp = sub(sub(p, "parts"), q++);
        mx.parts.emplace_back(str(req(part, "preparation", pp), sub(pp, "preparation")),
                              number_from_json(req(part, "weight", pp), sub(pp, "weight")));
      }
      inst.mixtures.push_back(std::move(mx));
    }
  }
  if (auto it = j.find("identify"); it != j.end()) {
    std::size_t k = 0;
    for (const auto& g : array(*it, "identify")) inst.identify.push_back(strings(g, sub("identify", k++)));
  }
  return inst;
}

inline Json to_json(const CounterfactualInstance& inst) {
  Json j;
  j["kind"] = "counterfactual";
  j["contexts"] = inst.contexts;
  if (!inst.arities.empty()) j["arities"] = inst.arities;
  j["targets"] = Json::array();
  for (const auto& t : inst.targets) {
    Json m = Json::array();
    for (const auto& x : t.marginal) m.push_back(number_to_json(x));
    j["targets"].push_back({{"preparation", t.preparation}, {"context", inst.contexts[t.context]}, {"marginal", m}});
  }
  j["mixtures"] = Json::array();
  for (const auto& mx : inst.mixtures) {
    Json parts = Json::array();
    for (const auto& [p, w] : mx.parts) parts.push_back({{"preparation", p}, {"weight", number_to_json(w)}});
    j["mixtures"].push_back({{"id", mx.id}, {"parts", parts}});
  }
  j["identify"] = inst.identify;
  return j;
}

inline Json to_json(const FeasibilityResult& r) {
  Json j;
  j["verdict"] = r.feasible ? "FEASIBLE" : "INFEASIBLE";
  j["exact"] = r.exact;
  j["variables"] = r.variables;
  j["constraints"] = r.constraints;
  j["outcome_space"] = r.outcome_space;
  j["pruned_variables"] = r.pruned;
  j["iterations"] = r.iterations;
  if (r.feasible) {
    Json d = Json::object();
    for (const auto& [p, dist] : r.distributions) {
      Json w = Json::array();
      for (const auto& [c, x] : dist.weights) w.push_back({{"outcomes", c}, {"weight", x}});
      d[p] = w;
    }
    j["distributions"] = d;
  } else {
    Json c = Json::array();
    for (const auto& e : r.certificate) {
      Json row = {{"row", e.row}, {"value", e.value}};
      if (!e.exact.empty()) row["exact"] = e.exact;
      c.push_back(row);
    }
    j["certificate"] = c;
    j["certificate_verified"] = r.certificate_verified;
  }
  return j;
}

// ---- graph ----------------------------------------------------------------

inline ExclusivityGraph graph_from_json(const Json& j) {
  using namespace detail;
  std::vector<std::string> ids;
  std::vector<double> w;
  std::size_t i = 0;
  for (const auto& v : array(req(j, "vertices", ""), "vertices")) {
    auto p = sub("vertices", i++);
    ids.push_back(str(req(v, "id", p), sub(p, "id")));
    w.push_back(v.contains("weight") ? real(v["weight"], sub(p, "weight")) : 1.0);
  }
  std::vector<std::vector<std::size_t>> edges;
  if (auto it = j.find("hyperedges"); it != j.end()) {
    std::size_t k = 0;
    for (const auto& e : array(*it, "hyperedges")) {
      auto p = sub("hyperedges", k++);
      std::vector<std::size_t> idx;
      for (const auto& id : strings(e, p)) {
        auto pos = std::find(ids.begin(), ids.end(), id);
        if (pos == ids.end()) field_error(p, "unknown vertex \"" + id + "\"");
        idx.push_back(static_cast<std::size_t>(pos - ids.begin()));
      }
      edges.push_back(std::move(idx));
    }
  }
  bool maximal = j.contains("maximal") ? boolean(j["maximal"], "maximal") : false;
  return ExclusivityGraph(std::move(ids), std::move(w), std::move(edges), maximal);
}

inline Json to_json(const ExclusivityGraph& g) {
  Json j;
  j["kind"] = "graph";
  j["vertices"] = Json::array();
  for (std::size_t v = 0; v < g.size(); ++v) j["vertices"].push_back({{"id", g.ids()[v]}, {"weight", g.weights()[v]}});
  j["hyperedges"] = Json::array();
  for (const auto& e : g.hyperedges()) {
    Json ids = Json::array();
    for (auto v : e) ids.push_back(g.ids()[v]);
    j["hyperedges"].push_back(ids);
  }
  j["maximal"] = g.maximal_scenario();
  return j;
}

// ---- boxes and phenomena ---------------------------------------------------

inline BoxBehavior box_from_json(const Json& j, const std::string& path = "") {
  using namespace detail;
  BoxBehavior b;
  b.ni = static_cast<int>(integer(req(j, "inputs", path), sub(path, "inputs")));
  b.nq = j.contains("ontic") ? static_cast<int>(integer(j["ontic"], sub(path, "ontic"))) : 1;
  b.no = static_cast<int>(integer(req(j, "outputs", path), sub(path, "outputs")));
  if (b.ni < 1 || b.nq < 1 || b.no < 1) field_error(path.empty() ? "<root>" : path, "arities must be positive");
  b.deterministic = j.contains("deterministic") ? boolean(j["deterministic"], sub(path, "deterministic")) : true;
  b.cond.assign(static_cast<std::size_t>(b.ni * b.nq * b.no), 0.0);
  if (auto it = j.find("function"); it != j.end()) {
    // function[i][q] = o
    auto fp = sub(path, "function");
    if (!it->is_array() || it->size() != static_cast<std::size_t>(b.ni)) field_error(fp, "expected one row per input");
    for (int i = 0; i < b.ni; ++i) {
      const auto& row = (*it)[static_cast<std::size_t>(i)];
      auto rp = sub(fp, static_cast<std::size_t>(i));
      if (!row.is_array() || row.size() != static_cast<std::size_t>(b.nq)) field_error(rp, "expected one entry per ontic value");
      for (int q = 0; q < b.nq; ++q) {
        auto o = integer(row[static_cast<std::size_t>(q)], sub(rp, static_cast<std::size_t>(q)));
        if (o < 0 || o >= b.no) field_error(sub(rp, static_cast<std::size_t>(q)), "output out of range");
        b.cond[static_cast<std::size_t>((i * b.nq + q) * b.no + o)] = 1.0;
      }
    }
  } else {
    // table[i][q][o] = P(o | i, q)
    const auto tp = sub(path, "table");
    const auto& t = req(j, "table", path);
    for (int i = 0; i < b.ni; ++i)
      for (int q = 0; q < b.nq; ++q) {
        auto p = sub(sub(tp, static_cast<std::size_t>(i)), static_cast<std::size_t>(q));
        if (!t.is_array() || t.size() <= static_cast<std::size_t>(i) || !t[static_cast<std::size_t>(i)].is_array() ||
            t[static_cast<std::size_t>(i)].size() <= static_cast<std::size_t>(q))
          field_error(p, "missing");
        auto row = reals(t[static_cast<std::size_t>(i)][static_cast<std::size_t>(q)], p);
        if (row.size() != static_cast<std::size_t>(b.no)) field_error(p, "expected one probability per output");
        for (int o = 0; o < b.no; ++o) b.cond[static_cast<std::size_t>((i * b.nq + q) * b.no + o)] = row[static_cast<std::size_t>(o)];
      }
  }
  b.p_i = j.contains("p_input") ? reals(j["p_input"], sub(path, "p_input"))
                                : std::vector<double>(static_cast<std::size_t>(b.ni), 1.0 / b.ni);
  b.p_q = j.contains("p_ontic") ? reals(j["p_ontic"], sub(path, "p_ontic"))
                                : std::vector<double>(static_cast<std::size_t>(b.nq), 1.0 / b.nq);
  if (b.p_i.size() != static_cast<std::size_t>(b.ni)) field_error(sub(path, "p_input"), "length does not match inputs");
  if (b.p_q.size() != static_cast<std::size_t>(b.nq)) field_error(sub(path, "p_ontic"), "length does not match ontic");
  return b;
}

inline Json to_json(const BoxBehavior& b) {
  Json j;
  j["inputs"] = b.ni;
  j["ontic"] = b.nq;
  j["outputs"] = b.no;
  j["deterministic"] = b.deterministic;
  Json t = Json::array();
  for (int i = 0; i < b.ni; ++i) {
    Json row = Json::array();
    for (int q = 0; q < b.nq; ++q) {
      std::vector<double> ps;
      for (int o = 0; o < b.no; ++o) ps.push_back(b.p(o, i, q));
      row.push_back(ps);
    }
    t.push_back(row);
  }
  j["table"] = t;
  j["p_input"] = b.p_i;
  j["p_ontic"] = b.p_q;
  return j;
}

/// table[x][y][a][b] = P(a, b | x, y).
inline Phenomenon phenomenon_from_json(const Json& j) {
  using namespace detail;
  const auto& t = array(req(j, "table", ""), "table");
  Phenomenon p;
  p.nx = static_cast<int>(t.size());
  if (p.nx == 0 || !t[0].is_array() || t[0].empty() || !t[0][0].is_array() || t[0][0].empty() ||
      !t[0][0][0].is_array())
    field_error("table", "expected a four-level nested array [x][y][a][b]");
  p.ny = static_cast<int>(t[0].size());
  p.na = static_cast<int>(t[0][0].size());
  p.nb = static_cast<int>(t[0][0][0].size());
  p.table.assign(static_cast<std::size_t>(p.na * p.nb * p.nx * p.ny), 0.0);
  for (int x = 0; x < p.nx; ++x)
    for (int y = 0; y < p.ny; ++y)
      for (int a = 0; a < p.na; ++a) {
        auto path = "table[" + std::to_string(x) + "][" + std::to_string(y) + "][" + std::to_string(a) + "]";
        const auto& row = t.at(static_cast<std::size_t>(x)).at(static_cast<std::size_t>(y)).at(static_cast<std::size_t>(a));
        auto v = reals(row, path);
        if (v.size() != static_cast<std::size_t>(p.nb)) field_error(path, "ragged table");
        for (int b = 0; b < p.nb; ++b) p.at(a, b, x, y) = v[static_cast<std::size_t>(b)];
      }
  return p;
}

inline LatentModel latent_model_from_json(const Json& j) {
  using namespace detail;
  LatentModel m;
  auto n = integer(req(j, "num_states", ""), "num_states");
  if (n < 1) field_error("num_states", "must be at least 1");
  m.num_states = static_cast<std::size_t>(n);
  std::size_t i = 0;
  for (const auto& mu : array(req(j, "mu", ""), "mu")) {
    m.mu.push_back(reals(mu, sub("mu", i)));
    if (m.mu.back().size() != m.num_states) field_error(sub("mu", i), "length does not match num_states");
    ++i;
  }
  i = 0;
  for (const auto& x : array(req(j, "xi", ""), "xi")) {
    std::vector<std::vector<double>> outs;
    std::size_t a = 0;
    for (const auto& r : array(x, sub("xi", i))) {
      outs.push_back(reals(r, sub(sub("xi", i), a)));
      if (outs.back().size() != m.num_states) field_error(sub(sub("xi", i), a), "length does not match num_states");
      ++a;
    }
    m.xi.push_back(std::move(outs));
    ++i;
  }
  if (auto it = j.find("components"); it != j.end()) {
    std::size_t k = 0;
    for (const auto& c : array(*it, "components")) {
      auto p = sub("components", k++);
      m.components.push_back({str(req(c, "id", p), sub(p, "id")), reals(req(c, "mu", p), sub(p, "mu"))});
    }
  }
  if (auto it = j.find("decomposition"); it != j.end()) {
    std::size_t k = 0;
    for (const auto& r : array(*it, "decomposition")) {
      m.decomposition.push_back(reals(r, sub("decomposition", k)));
      if (m.decomposition.back().size() != m.components.size())
        field_error(sub("decomposition", k), "need one weight per component");
      ++k;
    }
    if (m.decomposition.size() != m.mu.size()) field_error("decomposition", "need one row per preparation");
  }
  return m;
}

inline Json to_json(const LatentModel& m) {
  Json j;
  j["kind"] = "latent_model";
  j["num_states"] = m.num_states;
  j["mu"] = m.mu;
  j["xi"] = m.xi;
  if (!m.components.empty()) {
    j["components"] = Json::array();
    for (const auto& c : m.components) j["components"].push_back({{"id", c.id}, {"mu", c.mu}});
    j["decomposition"] = m.decomposition;
  }
  return j;
}

inline Json to_json(const GleasonAudit& a) {
  Json j;
  j["H(O)"] = a.h_o;
  j["I(O:I)"] = a.i_oi;
  j["forced_zero"] = a.forced_zero;
  j["loop_unique"] = a.loop_unique;
  j["determinism_fails"] = a.determinism_fails;
  j["loop"] = Json::array();
  for (const auto& c : a.loop) {
    Json sol = Json::array();
    for (const auto& [x, y] : c.solutions) sol.push_back({x, y});
    j["loop"].push_back({{"qX", c.qx}, {"qY", c.qy}, {"fixed_points", to_string(c.kind)}, {"solutions", sol}});
  }
  j["steps"] = Json::array();
  for (const auto& s : a.steps)
    j["steps"].push_back({{"name", s.name}, {"lhs", s.lhs}, {"rhs", s.rhs}, {"slack", s.slack}});
  return j;
}

// ---- marble world ---------------------------------------------------------

/// "re,im" or a plain number.
inline std::complex<double> complex_from_json(const Json& j, const std::string& path) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_string()) detail::field_error(path, "expected \"re,im\" or a number");
  auto s = j.get<std::string>();
  auto comma = s.find(',');
  try {
    std::size_t u1 = 0, u2 = 0;
    if (comma == std::string::npos) {
      double re = std::stod(s, &u1);
      if (u1 != s.size()) throw std::invalid_argument(s);
      return {re, 0.0};
    }
    auto a = s.substr(0, comma), b = s.substr(comma + 1);
    double re = std::stod(a, &u1), im = std::stod(b, &u2);
    if (u1 != a.size() || u2 != b.size()) throw std::invalid_argument(s);
    return {re, im};
  } catch (const std::exception&) {
    detail::field_error(path, "bad complex number \"" + s + "\"");
  }
}

inline CVec cvec_from_json(const Json& j, const std::string& path) {
  const auto& a = detail::array(j, path);
  CVec v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = complex_from_json(a[i], detail::sub(path, i));
  return v;
}

inline Json cvec_to_json(const CVec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    std::ostringstream os;
    os.precision(17);
    os << v(i).real() << "," << v(i).imag();
    a.push_back(os.str());
  }
  return a;
}

struct MarbleConfig {
  MarbleScenario scenario;
  MarblePrior prior;
  std::string shared;  // direction name present in the first two contexts
  std::uint64_t n = 100000;
  std::uint64_t discretize = 512;
};

inline MarbleConfig marble_from_json(const Json& j) {
  using namespace detail;
  MarbleConfig cfg;
  auto d = integer(req(j, "dimension", ""), "dimension");
  if (d < 1) field_error("dimension", "must be positive");
  std::size_t i = 0;
  for (const auto& c : array(req(j, "contexts", ""), "contexts")) {
    auto p = sub("contexts", i++);
    MarbleScenario::Named nc;
    nc.id = str(req(c, "id", p), sub(p, "id"));
    nc.names = strings(req(c, "names", p), sub(p, "names"));
    std::size_t k = 0;
    for (const auto& v : array(req(c, "directions", p), sub(p, "directions"))) {
      auto vp = sub(sub(p, "directions"), k++);
      auto vec = cvec_from_json(v, vp);
      if (vec.size() != d) field_error(vp, "length does not match dimension");
      if (vec.norm() == 0) field_error(vp, "zero vector");
      nc.context.directions.push_back(vec.normalized());
    }
    cfg.scenario.contexts.push_back(std::move(nc));
  }
  const auto& pr = req(j, "prior", "");
  auto type = str(req(pr, "type", "prior"), "prior.type");
  if (type == "haar") {
    cfg.prior = MarblePrior::haar(d);
  } else if (type == "point") {
    cfg.prior = MarblePrior::point(cvec_from_json(req(pr, "state", "prior"), "prior.state"));
  } else if (type == "list") {
    std::vector<CVec> vs;
    std::size_t k = 0;
    for (const auto& v : array(req(pr, "states", "prior"), "prior.states")) vs.push_back(cvec_from_json(v, sub("prior.states", k++)));
    cfg.prior = MarblePrior::list(std::move(vs), reals(req(pr, "weights", "prior"), "prior.weights"));
  } else if (type == "gaussian") {
    cfg.prior = MarblePrior::gaussian(cvec_from_json(req(pr, "center", "prior"), "prior.center"),
                                      real(req(pr, "spread", "prior"), "prior.spread"));
  } else {
    field_error("prior.type", "expected point, haar, list or gaussian");
  }
  if (cfg.prior.dim != d) field_error("prior", "dimension does not match");
  if (j.contains("shared")) cfg.shared = str(j["shared"], "shared");
  if (j.contains("n")) {
    auto n = integer(j["n"], "n");
    if (n < 1) field_error("n", "must be at least 1");
    cfg.n = static_cast<std::uint64_t>(n);
  }
  if (j.contains("discretize")) cfg.discretize = static_cast<std::uint64_t>(integer(j["discretize"], "discretize"));
  return cfg;
}

inline Json to_json(const MarbleConfig& cfg) {
  Json j;
  j["kind"] = "marble";
  j["dimension"] = cfg.prior.dim;
  j["contexts"] = Json::array();
  for (const auto& c : cfg.scenario.contexts) {
    Json dirs = Json::array();
    for (const auto& v : c.context.directions) dirs.push_back(cvec_to_json(v));
    j["contexts"].push_back({{"id", c.id}, {"names", c.names}, {"directions", dirs}});
  }
  Json pr;
  switch (cfg.prior.kind) {
    case MarblePrior::Kind::haar: pr["type"] = "haar"; break;
    case MarblePrior::Kind::point: pr["type"] = "point"; pr["state"] = cvec_to_json(cfg.prior.states[0]); break;
    case MarblePrior::Kind::list: {
      pr["type"] = "list";
      pr["states"] = Json::array();
      for (const auto& v : cfg.prior.states) pr["states"].push_back(cvec_to_json(v));
      pr["weights"] = cfg.prior.weights;
      break;
    }
    case MarblePrior::Kind::gaussian:
      pr["type"] = "gaussian";
      pr["center"] = cvec_to_json(cfg.prior.states[0]);
      pr["spread"] = cfg.prior.spread;
      break;
  }
  j["prior"] = pr;
  if (!cfg.shared.empty()) j["shared"] = cfg.shared;
  j["n"] = cfg.n;
  j["discretize"] = cfg.discretize;
  return j;
}

}  // namespace ctxkit::io
