// ctxkit: command-line front end.
//
// Exit codes: 0 success, 1 domain verdict (invalid input model, failed
// premise), 2 input error, 3 resource cap.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ctxkit/bundled.hpp"
#include "ctxkit/ctxkit.hpp"

using namespace ctxkit;
using io::Json;

namespace {

struct Options {
  double tol = 1e-9;
  std::uint64_t seed = 1;
  std::string format = "json";
  std::string dot;
  std::uint64_t cap = 0;  // 0: module default
  unsigned jobs = 1;
  bool timing = false;
};

struct Input {
  Json doc;
  std::string digest;
};

// "fixture:NAME" resolves a bundled document.
// The digest is set before parsing so that error reports carry it too.
Input load(const std::string& arg, std::string& digest) {
  if (arg.rfind("fixture:", 0) == 0) {
    auto doc = bundled::document(arg.substr(8));
    digest = report::digest(doc.dump(2) + "\n");
    return {doc, digest};
  }
  auto text = io::read_file(arg);
  digest = report::digest(text);
  return {io::parse_json(text, arg), digest};
}

struct Outcome {
  Json result;
  int exit = 0;
};

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::input:
    case ErrorKind::structural:
    case ErrorKind::lookup: return 2;
    case ErrorKind::too_large:
    case ErrorKind::not_converged: return 3;
    default: return 1;
  }
}

Json deviations(const std::vector<MeasurementDeviation>& ds) {
  Json a = Json::array();
  for (const auto& d : ds)
    a.push_back({{"measurement", d.measurement}, {"contexts", {d.first, d.second}}, {"deviation", d.deviation}});
  return a;
}

Json gaps(const std::vector<GleasonGap>& gs) {
  Json a = Json::array();
  for (const auto& g : gs)
    a.push_back({{"preparation", g.preparation},
                 {"measurement", g.measurement},
                 {"contexts", {g.first, g.second}},
                 {"gap", g.gap}});
  return a;
}

Json split_json(const EntropySplit& s) {
  return {{"H(O)", s.h_o}, {"I(O:I)", s.i_oi}, {"I(OI:Q)", s.i_oiq}, {"residual", s.residual}};
}

Json factorisable_json(const FactorisableVerdict& v) {
  Json j;
  j["verdict"] = v.verdict;
  j["reproduces"] = v.reproduces;
  j["no_disturbance"] = v.no_disturbance;
  j["factorisable"] = v.factorisable;
  j["fine_tuned"] = v.fine_tuned;
  if (v.prior) {
    j["prior"] = *v.prior;
    j["prior_residual"] = v.prior_residual;
  }
  j["preparation_independent_alternative"] = v.alternative_exists;
  j["exact"] = v.exact;
  return j;
}

Outcome cmd_validate(const Input& in, const Options& o) {
  const auto kind = io::kind_of(in.doc);
  Outcome out;
  out.result["kind"] = kind;
  if (kind == "scenario") {
    auto r = validate_scenario(io::scenario_from_json(in.doc));
    out.result["violations"] = io::to_json(r);
    out.exit = r.empty() ? 0 : 1;
  } else if (kind == "model") {
    auto m = io::model_from_json(in.doc);
    auto r = validate_model(m, o.tol);
    out.result["conditions"] = io::to_json(r);
    if (!r.empty()) {
      out.exit = 1;
      return out;
    }
    out.result["measurement_contextuality"] = deviations(detect_measurement_contextuality(m, o.tol));
    out.result["gleason_gaps"] = gaps(check_gleason_property(m, o.tol));
    Json prep = Json::array();
    for (const auto& d : detect_preparation_contextuality(m, m.equivalence_classes, o.tol))
      prep.push_back({{"class", d.class_index}, {"preparations", {d.first, d.second}}, {"deviation", d.deviation}});
    out.result["preparation_contextuality"] = prep;
  } else if (kind == "empirical") {
    auto em = io::empirical_from_json(in.doc);
    Json a = Json::array();
    for (const auto& v : validate_no_disturbance(em, o.tol))
      a.push_back({{"code", v.code}, {"contexts", {v.first, v.second}}, {"shared", v.shared}, {"gap", v.gap},
                   {"message", v.message}});
    out.exit = a.empty() ? 0 : 1;
    out.result["violations"] = a;
  } else if (kind == "graph") {
    auto c = is_probabilistic_model(io::graph_from_json(in.doc), o.tol);
    out.result["violations"] = c.violations;
    out.exit = c.valid ? 0 : 1;
  } else if (kind == "counterfactual") {
    auto inst = io::counterfactual_from_json(in.doc);
    out.result["contexts"] = inst.contexts.size();
    out.result["preparations"] = inst.pure_preparations().size();
    out.result["mixtures"] = inst.mixtures.size();
    out.result["exact"] = inst.exact();
  } else if (kind == "box") {
    auto b = io::box_from_json(in.doc);
    out.result["entropy_split"] = split_json(output_entropy_split(b));
  } else if (kind == "phenomenon") {
    auto r = is_no_disturbance(io::phenomenon_from_json(in.doc), o.tol);
    Json a = Json::array();
    for (const auto& w : r.violations)
      a.push_back({{"output", std::string(1, w.output)},
                   {"value", w.value},
                   {"fixed_input", w.fixed_input},
                   {"inputs", {w.first, w.second}},
                   {"gap", w.gap}});
    out.result["no_disturbance"] = r.holds;
    out.result["violations"] = a;
    out.exit = r.holds ? 0 : 1;
  } else if (kind == "latent_model") {
    auto m = io::latent_model_from_json(in.doc);
    auto p = in.doc.contains("phenomenon") ? io::phenomenon_from_json(in.doc["phenomenon"]) : m.phenomenon();
    out.result["factorisability"] = factorisable_json(factorisable_check(p, m, o.tol));
  } else if (kind == "marble") {
    auto cfg = io::marble_from_json(in.doc);
    for (const auto& c : cfg.scenario.contexts) validate_context(c.context);
    out.result["contexts"] = cfg.scenario.contexts.size();
  } else {
    fail(ErrorKind::input, "unknown kind \"" + kind + "\"");
  }
  return out;
}

void require_kind(const Input& in, const std::string& kind) {
  auto k = io::kind_of(in.doc);
  if (k != kind) fail(ErrorKind::input, "expected a " + kind + " file, got \"" + k + "\"");
}

Outcome cmd_classify(const Input& in, const Options& o) {
  require_kind(in, "empirical");
  auto em = io::empirical_from_json(in.doc);
  Outcome out;
  auto bad = validate_no_disturbance(em, o.tol);
  if (!bad.empty()) {
    out.result["error"] = "not a no-disturbance model: " + bad.front().message;
    out.exit = 1;
    return out;
  }
  const auto cap = o.cap ? o.cap : default_assignment_cap;
  auto v = classify_hierarchy(em, cap);
  out.result = io::to_json(v, em.scenario);
  auto s = signed_global_section(em, 1e-8, std::min<std::uint64_t>(cap, std::uint64_t{1} << 14));
  out.result["signed_section"] = {{"success", s.success},
                                  {"residual", s.residual},
                                  {"negative_weights", s.negative},
                                  {"incident", s.incident}};
  return out;
}

Outcome cmd_compress(const Input& in, const Options& o) {
  require_kind(in, "model");
  auto m = io::model_from_json(in.doc);
  auto q = build_quasi_model(m, o.tol);
  auto c = check_quasi_model(m, q);
  Outcome out;
  out.result["quasi_model"] = io::to_json(q);
  out.result["checks"] = {{"prediction_error", c.prediction_error},
                          {"state_normalization", c.state_normalization},
                          {"response_completeness", c.response_completeness}};
  out.result["negative_entries"] = q.negativity.size();
  return out;
}

Outcome cmd_graph(const Input& in, const Options& o) {
  auto kind = io::kind_of(in.doc);
  ExclusivityGraph g;
  if (kind == "graph") g = io::graph_from_json(in.doc);
  else if (kind == "scenario") g = derive_exclusivity_graph(io::scenario_from_json(in.doc));
  else fail(ErrorKind::input, "expected a graph or scenario file, got \"" + kind + "\"");
  Outcome out;
  const double theta_tol = 1e-4;
  auto alpha = independence_number(g, o.cap ? o.cap : 40);
  auto vf = fractional_packing_number(g);
  auto th = lovasz_number(g, theta_tol, o.cap ? o.cap : 25);
  Json a = Json::array();
  for (auto v : alpha.vertices) a.push_back(g.ids()[v]);
  out.result["vertices"] = g.size();
  out.result["edges"] = g.edge_count();
  out.result["alpha"] = {{"value", alpha.value}, {"set", a}};
  out.result["theta"] = {{"value", th.value}, {"lower", th.lower}, {"upper", th.upper}, {"gap", th.gap}};
  out.result["fractional_packing"] = {{"value", to_string(vf.value)}, {"approx", vf.value_d}};
  out.result["squeeze"] = alpha.value <= th.upper + theta_tol && th.lower <= vf.value_d + theta_tol;
  auto nchv = nchv_exists(g);
  out.result["nchv_assignment_exists"] = nchv.exists;
  if (!o.dot.empty()) {
    std::ofstream f(o.dot);
    if (!f) fail(ErrorKind::input, "cannot write \"" + o.dot + "\"");
    f << to_dot(g);
    out.result["dot"] = o.dot;
  }
  return out;
}

Outcome cmd_marble(const Input& in, const Options& o) {
  require_kind(in, "marble");
  auto cfg = io::marble_from_json(in.doc);
  Outcome out;
  Json stats = Json::array();
  for (const auto& c : cfg.scenario.contexts) {
    auto s = sample_statistics(cfg.prior, c.context, cfg.n, o.seed, o.jobs);
    stats.push_back({{"context", c.id},
                     {"names", c.names},
                     {"frequencies", s.frequencies},
                     {"standard_errors", s.standard_errors}});
  }
  out.result["n"] = cfg.n;
  out.result["seed"] = o.seed;
  out.result["statistics"] = stats;
  if (cfg.scenario.contexts.size() < 2 || cfg.shared.empty()) return out;
  const auto& c1 = cfg.scenario.contexts[0];
  const auto& c2 = cfg.scenario.contexts[1];
  auto pos = [&](const MarbleScenario::Named& c) {
    auto it = std::find(c.names.begin(), c.names.end(), cfg.shared);
    if (it == c.names.end()) fail(ErrorKind::input, "context \"" + c.id + "\" has no direction \"" + cfg.shared + "\"");
    return static_cast<int>(it - c.names.begin());
  };
  const int k1 = pos(c1), k2 = pos(c2);
  auto w = find_ks_witness(c1.context, k1, c2.context, k2, o.seed);
  Json wj = {{"found", w.has_value()}};
  if (w) {
    wj["state"] = io::cvec_to_json(w->state.amplitudes);
    wj["margin"] = w->margin;
  }
  out.result["ks_witness"] = wj;
  auto g = gleason_violation_test(cfg.prior, c1.context, k1, c2.context, k2, cfg.n, o.seed, o.jobs);
  out.result["gleason_gap"] = {{"shared", cfg.shared},
                               {"p_first", g.p_first},
                               {"p_second", g.p_second},
                               {"gap", g.gap},
                               {"standard_error", g.standard_error},
                               {"ci99", {g.ci_low, g.ci_high}},
                               {"excludes_zero", g.excludes_zero}};
  if (cfg.discretize > 0) {
    auto states = discretize_prior(cfg.prior, cfg.discretize, o.seed);
    if (w) states.push_back(w->state.amplitudes);
    MarbleScenario two;
    two.contexts = {c1, c2};
    auto m = export_ontological_model(two, states, std::vector<double>(states.size(), 1.0 / static_cast<double>(states.size())));
    out.result["exported_model"] = {{"ontic_states", states.size()},
                                    {"conditions", io::to_json(validate_model(m))},
                                    {"measurement_contextuality", deviations(detect_measurement_contextuality(m, o.tol))}};
  }
  return out;
}

Json subset_result(const std::vector<PreparationId>& ids, std::uint64_t cap) {
  auto r = feasibility_search(six_state_instance(ids), cap);
  return {{"composites", ids}, {"verdict", r.feasible ? "FEASIBLE" : "INFEASIBLE"}, {"exact", r.exact}};
}

Outcome cmd_counterfactual(const std::optional<Input>& in, const Options& o) {
  const auto cap = o.cap ? o.cap : std::uint64_t{1} << 20;
  Outcome out;
  if (in) {
    require_kind(*in, "counterfactual");
    out.result = io::to_json(feasibility_search(io::counterfactual_from_json(in->doc), cap));
    return out;
  }
  out.result = io::to_json(feasibility_search(six_state_instance(), cap));
  auto f = six_state_fixture();
  Json drops = Json::array();
  for (std::size_t k = 0; k < f.composites.size(); ++k) {
    std::vector<PreparationId> ids;
    for (std::size_t j = 0; j < f.composites.size(); ++j)
      if (j != k) ids.push_back(f.composites[j].first);
    drops.push_back(subset_result(ids, cap));
  }
  out.result["drop_one"] = drops;
  return out;
}

Outcome cmd_loop(const Input& in, const Options& o) {
  auto kind = io::kind_of(in.doc);
  Outcome out;
  if (kind == "box") {
    auto b = io::box_from_json(in.doc);
    out.result["entropy_split"] = split_json(output_entropy_split(b));
    out.result["audit"] = io::to_json(gleason_constraint_audit(b, o.tol));
    return out;
  }
  if (kind != "loop") fail(ErrorKind::input, "expected a box or loop file, got \"" + kind + "\"");
  auto x = io::box_from_json(io::detail::req(in.doc, "box_x", ""), "box_x");
  auto y = io::box_from_json(io::detail::req(in.doc, "box_y", ""), "box_y");
  auto r = loop_fixed_points(x, y);
  Json cells = Json::array();
  for (const auto& c : r.cells) {
    Json sol = Json::array();
    for (const auto& [a, b] : c.solutions) sol.push_back({a, b});
    cells.push_back({{"qX", c.qx}, {"qY", c.qy}, {"fixed_points", to_string(c.kind)}, {"solutions", sol}});
  }
  out.result["cells"] = cells;
  out.result["unique_everywhere"] = r.unique_everywhere;
  if (r.joint) {
    out.result["joint"] = r.joint->probabilities();
    out.result["H(OX OY | QX QY)"] = r.conditional_entropy;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ctxkit: contextuality analysis toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--tol", o.tol, "numerical tolerance")->capture_default_str();
  app.add_option("--seed", o.seed, "random seed")->capture_default_str();
  app.add_option("--format", o.format, "output format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
  app.add_option("--dot", o.dot, "write the exclusivity graph in DOT format (graph)");
  app.add_option("--cap", o.cap, "resource cap (assignments, outcome space or vertices; 0 = default)");
  app.add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_flag("--timing", o.timing, "include wall time in the report");

  std::string path, fixture_action = "list", fixture_name, fixture_out;
  auto add_file = [&](const char* name, const char* help) {
    auto* s = app.add_subcommand(name, help);
    s->add_option("path", path, "input file, or fixture:NAME")->required();
    return s;
  };
  auto* validate = add_file("validate", "validate a scenario, model, table, graph, box or config");
  auto* classify = add_file("classify", "place an empirical model in the contextuality hierarchy");
  auto* compress = add_file("compress", "compress a Gleason-satisfying model into a quasi model");
  auto* graph = add_file("graph", "graph invariants alpha, theta and the fractional packing number");
  auto* marble = add_file("marble", "marble-world statistics, witnesses and Gleason gap");
  auto* counterfactual = app.add_subcommand("counterfactual", "counterfactual feasibility (bundled instance by default)");
  counterfactual->add_option("path", path, "instance file, or fixture:NAME");
  auto* loop = add_file("loop", "loop composition and entropy audit of deterministic boxes");
  auto* fixtures = app.add_subcommand("fixtures", "list or extract bundled fixtures");
  fixtures->add_option("action", fixture_action, "list | extract")->check(CLI::IsMember({"list", "extract"}));
  fixtures->add_option("name", fixture_name, "fixture name");
  fixtures->add_option("-o,--output", fixture_out, "write to a file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  auto* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();

  if (sub == fixtures) {
    try {
      if (fixture_action == "list") {
        for (const auto& e : bundled::entries()) std::cout << e.name << "\t" << e.kind << "\t" << e.description << "\n";
        return 0;
      }
      if (fixture_name.empty()) throw Error(ErrorKind::input, "extract needs a fixture name");
      auto text = bundled::document(fixture_name).dump(2) + "\n";
      if (fixture_out.empty()) {
        std::cout << text;
      } else {
        std::ofstream f(fixture_out);
        if (!f) throw Error(ErrorKind::input, "cannot write \"" + fixture_out + "\"");
        f << text;
      }
      return 0;
    } catch (const Error& e) {
      std::cerr << "ctxkit: " << e.what() << "\n";
      return exit_code(e.kind());
    }
  }

  const auto start = std::chrono::steady_clock::now();
  Json rep;
  int code = 0;
  std::string digest;
  try {
    std::optional<Input> in;
    if (!path.empty()) in = load(path, digest);
    rep = report::envelope(command, in ? in->digest : report::digest("bundled:six_state"));
    rep["tolerances"] = {{"tol", o.tol}};
    Outcome out;
    if (sub == validate) out = cmd_validate(*in, o);
    else if (sub == classify) out = cmd_classify(*in, o);
    else if (sub == compress) out = cmd_compress(*in, o);
    else if (sub == graph) out = cmd_graph(*in, o);
    else if (sub == marble) out = cmd_marble(*in, o);
    else if (sub == counterfactual) out = cmd_counterfactual(in, o);
    else if (sub == loop) out = cmd_loop(*in, o);
    rep["result"] = out.result;
    code = out.exit;
  } catch (const Error& e) {
    if (rep.is_null()) rep = report::envelope(command, digest);
    rep["error"] = {{"kind", to_string(e.kind())}, {"message", e.what()}};
    std::cerr << "ctxkit: " << e.what() << "\n";
    code = exit_code(e.kind());
  }
  if (o.timing)
    rep["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cout << (o.format == "csv" ? report::to_csv(rep) : rep.dump(2) + "\n");
  return code;
}
