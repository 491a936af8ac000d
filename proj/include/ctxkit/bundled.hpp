#pragma once

// Bundled fixtures as JSON documents, addressable by name.

#include <string>
#include <vector>

#include "ctxkit/fixtures.hpp"
#include "ctxkit/io.hpp"
#include "ctxkit/marbleworld.hpp"

namespace ctxkit::bundled {

struct Entry {
  std::string name;
  std::string kind;
  std::string description;
};

inline const std::vector<Entry>& entries() {
  static const std::vector<Entry> list = {
      {"kcbs", "scenario", "five two-outcome measurements on a cycle"},
      {"c5", "graph", "unit-weight 5-cycle"},
      {"pr_box", "empirical", "PR box, exact"},
      {"chsh_tsirelson", "empirical", "CHSH correlations at the Tsirelson bound"},
      {"classical", "empirical", "independent local coins"},
      {"hardy", "empirical", "no-signalling table with the Hardy support"},
      {"contextual_gleason", "model", "measurement-contextual model obeying Gleason's property"},
      {"noncontextual", "model", "context-independent responses"},
      {"six_state", "counterfactual", "six qubit states, five composites of the maximally mixed state"},
      {"six_state_latent", "latent_model", "product-prior latent model of the six-state composites"},
      {"identical_prior", "latent_model", "same responses, one prior for every preparation"},
      {"xor_box", "box", "O = I xor Q, uniform bits"},
      {"copy_box", "box", "O = I"},
      {"constant_box", "box", "O = 0"},
      {"ontic_box", "box", "O = Q, input ignored"},
      {"ks_pair", "marble", "{A,B,C} and {C,D,E} in d = 3, D and E at 45 degrees"},
      {"asymmetric_pair", "marble", "{A,B,C} and {C,D,E} in d = 3, D and E rotated by atan(1/2)"},
  };
  return list;
}

namespace detail {
inline io::Json box(int ni, int nq, int no, const std::vector<int>& f) {
  auto j = io::to_json(BoxBehavior::from_function(ni, nq, no, f));
  io::Json out;
  out["kind"] = "box";
  for (const auto& [k, v] : j.items()) out[k] = v;
  return out;
}

inline io::Json marble(MarbleScenario s) {
  io::MarbleConfig cfg;
  cfg.scenario = std::move(s);
  cfg.prior = MarblePrior::haar(3);
  cfg.shared = "C";
  return io::to_json(cfg);
}

inline io::Json with_kind(io::Json j, const std::string& kind) {
  io::Json out;
  out["kind"] = kind;
  for (const auto& [k, v] : j.items())
    if (k != "kind") out[k] = v;
  return out;
}
}  // namespace detail

inline io::Json document(const std::string& name) {
  if (name == "kcbs") return detail::with_kind(io::to_json(fixtures::kcbs_scenario()), "scenario");
  if (name == "c5") return io::to_json(cycle_graph(5));
  if (name == "pr_box") return io::to_json(fixtures::pr_box());
  if (name == "chsh_tsirelson") return io::to_json(fixtures::chsh_tsirelson());
  if (name == "classical") return io::to_json(fixtures::classical_product());
  if (name == "hardy") return io::to_json(fixtures::hardy());
  if (name == "contextual_gleason") return io::to_json(fixtures::contextual_gleason_model());
  if (name == "noncontextual") return io::to_json(fixtures::noncontextual_model());
  if (name == "six_state") return io::to_json(six_state_instance());
  if (name == "six_state_latent") return io::to_json(fixtures::six_state_latent_model());
  if (name == "identical_prior") return io::to_json(fixtures::identical_prior_model());
  if (name == "xor_box") return detail::box(2, 2, 2, {0, 1, 1, 0});
  if (name == "copy_box") return detail::box(2, 1, 2, {0, 1});
  if (name == "constant_box") return detail::box(2, 1, 2, {0, 0});
  if (name == "ontic_box") return detail::box(2, 2, 2, {0, 1, 0, 1});
  if (name == "ks_pair") return detail::marble(fixtures::ks_pair());
  if (name == "asymmetric_pair") return detail::marble(fixtures::asymmetric_pair());
  fail(ErrorKind::lookup, "no bundled fixture named \"" + name + "\"");
}

}  // namespace ctxkit::bundled
