#pragma once

// Marble world: the ontic state is a unit vector and a measurement yields
// the outcome whose projector direction is closest to it (largest squared
// overlap, ties to the lowest index). Responses are deterministic, so a
// direction shared by two contexts can fire in one and not the other.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "ctxkit/error.hpp"
#include "ctxkit/ontmodel.hpp"

namespace ctxkit {

using CVec = Eigen::VectorXcd;

struct MarbleState {
  CVec amplitudes;
  Eigen::Index dim() const { return amplitudes.size(); }
};

struct MarbleContext {
  std::vector<CVec> directions;  // one per outcome
  Eigen::Index dim() const { return directions.empty() ? 0 : directions[0].size(); }
};

inline void validate_state(const MarbleState& s) {
  if (s.dim() == 0) fail(ErrorKind::contract, "empty marble state");
  if (std::fabs(s.amplitudes.norm() - 1) > 1e-12) fail(ErrorKind::contract, "marble state is not normalized");
}

inline void validate_context(const MarbleContext& c) {
  const auto d = c.dim();
  if (d == 0 || static_cast<Eigen::Index>(c.directions.size()) != d)
    fail(ErrorKind::contract, "a context needs exactly d directions");
  for (std::size_t i = 0; i < c.directions.size(); ++i) {
    if (c.directions[i].size() != d) fail(ErrorKind::contract, "context directions differ in dimension");
    if (std::fabs(c.directions[i].norm() - 1) > 1e-10) fail(ErrorKind::contract, "context direction is not a unit vector");
    for (std::size_t j = 0; j < i; ++j)
      if (std::abs(c.directions[j].dot(c.directions[i])) > 1e-10)
        fail(ErrorKind::contract, "context directions are not orthogonal");
  }
}

inline double overlap(const CVec& m, const CVec& v) { return std::norm(m.dot(v)); }

inline constexpr double marble_tie_tol = 1e-12;

inline int marble_outcome(const CVec& lambda, const MarbleContext& c) {
  int best = 0;
  double bv = -1;
  for (std::size_t k = 0; k < c.directions.size(); ++k) {
    double v = overlap(c.directions[k], lambda);
    if (v > bv + marble_tie_tol) {
      bv = v;
      best = static_cast<int>(k);
    }
  }
  return best;
}

inline int marble_outcome(const MarbleState& s, const MarbleContext& c) { return marble_outcome(s.amplitudes, c); }

namespace detail {

inline CVec gaussian_vector(Eigen::Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  CVec v(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    double re = g(rng), im = g(rng);
    v(i) = {re, im};
  }
  return v;
}

inline bool same_ray(const CVec& a, const CVec& b, double tol = 1e-10) {
  return a.size() == b.size() && std::fabs(std::abs(a.dot(b)) - 1) < tol;
}

// Positive when lambda fires `k1` in c1 and some other outcome in c2.
inline double witness_margin(const CVec& v, const MarbleContext& c1, int k1, const MarbleContext& c2, int k2) {
  double s1 = overlap(c1.directions[static_cast<std::size_t>(k1)], v), o1 = 0, o2 = 0;
  for (std::size_t k = 0; k < c1.directions.size(); ++k)
    if (static_cast<int>(k) != k1) o1 = std::max(o1, overlap(c1.directions[k], v));
  for (std::size_t k = 0; k < c2.directions.size(); ++k)
    if (static_cast<int>(k) != k2) o2 = std::max(o2, overlap(c2.directions[k], v));
  double s2 = overlap(c2.directions[static_cast<std::size_t>(k2)], v);
  return std::min(s1 - o1, o2 - s2);
}

}  // namespace detail

struct KsWitness {
  MarbleState state;
  double margin = 0;
  std::size_t evaluations = 0;
};

/// Random restarts with hill climbing on the witness margin. `k1` and `k2`
/// index the shared direction in each context.
inline std::optional<KsWitness> find_ks_witness(const MarbleContext& c1, int k1, const MarbleContext& c2, int k2,
                                                std::uint64_t seed = 1, int restarts = 64, int steps = 200) {
  validate_context(c1);
  validate_context(c2);
  if (c1.dim() != c2.dim()) fail(ErrorKind::contract, "contexts differ in dimension");
  if (!detail::same_ray(c1.directions[static_cast<std::size_t>(k1)], c2.directions[static_cast<std::size_t>(k2)]))
    fail(ErrorKind::contract, "contexts do not share the named direction");
  std::mt19937_64 rng(seed);
  std::size_t evals = 0;
  for (int r = 0; r < restarts; ++r) {
    CVec v = detail::gaussian_vector(c1.dim(), rng).normalized();
    double m = detail::witness_margin(v, c1, k1, c2, k2);
    ++evals;
    double step = 0.5;
    for (int s = 0; s < steps && m <= 1e-9; ++s) {
      CVec w = (v + step * detail::gaussian_vector(c1.dim(), rng)).normalized();
      double mw = detail::witness_margin(w, c1, k1, c2, k2);
      ++evals;
      if (mw > m) {
        v = w;
        m = mw;
      } else {
        step *= 0.97;
      }
    }
    if (m > 1e-9) return KsWitness{{v}, m, evals};
  }
  return std::nullopt;
}

/// Distribution over marble states. haar: uniform on the unit sphere;
/// point: a single state; list: weighted finite set; gaussian: the
/// normalized center plus complex Gaussian noise of the given spread.
struct MarblePrior {
  enum class Kind { point, haar, list, gaussian } kind = Kind::haar;
  Eigen::Index dim = 2;
  std::vector<CVec> states;  // point: one; list: all; gaussian: center
  std::vector<double> weights;
  double spread = 0.1;

  static MarblePrior haar(Eigen::Index d) { return {Kind::haar, d, {}, {}, 0}; }
  static MarblePrior point(CVec v) {
    auto d = v.size();
    return {Kind::point, d, {v.normalized()}, {1.0}, 0};
  }
  static MarblePrior list(std::vector<CVec> vs, std::vector<double> w) {
    if (vs.empty() || vs.size() != w.size()) fail(ErrorKind::contract, "prior list needs one weight per state");
    for (auto& v : vs) v.normalize();
    auto d = vs[0].size();
    return {Kind::list, d, std::move(vs), std::move(w), 0};
  }
  static MarblePrior gaussian(CVec center, double spread) {
    auto d = center.size();
    return {Kind::gaussian, d, {center.normalized()}, {1.0}, spread};
  }

  CVec sample(std::mt19937_64& rng) const {
    switch (kind) {
      case Kind::point: return states[0];
      case Kind::haar: return detail::gaussian_vector(dim, rng).normalized();
      case Kind::list: {
        std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
        return states[pick(rng)];
      }
      case Kind::gaussian: return (states[0] + spread * detail::gaussian_vector(dim, rng)).normalized();
    }
    return {};
  }
};

inline constexpr std::uint64_t marble_batch = 4096;

namespace detail {

// Runs f(batch_index, rng, begin, end) over fixed-size batches seeded by
// (seed, batch index); results depend only on the batch, never the worker.
template <class F>
void for_batches(std::uint64_t n, std::uint64_t seed, unsigned jobs, F&& f) {
  const std::uint64_t nb = (n + marble_batch - 1) / marble_batch;
  auto run = [&](std::uint64_t b) {
    std::seed_seq ss{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                     static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    std::mt19937_64 rng(ss);
    f(b, rng, b * marble_batch, std::min(n, (b + 1) * marble_batch));
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::uint64_t>(nb, 1))));
  if (jobs == 1) {
    for (std::uint64_t b = 0; b < nb; ++b) run(b);
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < jobs; ++t)
    pool.emplace_back([&, t] {
      for (std::uint64_t b = t; b < nb; b += jobs) run(b);
    });
  for (auto& th : pool) th.join();
}

}  // namespace detail

struct MarbleStatistics {
  std::uint64_t n = 0;
  std::vector<std::uint64_t> counts;
  std::vector<double> frequencies;
  std::vector<double> standard_errors;
};

inline MarbleStatistics sample_statistics(const MarblePrior& prior, const MarbleContext& c, std::uint64_t n,
                                          std::uint64_t seed, unsigned jobs = 1) {
  if (n == 0) fail(ErrorKind::contract, "sample count must be at least 1");
  validate_context(c);
  if (c.dim() != prior.dim) fail(ErrorKind::contract, "prior and context differ in dimension");
  const std::size_t d = c.directions.size();
  const std::uint64_t nb = (n + marble_batch - 1) / marble_batch;
  std::vector<std::vector<std::uint64_t>> per(nb, std::vector<std::uint64_t>(d, 0));
  detail::for_batches(n, seed, jobs, [&](std::uint64_t b, std::mt19937_64& rng, std::uint64_t lo, std::uint64_t hi) {
    for (auto i = lo; i < hi; ++i) ++per[b][static_cast<std::size_t>(marble_outcome(prior.sample(rng), c))];
  });
  MarbleStatistics s;
  s.n = n;
  s.counts.assign(d, 0);
  for (const auto& p : per)
    for (std::size_t k = 0; k < d; ++k) s.counts[k] += p[k];
  for (std::size_t k = 0; k < d; ++k) {
    double f = static_cast<double>(s.counts[k]) / static_cast<double>(n);
    s.frequencies.push_back(f);
    s.standard_errors.push_back(std::sqrt(f * (1 - f) / static_cast<double>(n)));
  }
  return s;
}

struct GleasonGapEstimate {
  std::uint64_t n = 0;
  double p_first = 0, p_second = 0;
  double gap = 0, standard_error = 0;
  double ci_low = 0, ci_high = 0;  // 99% normal interval
  bool excludes_zero = false;
};

inline constexpr double z99 = 2.5758293035489004;

/// P(shared fires | c1) - P(shared fires | c2), estimated from paired
/// samples (each ontic state is measured in both contexts).
inline GleasonGapEstimate gleason_violation_test(const MarblePrior& prior, const MarbleContext& c1, int k1,
                                                 const MarbleContext& c2, int k2, std::uint64_t n,
                                                 std::uint64_t seed, unsigned jobs = 1) {
  if (n == 0) fail(ErrorKind::contract, "sample count must be at least 1");
  validate_context(c1);
  validate_context(c2);
  if (c1.dim() != prior.dim || c2.dim() != prior.dim) fail(ErrorKind::contract, "prior and contexts differ in dimension");
  if (!detail::same_ray(c1.directions[static_cast<std::size_t>(k1)], c2.directions[static_cast<std::size_t>(k2)]))
    fail(ErrorKind::contract, "contexts do not share the named direction");
  struct Tally {
    std::uint64_t a = 0, b = 0, plus = 0, minus = 0;
  };
  const std::uint64_t nb = (n + marble_batch - 1) / marble_batch;
  std::vector<Tally> per(nb);
  detail::for_batches(n, seed, jobs, [&](std::uint64_t b, std::mt19937_64& rng, std::uint64_t lo, std::uint64_t hi) {
    for (auto i = lo; i < hi; ++i) {
      CVec v = prior.sample(rng);
      bool x = marble_outcome(v, c1) == k1, y = marble_outcome(v, c2) == k2;
      per[b].a += x;
      per[b].b += y;
      per[b].plus += x && !y;
      per[b].minus += y && !x;
    }
  });
  Tally t;
  for (const auto& p : per) {
    t.a += p.a;
    t.b += p.b;
    t.plus += p.plus;
    t.minus += p.minus;
  }
  GleasonGapEstimate g;
  const double nn = static_cast<double>(n);
  g.n = n;
  g.p_first = static_cast<double>(t.a) / nn;
  g.p_second = static_cast<double>(t.b) / nn;
  g.gap = g.p_first - g.p_second;
  double second_moment = static_cast<double>(t.plus + t.minus) / nn;
  double var = std::max(0.0, second_moment - g.gap * g.gap);
  g.standard_error = n > 1 ? std::sqrt(var / (nn - 1)) : 0.0;
  g.ci_low = g.gap - z99 * g.standard_error;
  g.ci_high = g.gap + z99 * g.standard_error;
  g.excludes_zero = g.ci_low > 0 || g.ci_high < 0;
  return g;
}

/// Named contexts over named directions; a direction name shared between
/// contexts is one measurement.
struct MarbleScenario {
  struct Named {
    ContextId id;
    MarbleContext context;
    std::vector<MeasurementId> names;  // one per direction
  };
  std::vector<Named> contexts;
};

/// Ontological model on a finite set of ontic states, one preparation
/// "prior" with the given weights, event {name, 0} meaning "this direction
/// fired" with deterministic response vectors.
inline OntologicalModel export_ontological_model(const MarbleScenario& ms, const std::vector<CVec>& states,
                                                 const std::vector<double>& weights) {
  if (states.empty() || states.size() != weights.size())
    fail(ErrorKind::contract, "need one weight per ontic state");
  OntologicalModel m;
  m.num_ontic_states = states.size();
  m.preparations["prior"] = weights;
  for (const auto& nc : ms.contexts) {
    validate_context(nc.context);
    if (nc.names.size() != nc.context.directions.size())
      fail(ErrorKind::contract, "context \"" + nc.id + "\" needs one name per direction");
    Context ctx{nc.id, nc.names, true};
    m.scenario.contexts.push_back(ctx);
    for (const auto& n : nc.names)
      if (!m.scenario.has_measurement(n)) m.scenario.measurements.push_back(n);
    for (std::size_t k = 0; k < nc.names.size(); ++k) {
      Response r{{nc.names[k], 0}, nc.id, std::vector<double>(states.size(), 0.0)};
      for (std::size_t l = 0; l < states.size(); ++l)
        r.xi[l] = marble_outcome(states[l], nc.context) == static_cast<int>(k) ? 1.0 : 0.0;
      m.responses.push_back(std::move(r));
    }
  }
  return m;
}

/// Draws m ontic states from the prior (batch-seeded) with equal weights.
inline std::vector<CVec> discretize_prior(const MarblePrior& prior, std::uint64_t m, std::uint64_t seed) {
  std::vector<CVec> out(m);
  detail::for_batches(m, seed, 1, [&](std::uint64_t, std::mt19937_64& rng, std::uint64_t lo, std::uint64_t hi) {
    for (auto i = lo; i < hi; ++i) out[i] = prior.sample(rng);
  });
  return out;
}

namespace fixtures {

inline CVec real_vector(std::initializer_list<double> xs) {
  CVec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v.normalized();
}

/// {A, B, C} and {C, D, E} in d = 3 with A, B, C the standard basis and
/// D, E = (A +- B)/sqrt2. C is index 2 in the first context and 0 in the
/// second.
inline MarbleScenario ks_pair() {
  MarbleScenario s;
  s.contexts.push_back({"M1", {{real_vector({1, 0, 0}), real_vector({0, 1, 0}), real_vector({0, 0, 1})}},
                        {"A", "B", "C"}});
  s.contexts.push_back({"M2", {{real_vector({0, 0, 1}), real_vector({1, 1, 0}), real_vector({1, -1, 0})}},
                        {"C", "D", "E"}});
  return s;
}

/// Asymmetric pair: the second context keeps C and rotates A, B within
/// their plane by atan(1/2), so D = (2A + B)/sqrt5 and E = (A - 2B)/sqrt5.
inline MarbleScenario asymmetric_pair() {
  MarbleScenario s;
  s.contexts.push_back({"M1", {{real_vector({1, 0, 0}), real_vector({0, 1, 0}), real_vector({0, 0, 1})}},
                        {"A", "B", "C"}});
  s.contexts.push_back({"M2", {{real_vector({0, 0, 1}), real_vector({2, 1, 0}), real_vector({1, -2, 0})}},
                        {"C", "D", "E"}});
  return s;
}

}  // namespace fixtures

}  // namespace ctxkit
