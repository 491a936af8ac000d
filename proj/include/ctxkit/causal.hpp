#pragma once

// No-disturbance phenomena and factorisability of latent-variable models;
// deterministic boxes O = f(I, Q), their loop composition and the entropy
// chain showing that a unique loop forces I(O:I) = 0.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "ctxkit/error.hpp"
#include "ctxkit/info.hpp"
#include "ctxkit/lp.hpp"
#include "ctxkit/rational.hpp"

namespace ctxkit {

/// P(a, b | x, y). A prepare-measure scenario uses x = measurement,
/// y = preparation, a = outcome and a one-valued b for the trivial event.
struct Phenomenon {
  int na = 2, nb = 1, nx = 1, ny = 1;
  std::vector<double> table;  // index ((x * ny + y) * na + a) * nb + b

  double operator()(int a, int b, int x, int y) const {
    return table[static_cast<std::size_t>(((x * ny + y) * na + a) * nb + b)];
  }
  double& at(int a, int b, int x, int y) {
    return table[static_cast<std::size_t>(((x * ny + y) * na + a) * nb + b)];
  }
  static Phenomenon zeros(int na, int nb, int nx, int ny) {
    return {na, nb, nx, ny, std::vector<double>(static_cast<std::size_t>(na * nb * nx * ny), 0.0)};
  }
};

struct SignallingWitness {
  char output = 'A';    // 'A' or 'B'
  int value = 0;        // output value
  int fixed_input = 0;  // x for A, y for B
  int first = 0, second = 0;  // the other party's inputs compared
  double gap = 0;
};

struct NoDisturbanceResult {
  bool holds = true;
  std::vector<SignallingWitness> violations;
};

inline NoDisturbanceResult is_no_disturbance(const Phenomenon& p, double tol = 1e-9) {
  if (p.table.size() != static_cast<std::size_t>(p.na * p.nb * p.nx * p.ny))
    fail(ErrorKind::structural, "phenomenon table has the wrong size");
  NoDisturbanceResult out;
  auto pa = [&](int a, int x, int y) {
    double s = 0;
    for (int b = 0; b < p.nb; ++b) s += p(a, b, x, y);
    return s;
  };
  auto pb = [&](int b, int x, int y) {
    double s = 0;
    for (int a = 0; a < p.na; ++a) s += p(a, b, x, y);
    return s;
  };
  for (int x = 0; x < p.nx; ++x)
    for (int a = 0; a < p.na; ++a)
      for (int y = 1; y < p.ny; ++y) {
        double g = std::fabs(pa(a, x, y) - pa(a, x, 0));
        if (g > tol) out.violations.push_back({'A', a, x, 0, y, g});
      }
  for (int y = 0; y < p.ny; ++y)
    for (int b = 0; b < p.nb; ++b)
      for (int x = 1; x < p.nx; ++x) {
        double g = std::fabs(pb(b, x, y) - pb(b, 0, y));
        if (g > tol) out.violations.push_back({'B', b, y, 0, x, g});
      }
  out.holds = out.violations.empty();
  return out;
}

/// Latent-variable model of a prepare-measure phenomenon: mu[y] over
/// num_states values of lambda, xi[x][a] the response for outcome a of
/// measurement x. Preparations may be declared as mixtures of components;
/// the components' own statistics then constrain the alternative priors
/// considered by factorisable_check.
struct LatentModel {
  std::size_t num_states = 0;
  std::vector<std::vector<double>> mu;
  std::vector<std::vector<std::vector<double>>> xi;

  struct Component {
    std::string id;
    std::vector<double> mu;
  };
  std::vector<Component> components;
  std::vector<std::vector<double>> decomposition;  // [y][component] weights; empty if none

  Phenomenon phenomenon() const {
    const int nx = static_cast<int>(xi.size());
    const int na = nx ? static_cast<int>(xi[0].size()) : 1;
    auto p = Phenomenon::zeros(na, 1, nx, static_cast<int>(mu.size()));
    for (int x = 0; x < nx; ++x)
      for (int y = 0; y < p.ny; ++y)
        for (int a = 0; a < na; ++a) {
          double s = 0;
          for (std::size_t l = 0; l < num_states; ++l)
            s += mu[static_cast<std::size_t>(y)][l] * xi[static_cast<std::size_t>(x)][static_cast<std::size_t>(a)][l];
          p.at(a, 0, x, y) = s;
        }
    return p;
  }
};

struct FactorisableVerdict {
  bool reproduces = false;
  bool no_disturbance = false;
  bool factorisable = false;  // the model itself has P(lambda | y) independent of y
  bool fine_tuned = false;    // no-disturbance phenomenon, mu depends on y
  std::optional<std::vector<double>> prior;  // verified P(lambda) when factorisable
  double prior_residual = 0;
  // Whether some single prior reproduces the phenomenon with the same
  // responses (and, when declared, the same decompositions into
  // components with their statistics). Infeasible means no
  // preparation-independent model with these responses exists.
  bool alternative_exists = false;
  bool exact = false;
  std::string verdict;
};

namespace detail {

template <class T>
lp::Status prior_lp(const LatentModel& m, const Phenomenon& p, T (*conv)(double)) {
  const std::size_t L = m.num_states;
  const std::size_t nc = m.decomposition.empty() ? 0 : m.components.size();
  const std::size_t nv = L * (1 + nc);
  lp::Problem<T> prob(nv);
  auto stat_row = [&](std::size_t block, int x, int a) {
    std::vector<T> row(nv, T(0));
    for (std::size_t l = 0; l < L; ++l)
      row[block * L + l] = conv(m.xi[static_cast<std::size_t>(x)][static_cast<std::size_t>(a)][l]);
    return row;
  };
  std::vector<T> ones(nv, T(0));
  for (std::size_t l = 0; l < L; ++l) ones[l] = T(1);
  prob.add_eq(ones, T(1));
  for (int x = 0; x < p.nx; ++x)
    for (int a = 0; a < p.na; ++a)
      for (int y = 0; y < p.ny; ++y) prob.add_eq(stat_row(0, x, a), conv(p(a, 0, x, y)));
  for (std::size_t c = 0; c < nc; ++c) {
    std::vector<T> norm(nv, T(0));
    for (std::size_t l = 0; l < L; ++l) norm[(1 + c) * L + l] = T(1);
    prob.add_eq(norm, T(1));
    for (int x = 0; x < p.nx; ++x)
      for (int a = 0; a < p.na; ++a) {
        double s = 0;
        for (std::size_t l = 0; l < L; ++l)
          s += m.components[c].mu[l] * m.xi[static_cast<std::size_t>(x)][static_cast<std::size_t>(a)][l];
        prob.add_eq(stat_row(1 + c, x, a), conv(s));
      }
  }
  for (std::size_t y = 0; y < m.decomposition.size(); ++y)
    for (std::size_t l = 0; l < L; ++l) {
      std::vector<T> row(nv, T(0));
      row[l] = T(1);
      for (std::size_t c = 0; c < nc; ++c) row[(1 + c) * L + l] = -conv(m.decomposition[y][c]);
      prob.add_eq(row, T(0));
    }
  return lp::solve(prob).status;
}

}  // namespace detail

/// Factorisability audit of a latent model for a prepare-measure
/// phenomenon. The model must reproduce `p` within tol.
inline FactorisableVerdict factorisable_check(const Phenomenon& p, const LatentModel& m,
                                              double tol = 1e-9) {
  FactorisableVerdict v;
  auto q = m.phenomenon();
  if (q.nx != p.nx || q.ny != p.ny || q.na != p.na || p.nb != 1)
    fail(ErrorKind::precondition, "latent model does not match the phenomenon's shape");
  for (std::size_t i = 0; i < p.table.size(); ++i)
    if (std::fabs(p.table[i] - q.table[i]) > tol)
      fail(ErrorKind::precondition, "latent model does not reproduce the phenomenon");
  v.reproduces = true;
  v.no_disturbance = is_no_disturbance(p, tol).holds;

  bool same = true;
  for (const auto& mu : m.mu)
    for (std::size_t l = 0; l < m.num_states; ++l)
      if (std::fabs(mu[l] - m.mu[0][l]) > tol) same = false;
  if (same && !m.mu.empty()) {
    v.factorisable = true;
    v.prior = m.mu[0];
    auto r = LatentModel{m.num_states, std::vector<std::vector<double>>(m.mu.size(), m.mu[0]), m.xi, {}, {}}
                 .phenomenon();
    for (std::size_t i = 0; i < p.table.size(); ++i)
      v.prior_residual = std::max(v.prior_residual, std::fabs(r.table[i] - p.table[i]));
  }
  v.fine_tuned = !v.factorisable && v.no_disturbance;

  bool exact = true;
  auto check = [&](double x) {
    if (!recognize_rational(x)) exact = false;
  };
  for (double x : p.table) check(x);
  for (const auto& c : m.components)
    for (double x : c.mu) check(x);
  for (const auto& row : m.decomposition)
    for (double x : row) check(x);
  for (const auto& r : m.xi)
    for (const auto& xs : r)
      for (double x : xs) check(x);
  v.exact = exact;
  lp::Status st;
  if (exact) {
    st = detail::prior_lp<Rational>(m, p, [](double x) { return *recognize_rational(x); });
  } else {
    st = detail::prior_lp<double>(m, p, [](double x) { return x; });
  }
  v.alternative_exists = st == lp::Status::optimal;

  if (v.factorisable)
    v.verdict = "factorisable";
  else if (v.fine_tuned)
    v.verdict = "not factorisable / fine-tuned";
  else
    v.verdict = "not factorisable";
  return v;
}

/// O = f(I, Q) with independent priors on I and Q.
struct BoxBehavior {
  int ni = 2, nq = 1, no = 2;
  std::vector<double> cond;  // P(o | i, q), index (i * nq + q) * no + o
  std::vector<double> p_i, p_q;
  bool deterministic = true;

  static BoxBehavior from_function(int ni, int nq, int no, const std::vector<int>& f,
                                   std::vector<double> p_i = {}, std::vector<double> p_q = {}) {
    BoxBehavior b{ni, nq, no, std::vector<double>(static_cast<std::size_t>(ni * nq * no), 0.0),
                  std::move(p_i), std::move(p_q), true};
    if (f.size() != static_cast<std::size_t>(ni * nq)) fail(ErrorKind::structural, "box function has wrong size");
    for (int k = 0; k < ni * nq; ++k) {
      int o = f[static_cast<std::size_t>(k)];
      if (o < 0 || o >= no) fail(ErrorKind::contract, "box output out of range");
      b.cond[static_cast<std::size_t>(k * no + o)] = 1.0;
    }
    if (b.p_i.empty()) b.p_i.assign(static_cast<std::size_t>(ni), 1.0 / ni);
    if (b.p_q.empty()) b.p_q.assign(static_cast<std::size_t>(nq), 1.0 / nq);
    return b;
  }

  double p(int o, int i, int q) const { return cond[static_cast<std::size_t>((i * nq + q) * no + o)]; }

  /// The deterministic output, or -1 when the conditional is not 0/1.
  int f(int i, int q) const {
    int out = -1;
    for (int o = 0; o < no; ++o) {
      double v = p(o, i, q);
      if (v == 1.0) out = o;
      else if (v != 0.0) return -1;
    }
    return out;
  }

  void require_deterministic() const {
    if (!deterministic) fail(ErrorKind::contract, "box is not flagged deterministic");
    for (int i = 0; i < ni; ++i)
      for (int q = 0; q < nq; ++q)
        if (f(i, q) < 0) fail(ErrorKind::contract, "box is flagged deterministic but P(O|I,Q) is not 0/1");
  }

  JointDistribution joint() const {
    std::vector<double> t;
    for (int o = 0; o < no; ++o)
      for (int i = 0; i < ni; ++i)
        for (int q = 0; q < nq; ++q)
          t.push_back(p(o, i, q) * p_i[static_cast<std::size_t>(i)] * p_q[static_cast<std::size_t>(q)]);
    return JointDistribution({{"O", no}, {"I", ni}, {"Q", nq}}, t);
  }
};

struct EntropySplit {
  double h_o = 0, i_oi = 0, i_oiq = 0, residual = 0;
};

/// H(O) against I(O:I) + I(OI:Q).
inline EntropySplit output_entropy_split(const BoxBehavior& b) {
  b.require_deterministic();
  auto d = b.joint();
  EntropySplit r;
  r.h_o = entropy(d, {"O"});
  r.i_oi = mutual_information(d, {"O"}, {"I"});
  r.i_oiq = mutual_information(d, {"O", "I"}, {"Q"});
  r.residual = std::fabs(r.h_o - (r.i_oi + r.i_oiq));
  return r;
}

enum class FixedPoints { unique, none, multiple };

inline const char* to_string(FixedPoints f) {
  switch (f) {
    case FixedPoints::unique: return "unique";
    case FixedPoints::none: return "none";
    case FixedPoints::multiple: return "multiple";
  }
  return "?";
}

struct LoopCell {
  int qx = 0, qy = 0;
  FixedPoints kind = FixedPoints::none;
  std::vector<std::pair<int, int>> solutions;  // (o^X, o^Y)
};

struct LoopResult {
  std::vector<LoopCell> cells;
  bool unique_everywhere = false;
  std::optional<JointDistribution> joint;  // over OX, OY, QX, QY when unique everywhere
  double conditional_entropy = 0;          // H(OX OY | QX QY) when unique everywhere
};

/// The two-box loop: O^X feeds I^Y and O^Y feeds I^X.
inline LoopResult loop_fixed_points(const BoxBehavior& x, const BoxBehavior& y) {
  x.require_deterministic();
  y.require_deterministic();
  if (x.no != y.ni || y.no != x.ni) fail(ErrorKind::contract, "loop wiring has incompatible arities");
  LoopResult out;
  out.unique_everywhere = true;
  for (int qx = 0; qx < x.nq; ++qx)
    for (int qy = 0; qy < y.nq; ++qy) {
      LoopCell c{qx, qy, FixedPoints::none, {}};
      for (int ox = 0; ox < x.no; ++ox)
        for (int oy = 0; oy < y.no; ++oy)
          if (x.f(oy, qx) == ox && y.f(ox, qy) == oy) c.solutions.emplace_back(ox, oy);
      c.kind = c.solutions.empty() ? FixedPoints::none
               : c.solutions.size() == 1 ? FixedPoints::unique : FixedPoints::multiple;
      if (c.kind != FixedPoints::unique) out.unique_everywhere = false;
      out.cells.push_back(std::move(c));
    }
  if (!out.unique_everywhere) return out;
  std::vector<double> t(static_cast<std::size_t>(x.no * y.no * x.nq * y.nq), 0.0);
  for (const auto& c : out.cells) {
    auto [ox, oy] = c.solutions[0];
    t[static_cast<std::size_t>(((ox * y.no + oy) * x.nq + c.qx) * y.nq + c.qy)] =
        x.p_q[static_cast<std::size_t>(c.qx)] * y.p_q[static_cast<std::size_t>(c.qy)];
  }
  out.joint = JointDistribution({{"OX", x.no}, {"OY", y.no}, {"QX", x.nq}, {"QY", y.nq}}, t);
  out.conditional_entropy = conditional_entropy(*out.joint, {"OX", "OY"}, {"QX", "QY"});
  return out;
}

struct AuditStep {
  std::string name;
  double lhs = 0, rhs = 0, slack = 0;  // slack = rhs - lhs; a holding relation has slack >= -tol
};

struct GleasonAudit {
  double h_o = 0, i_oi = 0;
  bool forced_zero = false;  // I(O:I) = 0 within tol
  bool loop_unique = false;
  bool determinism_fails = false;  // non-unique loop or H(OX OY | QX QY) > tol
  std::vector<LoopCell> loop;
  std::vector<AuditStep> steps;
};

/// Evaluates the entropy chain on the loop of two copies of b.
inline GleasonAudit gleason_constraint_audit(const BoxBehavior& b, double tol = 1e-10) {
  b.require_deterministic();
  GleasonAudit a;
  auto lem = output_entropy_split(b);
  a.h_o = lem.h_o;
  a.i_oi = lem.i_oi;
  a.forced_zero = lem.i_oi < tol;
  if (b.no != b.ni) {
    fail(ErrorKind::contract, "audit needs a box whose output can feed its own input");
  }
  auto loop = loop_fixed_points(b, b);
  a.loop = loop.cells;
  a.loop_unique = loop.unique_everywhere;
  a.steps.push_back({"H(O) = I(O:I) + I(OI:Q)", lem.h_o, lem.i_oi + lem.i_oiq,
                     lem.i_oi + lem.i_oiq - lem.h_o});
  if (!loop.unique_everywhere) {
    a.determinism_fails = true;
    return a;
  }
  const auto& d = *loop.joint;
  double h_cond = loop.conditional_entropy;
  a.determinism_fails = h_cond > tol;
  double h_xy = entropy(d, {"OX", "OY"});
  double i_xy_q = mutual_information(d, {"OX", "OY"}, {"QX", "QY"});
  double i_ox_oy = mutual_information(d, {"OX"}, {"OY"});
  a.steps.push_back({"H(OX OY | QX QY) = 0", h_cond, 0.0, -h_cond});
  a.steps.push_back({"H(OX OY) = I(OX OY : QX QY)", h_xy, i_xy_q, i_xy_q - h_xy});
  a.steps.push_back({"I(OX:OY) = I(O:I)", i_ox_oy, lem.i_oi, lem.i_oi - i_ox_oy});
  a.steps.push_back({"H(OX OY) = 2H(O) - I(O:I)", h_xy, 2 * lem.h_o - lem.i_oi, 2 * lem.h_o - lem.i_oi - h_xy});
  a.steps.push_back({"I(OX OY : QX QY) <= 2 I(OI:Q)", i_xy_q, 2 * lem.i_oiq, 2 * lem.i_oiq - i_xy_q});
  a.steps.push_back({"2H(O) - I(O:I) <= 2H(O) - 2I(O:I)", 2 * lem.h_o - lem.i_oi,
                     2 * lem.h_o - 2 * lem.i_oi, -lem.i_oi});
  return a;
}

}  // namespace ctxkit
