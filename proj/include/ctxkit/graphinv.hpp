#pragma once

// Exclusivity graphs and the three bounds on the witness sum:
// independence number alpha, Lovasz number theta, fractional packing v_F.

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ctxkit/error.hpp"
#include "ctxkit/lp.hpp"
#include "ctxkit/rational.hpp"
#include "ctxkit/scenario.hpp"
#include "ctxkit/sdp.hpp"

namespace ctxkit {

/// Weighted event graph. Hyperedges are contexts; pairwise adjacency is
/// derived from co-membership in some hyperedge and never stored separately.
class ExclusivityGraph {
 public:
  ExclusivityGraph() = default;

  ExclusivityGraph(std::vector<std::string> ids, std::vector<double> weights,
                   std::vector<std::vector<std::size_t>> hyperedges, bool maximal_scenario)
      : ids_(std::move(ids)),
        weights_(std::move(weights)),
        hyperedges_(std::move(hyperedges)),
        maximal_(maximal_scenario) {
    if (weights_.size() != ids_.size())
      fail(ErrorKind::structural, "graph has " + std::to_string(ids_.size()) + " vertices but " +
                                      std::to_string(weights_.size()) + " weights");
    const std::size_t n = ids_.size();
    adj_.assign(n, std::vector<char>(n, 0));
    for (const auto& e : hyperedges_) {
      for (auto v : e)
        if (v >= n) fail(ErrorKind::lookup, "hyperedge references vertex " + std::to_string(v));
      for (auto a : e)
        for (auto b : e)
          if (a != b) adj_[a][b] = 1;
    }
  }

  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<std::vector<std::size_t>>& hyperedges() const { return hyperedges_; }
  bool maximal_scenario() const { return maximal_; }
  bool adjacent(std::size_t a, std::size_t b) const { return adj_[a][b] != 0; }

  std::size_t edge_count() const {
    std::size_t c = 0;
    for (std::size_t i = 0; i < size(); ++i)
      for (std::size_t j = i + 1; j < size(); ++j) c += adj_[i][j];
    return c;
  }

  ExclusivityGraph with_weights(std::vector<double> w) const {
    return ExclusivityGraph(ids_, std::move(w), hyperedges_, maximal_);
  }
  ExclusivityGraph with_unit_weights() const {
    return with_weights(std::vector<double>(size(), 1.0));
  }

  friend bool operator==(const ExclusivityGraph& a, const ExclusivityGraph& b) {
    return a.ids_ == b.ids_ && a.weights_ == b.weights_ && a.hyperedges_ == b.hyperedges_ &&
           a.maximal_ == b.maximal_;
  }

 private:
  std::vector<std::string> ids_;
  std::vector<double> weights_;
  std::vector<std::vector<std::size_t>> hyperedges_;
  bool maximal_ = false;
  std::vector<std::vector<char>> adj_;
};

/// One vertex per measurement (its positive outcome), one hyperedge per
/// context, unit weights. The scenario must be in two-outcome form.
inline ExclusivityGraph derive_exclusivity_graph(const Scenario& s) {
  for (const auto& m : s.measurements)
    if (s.arity_of(m) > 2)
      fail(ErrorKind::contract, "unsupported arity: measurement \"" + m + "\" has " +
                                    std::to_string(s.arity_of(m)) +
                                    " outcomes; expand to two-outcome form first");
  std::vector<std::vector<std::size_t>> edges;
  bool all_maximal = !s.contexts.empty();
  for (const auto& c : s.contexts) {
    std::vector<std::size_t> e;
    for (const auto& m : c.members) {
      auto idx = s.measurement_index(m);
      if (!idx) fail(ErrorKind::lookup, "context \"" + c.id + "\" references unknown \"" + m + "\"");
      e.push_back(*idx);
    }
    all_maximal = all_maximal && c.declared_maximal;
    edges.push_back(std::move(e));
  }
  return ExclusivityGraph(s.measurements, std::vector<double>(s.measurements.size(), 1.0),
                          std::move(edges), all_maximal);
}

inline double witness_sigma(const ExclusivityGraph& g) {
  return std::accumulate(g.weights().begin(), g.weights().end(), 0.0);
}

struct ModelCheck {
  bool valid = true;
  std::vector<std::string> violations;
};

/// Weights in [0,1]; every hyperedge sums to <= 1 (to exactly 1 within eps
/// for maximal scenarios).
inline ModelCheck is_probabilistic_model(const ExclusivityGraph& g, double eps = 1e-9) {
  ModelCheck out;
  for (std::size_t v = 0; v < g.size(); ++v) {
    double p = g.weights()[v];
    if (p < -eps || p > 1 + eps) {
      out.valid = false;
      out.violations.push_back("weight of " + g.ids()[v] + " outside [0,1]");
    }
  }
  for (std::size_t e = 0; e < g.hyperedges().size(); ++e) {
    double s = 0;
    for (auto v : g.hyperedges()[e]) s += g.weights()[v];
    if (s > 1 + eps || (g.maximal_scenario() && s < 1 - eps)) {
      out.valid = false;
      std::ostringstream os;
      os << "hyperedge " << e << " sums to " << s;
      out.violations.push_back(os.str());
    }
  }
  return out;
}

struct NchvResult {
  bool exists = false;
  std::vector<int> assignment;  // 0/1 per vertex when exists
  std::size_t nodes_explored = 0;
};

/// Backtracking over 0/1 vertex values. Maximal scenarios need exactly one
/// 1 per hyperedge, otherwise at most one. Vertices are decided in index
/// order, trying 1 before 0.
inline NchvResult nchv_exists(const ExclusivityGraph& g, std::size_t cap = 64) {
  const std::size_t n = g.size();
  if (n > cap) fail(ErrorKind::too_large, "NCHV search over " + std::to_string(n) + " vertices");
  NchvResult res;
  std::vector<std::vector<std::size_t>> incident(n);
  for (std::size_t e = 0; e < g.hyperedges().size(); ++e)
    for (auto v : g.hyperedges()[e]) incident[v].push_back(e);
  std::vector<int> ones(g.hyperedges().size(), 0), open(g.hyperedges().size(), 0);
  for (std::size_t e = 0; e < g.hyperedges().size(); ++e)
    open[e] = static_cast<int>(g.hyperedges()[e].size());
  std::vector<int> val(n, 0);

  auto rec = [&](auto&& self, std::size_t v) -> bool {
    ++res.nodes_explored;
    if (v == n) return true;
    for (int choice : {1, 0}) {
      bool ok = true;
      for (auto e : incident[v]) {
        int o = ones[e] + choice;
        int left = open[e] - 1;
        if (o > 1) ok = false;
        if (g.maximal_scenario() && o == 0 && left == 0) ok = false;
      }
      if (!ok) continue;
      for (auto e : incident[v]) {
        ones[e] += choice;
        --open[e];
      }
      val[v] = choice;
      if (self(self, v + 1)) return true;
      for (auto e : incident[v]) {
        ones[e] -= choice;
        ++open[e];
      }
    }
    return false;
  };
  res.exists = rec(rec, 0);
  if (res.exists) res.assignment = val;
  return res;
}

struct IndependentSet {
  double value = 0;
  std::vector<std::size_t> vertices;
};

/// Exact maximum-weight independent set by branch and bound on 64-bit masks.
inline IndependentSet independence_number(const ExclusivityGraph& g, std::size_t cap = 40) {
  const std::size_t n = g.size();
  if (n > cap || n > 64)
    fail(ErrorKind::too_large, "independence number over " + std::to_string(n) + " vertices");
  std::vector<std::uint64_t> nbr(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (g.adjacent(i, j)) nbr[i] |= std::uint64_t{1} << j;
  std::vector<double> w(g.weights());
  for (auto& x : w) x = std::max(0.0, x);

  double best = -1;
  std::uint64_t best_set = 0;
  auto weight_of = [&](std::uint64_t mask) {
    double s = 0;
    while (mask) {
      int v = std::countr_zero(mask);
      s += w[static_cast<std::size_t>(v)];
      mask &= mask - 1;
    }
    return s;
  };
  auto rec = [&](auto&& self, std::uint64_t cand, std::uint64_t chosen, double cur) -> void {
    if (cand == 0) {
      if (cur > best + 1e-15) {
        best = cur;
        best_set = chosen;
      }
      return;
    }
    if (cur + weight_of(cand) <= best + 1e-15) return;
    int v = std::countr_zero(cand);
    std::uint64_t bit = std::uint64_t{1} << v;
    self(self, cand & ~bit & ~nbr[static_cast<std::size_t>(v)], chosen | bit,
         cur + w[static_cast<std::size_t>(v)]);
    self(self, cand & ~bit, chosen, cur);
  };
  std::uint64_t all = n == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1);
  rec(rec, all, 0, 0.0);
  IndependentSet out;
  out.value = std::max(0.0, best);
  for (std::size_t v = 0; v < n; ++v)
    if (best_set >> v & 1) out.vertices.push_back(v);
  return out;
}

inline bool is_independent(const ExclusivityGraph& g, const std::vector<std::size_t>& set) {
  for (auto a : set)
    for (auto b : set)
      if (a != b && g.adjacent(a, b)) return false;
  return true;
}

/// Maximal cliques by Bron-Kerbosch with pivoting; each clique sorted.
inline std::vector<std::vector<std::size_t>> maximal_cliques(const ExclusivityGraph& g,
                                                            std::size_t cap = 100000) {
  const std::size_t n = g.size();
  if (n > 64) fail(ErrorKind::too_large, "clique enumeration limited to 64 vertices");
  std::vector<std::uint64_t> nbr(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (g.adjacent(i, j)) nbr[i] |= std::uint64_t{1} << j;
  std::vector<std::vector<std::size_t>> out;
  auto rec = [&](auto&& self, std::uint64_t R, std::uint64_t P, std::uint64_t X) -> void {
    if (P == 0 && X == 0) {
      if (out.size() >= cap)
        fail(ErrorKind::too_large, "more than " + std::to_string(cap) + " maximal cliques");
      std::vector<std::size_t> c;
      for (std::size_t v = 0; v < n; ++v)
        if (R >> v & 1) c.push_back(v);
      out.push_back(std::move(c));
      return;
    }
    std::uint64_t PX = P | X;
    int pivot = std::countr_zero(PX);
    int best = -1;
    while (PX) {
      int u = std::countr_zero(PX);
      int cnt = std::popcount(P & nbr[static_cast<std::size_t>(u)]);
      if (cnt > best) {
        best = cnt;
        pivot = u;
      }
      PX &= PX - 1;
    }
    std::uint64_t cand = P & ~nbr[static_cast<std::size_t>(pivot)];
    while (cand) {
      int v = std::countr_zero(cand);
      std::uint64_t bit = std::uint64_t{1} << v;
      self(self, R | bit, P & nbr[static_cast<std::size_t>(v)], X & nbr[static_cast<std::size_t>(v)]);
      P &= ~bit;
      X |= bit;
      cand &= ~bit;
    }
  };
  std::uint64_t all = n == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1);
  if (n > 0) rec(rec, 0, all, 0);
  std::sort(out.begin(), out.end());
  return out;
}

/// True iff every clique's weight sum is <= 1 + eps. It suffices to look at
/// maximal cliques since weights are checked nonnegative separately.
inline bool exclusivity_check(const ExclusivityGraph& g, double eps = 1e-9,
                              std::size_t clique_cap = 100000) {
  for (const auto& c : maximal_cliques(g, clique_cap)) {
    double s = 0;
    for (auto v : c) s += std::max(0.0, g.weights()[v]);
    if (s > 1 + eps) return false;
  }
  return true;
}

struct PackingResult {
  Rational value;
  double value_d = 0;
  std::vector<Rational> q;
  std::vector<std::vector<std::size_t>> cliques;
};

/// max sum p_v q_v over q >= 0 with sum_{v in C} q_v <= 1 for every maximal
/// clique C, solved in exact arithmetic (double weights convert exactly).
inline PackingResult fractional_packing_number(const ExclusivityGraph& g,
                                               std::size_t clique_cap = 100000) {
  PackingResult out;
  out.cliques = maximal_cliques(g, clique_cap);
  const std::size_t n = g.size();
  lp::Problem<Rational> p(n);
  p.objective.resize(n);
  for (std::size_t v = 0; v < n; ++v) p.objective[v] = Rational(std::max(0.0, g.weights()[v]));
  for (const auto& c : out.cliques) {
    std::vector<Rational> row(n, Rational(0));
    for (auto v : c) row[v] = 1;
    p.add_le(std::move(row), Rational(1));
  }
  auto r = lp::solve(p);
  if (r.status != lp::Status::optimal)
    fail(ErrorKind::internal, "packing LP not optimal: " + std::string(lp::to_string(r.status)));
  out.value = r.value;
  out.value_d = r.value.get_d();
  out.q = r.x;
  return out;
}

inline bool packing_feasible(const PackingResult& r) {
  for (const auto& q : r.q)
    if (sgn(q) < 0) return false;
  for (const auto& c : r.cliques) {
    Rational s(0);
    for (auto v : c) s += r.q[v];
    if (s > 1) return false;
  }
  return true;
}

/// Orthonormal labelling a_v (orthogonal whenever u, v are adjacent), a unit
/// state psi, and x_v = <psi, a_v>^2; sum_v p_v x_v approximates theta.
struct ThetaCertificate {
  std::vector<std::size_t> vertices;      // vertices carrying a label
  std::vector<Eigen::VectorXd> labels;    // a_v
  Eigen::VectorXd state;                  // psi
  std::vector<double> x;                  // x_v, aligned with `vertices`
};

struct ThetaResult {
  double value = 0;        // midpoint of the bracket
  double lower = 0;        // <C, X> of a feasible primal matrix
  double upper = 0;        // lambda_max of a feasible dual matrix
  double gap = 0;          // upper - lower
  int iterations = 0;
  std::optional<ThetaCertificate> certificate;
};

/// Weighted Lovasz number
///   theta(G, w) = max sum_{ij} sqrt(w_i w_j) X_ij,  tr X = 1,  X_ij = 0 on edges,  X psd.
/// Zero-weight vertices are dropped first (they do not change the value).
/// Throws not_converged carrying the bracket when the gap stays above tol.
inline ThetaResult lovasz_number(const ExclusivityGraph& g, double tol = 1e-4,
                                 std::size_t cap = 25) {
  if (g.size() > cap)
    fail(ErrorKind::too_large, "theta over " + std::to_string(g.size()) + " vertices");
  std::vector<std::size_t> keep;
  for (std::size_t v = 0; v < g.size(); ++v)
    if (g.weights()[v] > 0) keep.push_back(v);
  ThetaResult out;
  const int n = static_cast<int>(keep.size());
  if (n == 0) return out;

  Eigen::VectorXd s(n);
  for (int i = 0; i < n; ++i) s(i) = std::sqrt(g.weights()[keep[static_cast<std::size_t>(i)]]);
  sdp::Problem prob;
  prob.C = s * s.transpose();
  prob.A.push_back(sdp::SparseSym::identity(n));
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (g.adjacent(keep[static_cast<std::size_t>(i)], keep[static_cast<std::size_t>(j)])) {
        edges.emplace_back(i, j);
        prob.A.push_back(sdp::SparseSym::pick(i, j));
      }
  prob.b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(prob.A.size()));
  prob.b(0) = 1.0;

  auto sol = sdp::solve(prob, {1e-10, 200});
  out.iterations = sol.iterations;

  // Upper bound: any y_e gives theta <= lambda_max(C - sum_e y_e A_e).
  Eigen::MatrixXd D = prob.C;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    double ye = sol.y(static_cast<Eigen::Index>(e + 1));
    D(edges[e].first, edges[e].second) -= 0.5 * ye;
    D(edges[e].second, edges[e].first) -= 0.5 * ye;
  }
  out.upper = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(D, Eigen::EigenvaluesOnly)
                  .eigenvalues()
                  .maxCoeff();

  // Lower bound: repair X into an exactly feasible matrix.
  Eigen::MatrixXd X = 0.5 * (sol.X + sol.X.transpose());
  for (auto [i, j] : edges) X(i, j) = X(j, i) = 0.0;
  double lmin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(X, Eigen::EigenvaluesOnly)
                    .eigenvalues()
                    .minCoeff();
  if (lmin < 0) X += (-lmin) * Eigen::MatrixXd::Identity(n, n);
  X /= X.trace();
  out.lower = (prob.C.cwiseProduct(X)).sum();
  out.gap = std::max(0.0, out.upper - out.lower);
  out.value = 0.5 * (out.upper + out.lower);
  if (out.gap > tol) {
    std::ostringstream os;
    os << "theta solver did not converge: bracket [" << out.lower << ", " << out.upper << "]";
    fail(ErrorKind::not_converged, os.str());
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(X);
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  Eigen::MatrixXd V = es.eigenvectors() * ev.cwiseSqrt().asDiagonal();  // row i = v_i
  Eigen::VectorXd psi = V.transpose() * s;
  if (psi.norm() > 1e-12) {
    psi.normalize();
    ThetaCertificate cert;
    cert.state = psi;
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) {
      Eigen::VectorXd vi = V.row(i).transpose();
      if (vi.norm() < 1e-9) {
        ok = false;
        break;
      }
      vi.normalize();
      cert.vertices.push_back(keep[static_cast<std::size_t>(i)]);
      cert.labels.push_back(vi);
      cert.x.push_back(std::pow(psi.dot(vi), 2));
    }
    if (ok) out.certificate = std::move(cert);
  }
  return out;
}

struct InvariantResult {
  IndependentSet alpha;
  ThetaResult theta;
  PackingResult vf;
};

inline InvariantResult graph_invariants(const ExclusivityGraph& g, double theta_tol = 1e-4) {
  return {independence_number(g), lovasz_number(g, theta_tol), fractional_packing_number(g)};
}

/// n cos(pi/n) / (1 + cos(pi/n)), the Lovasz number of the odd cycle C_n.
inline double odd_cycle_theta(int n) {
  const double c = std::cos(M_PI / n);
  return n * c / (1 + c);
}

inline ExclusivityGraph cycle_graph(std::size_t n, double weight = 1.0, bool maximal = false) {
  std::vector<std::string> ids;
  std::vector<std::vector<std::size_t>> edges;
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back(std::to_string(i + 1));
    edges.push_back({i, (i + 1) % n});
  }
  return ExclusivityGraph(ids, std::vector<double>(n, weight), edges, maximal);
}

inline std::string to_dot(const ExclusivityGraph& g) {
  std::ostringstream os;
  os << "graph exclusivity {\n";
  for (std::size_t e = 0; e < g.hyperedges().size(); ++e) {
    os << "  // hyperedge " << e << ":";
    for (auto v : g.hyperedges()[e]) os << " " << g.ids()[v];
    os << "\n";
  }
  for (std::size_t v = 0; v < g.size(); ++v)
    os << "  \"" << g.ids()[v] << "\" [label=\"" << g.ids()[v] << " (" << g.weights()[v]
       << ")\"];\n";
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = i + 1; j < g.size(); ++j)
      if (g.adjacent(i, j)) os << "  \"" << g.ids()[i] << "\" -- \"" << g.ids()[j] << "\";\n";
  os << "}\n";
  return os.str();
}

}  // namespace ctxkit
